#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fairhpo/common.hpp"

namespace fairhpo::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Parameter tensor with gradient and (lazily allocated) Adam moments.
// `decay` marks tensors subject to weight decay; biases, norm parameters
// and token embeddings are exempt.
struct Tensor {
    std::string name;
    Mat value;
    Mat grad;
    Mat m, v;
    bool decay = true;

    void init_zero(Eigen::Index rows, Eigen::Index cols, std::string n, bool dec) {
        name = std::move(n);
        value.setZero(rows, cols);
        grad.setZero(rows, cols);
        decay = dec;
    }

    void init_uniform(Eigen::Index rows, Eigen::Index cols, std::string n, double scale,
                      Rng& rng, bool dec) {
        init_zero(rows, cols, std::move(n), dec);
        double* p = value.data();
        for (Eigen::Index i = 0; i < value.size(); ++i) p[i] = rng.uniform(-scale, scale);
    }

    void init_const(Eigen::Index rows, Eigen::Index cols, std::string n, double c) {
        init_zero(rows, cols, std::move(n), /*dec=*/false);
        value.setConstant(c);
    }

    Eigen::Index size() const { return value.size(); }
    void zero_grad() { grad.setZero(); }
};

// Adam with decoupled multiplicative weight decay: each step first applies
// theta <- theta * (1 - wd) to decaying tensors, then the moment update
// scaled by the learning rate. At lr = 0 parameters therefore change only
// by the decay factor.
struct Adam {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    void step(std::vector<Tensor*>& params, double lr, double weight_decay, int64_t t) const {
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (Tensor* p : params) {
            if (p->m.size() == 0) {
                p->m.setZero(p->value.rows(), p->value.cols());
                p->v.setZero(p->value.rows(), p->value.cols());
            }
            // fused single pass; wide tensors make separate elementwise
            // expressions memory-bound
            const double keep = (p->decay && weight_decay != 0.0) ? 1.0 - weight_decay : 1.0;
            double* th = p->value.data();
            const double* g = p->grad.data();
            double* m = p->m.data();
            double* v = p->v.data();
            const Eigen::Index n = p->value.size();
            for (Eigen::Index i = 0; i < n; ++i) {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                th[i] = th[i] * keep - lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
            }
        }
    }
};

struct ForwardCtx {
    bool train = false;
    Rng* rng = nullptr;         // consumed by dropout in train mode
    bool update_stats = true;   // batch-norm running statistics
};

// y = x * W^T + b with W of shape (out, in).
struct Linear {
    Tensor W, b;
    Mat x_cache;

    void init(Eigen::Index in, Eigen::Index out, const std::string& name, Rng& rng) {
        double scale = 1.0 / std::sqrt(static_cast<double>(in));
        W.init_uniform(out, in, name + ".W", scale, rng, /*dec=*/true);
        b.init_zero(1, out, name + ".b", /*dec=*/false);
    }

    Mat forward(const Mat& x, bool cache = true) {
        if (cache) x_cache = x;
        Mat y = x * W.value.transpose();
        y.rowwise() += b.value.row(0);
        return y;
    }

    Mat backward(const Mat& dy) {
        W.grad.noalias() += dy.transpose() * x_cache;
        b.grad.row(0) += dy.colwise().sum();
        return dy * W.value;
    }

    void collect(std::vector<Tensor*>& out) {
        out.push_back(&W);
        out.push_back(&b);
    }
};

struct Relu {
    Mat mask;

    Mat forward(const Mat& x) {
        mask = (x.array() > 0.0).cast<double>();
        return x.cwiseProduct(mask);
    }

    Mat backward(const Mat& dy) const { return dy.cwiseProduct(mask); }
};

// Inverted dropout; identity when not training or p == 0.
struct Dropout {
    double p = 0.0;
    Mat mask;
    bool active = false;

    Mat forward(const Mat& x, const ForwardCtx& ctx) {
        active = ctx.train && p > 0.0;
        if (!active) return x;
        if (ctx.rng == nullptr) throw TrialError("dropout: training forward without rng");
        mask.resize(x.rows(), x.cols());
        const double keep = 1.0 - p;
        double* m = mask.data();
        for (Eigen::Index i = 0; i < mask.size(); ++i)
            m[i] = (ctx.rng->uniform() >= p) ? 1.0 / keep : 0.0;
        return x.cwiseProduct(mask);
    }

    Mat backward(const Mat& dy) const { return active ? dy.cwiseProduct(mask).eval() : dy; }
};

// Row-wise layer normalization with affine parameters.
struct LayerNorm {
    static constexpr double kEps = 1e-5;
    Tensor gamma, beta;
    Mat xhat;
    Eigen::VectorXd inv_sigma;

    void init(Eigen::Index dim, const std::string& name) {
        gamma.init_const(1, dim, name + ".gamma", 1.0);
        beta.init_const(1, dim, name + ".beta", 0.0);
    }

    Mat forward(const Mat& x) {
        const Eigen::Index n = x.rows(), d = x.cols();
        xhat.resize(n, d);
        inv_sigma.resize(n);
        Mat y(n, d);
        for (Eigen::Index i = 0; i < n; ++i) {
            double mu = x.row(i).mean();
            double var = (x.row(i).array() - mu).square().sum() / static_cast<double>(d);
            double is = 1.0 / std::sqrt(var + kEps);
            inv_sigma(i) = is;
            xhat.row(i) = ((x.row(i).array() - mu) * is).matrix();
            y.row(i) = xhat.row(i).cwiseProduct(gamma.value.row(0)) + beta.value.row(0);
        }
        return y;
    }

    Mat backward(const Mat& dy) {
        const Eigen::Index n = dy.rows(), d = dy.cols();
        gamma.grad.row(0) += (dy.cwiseProduct(xhat)).colwise().sum();
        beta.grad.row(0) += dy.colwise().sum();
        Mat dx(n, d);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::RowVectorXd g = dy.row(i).cwiseProduct(gamma.value.row(0));
            double mean_g = g.mean();
            double mean_gx = g.cwiseProduct(xhat.row(i)).mean();
            dx.row(i) =
                ((g.array() - mean_g - xhat.row(i).array() * mean_gx) * inv_sigma(i)).matrix();
        }
        return dx;
    }

    void collect(std::vector<Tensor*>& out) {
        out.push_back(&gamma);
        out.push_back(&beta);
    }
};

// Column-wise batch normalization. Training mode normalizes with batch
// statistics (biased variance) and updates running statistics with
// momentum 0.1; evaluation mode uses the running statistics.
struct BatchNorm {
    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;
    Tensor gamma, beta;
    Mat running_mean, running_var; // 1 x dim buffers
    Mat xhat;
    Eigen::RowVectorXd inv_sigma;

    void init(Eigen::Index dim, const std::string& name) {
        gamma.init_const(1, dim, name + ".gamma", 1.0);
        beta.init_const(1, dim, name + ".beta", 0.0);
        running_mean.setZero(1, dim);
        running_var.setOnes(1, dim);
    }

    Mat forward(const Mat& x, const ForwardCtx& ctx) {
        const Eigen::Index n = x.rows(), d = x.cols();
        Mat y(n, d);
        if (ctx.train) {
            Eigen::RowVectorXd mu = x.colwise().mean();
            Eigen::RowVectorXd var =
                ((x.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(n))
                    .matrix();
            inv_sigma = (var.array() + kEps).rsqrt().matrix();
            xhat = ((x.rowwise() - mu).array().rowwise() * inv_sigma.array()).matrix();
            if (ctx.update_stats) {
                double unbias = n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
                running_mean.row(0) = (1.0 - kMomentum) * running_mean.row(0) + kMomentum * mu;
                running_var.row(0) =
                    (1.0 - kMomentum) * running_var.row(0) + kMomentum * (unbias * var);
            }
            y = (xhat.array().rowwise() * gamma.value.row(0).array()).matrix();
            y.rowwise() += beta.value.row(0);
        } else {
            Eigen::RowVectorXd is = (running_var.row(0).array() + kEps).rsqrt().matrix();
            Mat xh = ((x.rowwise() - running_mean.row(0)).array().rowwise() * is.array()).matrix();
            y = (xh.array().rowwise() * gamma.value.row(0).array()).matrix();
            y.rowwise() += beta.value.row(0);
        }
        return y;
    }

    Mat backward(const Mat& dy) {
        const Eigen::Index n = dy.rows();
        gamma.grad.row(0) += (dy.cwiseProduct(xhat)).colwise().sum();
        beta.grad.row(0) += dy.colwise().sum();
        Eigen::RowVectorXd mean_dy = dy.colwise().mean();
        Eigen::RowVectorXd mean_dyx = dy.cwiseProduct(xhat).colwise().sum() / static_cast<double>(n);
        Mat dx = dy;
        dx.rowwise() -= mean_dy;
        dx.array() -= xhat.array().rowwise() * mean_dyx.array();
        dx.array().rowwise() *= (gamma.value.row(0).array() * inv_sigma.array());
        return dx;
    }

    void collect(std::vector<Tensor*>& out) {
        out.push_back(&gamma);
        out.push_back(&beta);
    }
};

// Mean weighted softmax cross-entropy over a batch. Returns the loss;
// writes dlogits for the backward pass. Weights default to 1 so the
// unweighted path is literally the weighted one.
inline double softmax_cross_entropy(const Mat& logits, const std::vector<int>& labels,
                                    const std::vector<double>* weights, Mat& dlogits) {
    const Eigen::Index n = logits.rows();
    double wsum = 0.0;
    double loss = 0.0;
    dlogits.resize(n, logits.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        double w = weights ? (*weights)[static_cast<size_t>(i)] : 1.0;
        wsum += w;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double w = weights ? (*weights)[static_cast<size_t>(i)] : 1.0;
        double zmax = logits.row(i).maxCoeff();
        double lse = zmax + std::log((logits.row(i).array() - zmax).exp().sum());
        int y = labels[static_cast<size_t>(i)];
        loss += w * (lse - logits(i, y));
        Eigen::RowVectorXd p = (logits.row(i).array() - lse).exp();
        dlogits.row(i) = (w / wsum) * p;
        dlogits(i, y) -= w / wsum;
    }
    return loss / wsum;
}

inline double softmax_cross_entropy(const Mat& logits, const std::vector<int>& labels,
                                    const std::vector<double>* weights) {
    Mat scratch;
    return softmax_cross_entropy(logits, labels, weights, scratch);
}

} // namespace fairhpo::nn
