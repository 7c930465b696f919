#pragma once

#include <cstring>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "fairhpo/dataset.hpp"
#include "fairhpo/nn/core.hpp"
#include "fairhpo/nn/ft_transformer.hpp"
#include "fairhpo/nn/mlp.hpp"
#include "fairhpo/nn/resnet.hpp"
#include "fairhpo/search_space.hpp"

namespace fairhpo::nn {

struct TrainSettings {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    int batch_size = 256;
    int max_epochs = 10; // full-training fidelity
    uint64_t seed = 0;
    // Per-train-row weights (reweighing); empty = unweighted.
    std::vector<double> sample_weights;
};

inline TrainSettings train_settings_from(const SearchSpace& space, const Configuration& cfg,
                                         uint64_t seed) {
    TrainSettings s;
    s.learning_rate = value_as_number(cfg.values[space.domain_index("learning_rate")]);
    s.weight_decay = value_as_number(cfg.values[space.domain_index("weight_decay")]);
    s.batch_size = static_cast<int>(value_as_number(cfg.values[space.domain_index("batch_size")]));
    s.seed = seed;
    return s;
}

enum class TrainStatus { Ok, Diverged };

namespace detail {
// Unnormalized weighted CE over a chunk; dlogits carries the global 1/wsum.
inline double ce_chunk(const Mat& logits, const int* labels, const double* weights,
                       double wsum, Mat& dlogits) {
    double loss = 0.0;
    dlogits.resize(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        double w = weights ? weights[i] : 1.0;
        double zmax = logits.row(i).maxCoeff();
        double lse = zmax + std::log((logits.row(i).array() - zmax).exp().sum());
        int y = labels[i];
        loss += w * (lse - logits(i, y));
        Eigen::RowVectorXd p = (logits.row(i).array() - lse).exp();
        dlogits.row(i) = (w / wsum) * p;
        dlogits(i, y) -= w / wsum;
    }
    return loss;
}
} // namespace detail

// One trainable model: family dispatch, training loop with the k-then-m ==
// k+m resume contract, analytic gradients and bit-exact checkpointing.
class Model {
public:
    Model(const SearchSpace& space, const Configuration& cfg, int input_width, uint64_t seed)
        : config_(cfg), input_width_(input_width), init_seed_(seed) {
        if (input_width < 1) throw ValidationError("model: input_width must be >= 1");
        space.validate(cfg);
        double dropout = value_as_number(cfg.values[space.domain_index("dropout")]);
        Rng rng(derive_seed(seed, "model-init"));
        switch (cfg.family) {
            case Family::MLP: {
                int depth = static_cast<int>(value_as_number(cfg.values[space.domain_index("depth")]));
                int base = static_cast<int>(value_as_number(cfg.values[space.domain_index("base_width")]));
                double fm = value_as_number(cfg.values[space.domain_index("first_layer_multiplier")]);
                double lm = value_as_number(cfg.values[space.domain_index("last_layer_multiplier")]);
                mlp_ = std::make_unique<Mlp>(input_width, mlp_widths(depth, base, fm, lm), dropout, rng);
                break;
            }
            case Family::ResNet: {
                int blocks = static_cast<int>(value_as_number(cfg.values[space.domain_index("n_blocks")]));
                int width = static_cast<int>(value_as_number(cfg.values[space.domain_index("main_width")]));
                double exp = value_as_number(cfg.values[space.domain_index("hidden_expansion")]);
                bool bn = std::get<std::string>(cfg.values[space.domain_index("normalization")]) ==
                          "batch-norm";
                int hidden = std::max<int>(4, static_cast<int>(std::llround(width * exp)));
                resnet_ = std::make_unique<ResNet>(input_width, blocks, width, hidden, bn, dropout, rng);
                break;
            }
            case Family::FTTransformer: {
                int blocks = static_cast<int>(value_as_number(cfg.values[space.domain_index("n_blocks")]));
                int heads = static_cast<int>(value_as_number(cfg.values[space.domain_index("n_heads")]));
                int dim = static_cast<int>(value_as_number(cfg.values[space.domain_index("token_dim")]));
                // Round the token dim up to a multiple of the head count;
                // cardinality still counts the full grid.
                if (dim % heads != 0) dim += heads - dim % heads;
                int fexp = static_cast<int>(value_as_number(cfg.values[space.domain_index("ffn_expansion")]));
                int flay = static_cast<int>(value_as_number(cfg.values[space.domain_index("ffn_hidden_layers")]));
                ftt_ = std::make_unique<FtTransformer>(input_width, blocks, heads, dim, fexp, flay,
                                                       dropout, rng);
                break;
            }
        }
        collect_params();
    }

    const Configuration& config() const { return config_; }
    int input_width() const { return input_width_; }
    uint64_t init_seed() const { return init_seed_; }
    int epoch_counter() const { return epoch_counter_; }

    std::vector<Tensor*>& parameters() { return params_; }

    int64_t parameter_count() const {
        int64_t n = 0;
        for (const Tensor* t : params_) n += t->size();
        return n;
    }

    Mat forward(const Mat& x, const ForwardCtx& ctx = {}) {
        if (x.cols() != input_width_) throw ValidationError("forward: batch width mismatch");
        if (!x.allFinite()) throw ValidationError("forward: non-finite input");
        if (mlp_) return mlp_->forward(x, ctx);
        if (resnet_) return resnet_->forward(x, ctx);
        return ftt_->forward(x, ctx);
    }

    // Evaluation-mode predictions, chunked to bound transient memory.
    std::vector<int> predict(const Mat& x) {
        std::vector<int> out;
        out.reserve(static_cast<size_t>(x.rows()));
        const Eigen::Index chunk = 256;
        for (Eigen::Index r = 0; r < x.rows(); r += chunk) {
            Eigen::Index n = std::min(chunk, x.rows() - r);
            Mat logits = forward(x.middleRows(r, n));
            for (Eigen::Index i = 0; i < n; ++i) out.push_back(logits(i, 1) > logits(i, 0) ? 1 : 0);
        }
        return out;
    }

    void zero_grads() {
        for (Tensor* t : params_) t->zero_grad();
    }

    // Forward + backward on one batch; returns the weighted mean CE loss.
    // Gradients accumulate into the parameter tensors.
    double compute_gradients(const Mat& x, const std::vector<int>& labels,
                             const std::vector<double>* weights, const ForwardCtx& ctx) {
        double wsum = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            wsum += weights ? (*weights)[static_cast<size_t>(i)] : 1.0;
        Mat logits = forward(x, ctx);
        Mat dlogits;
        double loss = detail::ce_chunk(logits, labels.data(),
                                       weights ? weights->data() : nullptr, wsum, dlogits);
        backward(dlogits);
        return loss / wsum;
    }

    double loss(const Mat& x, const std::vector<int>& labels,
                const std::vector<double>* weights = nullptr, const ForwardCtx& ctx = {}) {
        Mat logits = forward(x, ctx);
        return softmax_cross_entropy(logits, labels, weights);
    }

    // Advance `epochs` training epochs over the train split. Shuffling and
    // dropout are drawn from a per-(seed, epoch-index) stream, so k then m
    // epochs reproduce k+m epochs in one call bit-exactly.
    TrainStatus train_epochs(const Dataset& data, const TrainSettings& settings, int epochs) {
        if (epochs < 1) throw ValidationError("train_epochs: epochs must be >= 1");
        if (epoch_counter_ + epochs > settings.max_epochs)
            throw ValidationError("train_epochs: epoch budget exceeds max_epochs");
        Mat x = data.features_of(Split::Train);
        std::vector<int> y = data.labels_of(Split::Train);
        const std::vector<double>* weights = nullptr;
        if (!settings.sample_weights.empty()) {
            if (settings.sample_weights.size() != y.size())
                throw ValidationError("train_epochs: sample_weights length mismatch");
            weights = &settings.sample_weights;
        }
        const size_t n = y.size();
        const size_t bs = static_cast<size_t>(settings.batch_size);

        for (int e = 0; e < epochs; ++e) {
            Rng rng(derive_seed(settings.seed, "epoch", static_cast<uint64_t>(epoch_counter_)));
            std::vector<size_t> perm(n);
            for (size_t i = 0; i < n; ++i) perm[i] = i;
            rng.shuffle(perm);
            ForwardCtx ctx{/*train=*/true, &rng, /*update_stats=*/true};
            for (size_t start = 0; start < n; start += bs) {
                size_t m = std::min(bs, n - start);
                Mat xb(static_cast<Eigen::Index>(m), x.cols());
                std::vector<int> yb(m);
                std::vector<double> wb;
                if (weights) wb.resize(m);
                for (size_t i = 0; i < m; ++i) {
                    xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(perm[start + i]));
                    yb[i] = y[perm[start + i]];
                    if (weights) wb[i] = (*weights)[perm[start + i]];
                }
                zero_grads();
                double loss = batch_step(xb, yb, weights ? &wb : nullptr, ctx);
                if (!std::isfinite(loss)) return TrainStatus::Diverged;
                adam_.step(params_, settings.learning_rate, settings.weight_decay, ++adam_step_);
            }
            ++epoch_counter_;
        }
        for (const Tensor* t : params_)
            if (!t->value.allFinite()) return TrainStatus::Diverged;
        return TrainStatus::Ok;
    }

    // ---- checkpointing (bit-exact) ----

    std::string serialize() const {
        std::ostringstream out(std::ios::binary);
        out.write("FHM1", 4);
        write_i64(out, static_cast<int64_t>(config_.family));
        write_i64(out, input_width_);
        write_i64(out, epoch_counter_);
        write_i64(out, adam_step_);
        write_u64(out, init_seed_);
        write_i64(out, static_cast<int64_t>(config_.values.size()));
        for (const auto& v : config_.values) {
            if (std::holds_alternative<int64_t>(v)) {
                out.put(0);
                write_i64(out, std::get<int64_t>(v));
            } else if (std::holds_alternative<double>(v)) {
                out.put(1);
                write_double(out, std::get<double>(v));
            } else {
                out.put(2);
                write_str(out, std::get<std::string>(v));
            }
        }
        write_i64(out, static_cast<int64_t>(params_.size()));
        for (const Tensor* t : params_) {
            write_str(out, t->name);
            write_mat(out, t->value);
            bool moments = t->m.size() > 0;
            out.put(moments ? 1 : 0);
            if (moments) {
                write_mat(out, t->m);
                write_mat(out, t->v);
            }
        }
        auto bufs = buffers();
        write_i64(out, static_cast<int64_t>(bufs.size()));
        for (const Mat* b : bufs) write_mat(out, *b);
        return out.str();
    }

    static Model deserialize(const SearchSpace& space, const std::string& blob) {
        std::istringstream in(blob, std::ios::binary);
        char magic[4];
        in.read(magic, 4);
        if (!in || std::memcmp(magic, "FHM1", 4) != 0)
            throw TrialError("checkpoint: bad magic");
        Family fam = static_cast<Family>(read_i64(in));
        int64_t width = read_i64(in);
        int64_t epochs = read_i64(in);
        int64_t steps = read_i64(in);
        uint64_t seed = read_u64(in);
        Configuration cfg;
        cfg.family = fam;
        int64_t nvals = read_i64(in);
        for (int64_t i = 0; i < nvals; ++i) {
            int tag = in.get();
            if (tag == 0) cfg.values.emplace_back(read_i64(in));
            else if (tag == 1) cfg.values.emplace_back(read_double(in));
            else if (tag == 2) cfg.values.emplace_back(read_str(in));
            else throw TrialError("checkpoint: bad value tag");
        }
        if (fam != space.family) throw TrialError("checkpoint: family mismatch");
        Model m(space, cfg, static_cast<int>(width), seed);
        m.epoch_counter_ = static_cast<int>(epochs);
        m.adam_step_ = steps;
        int64_t ntensors = read_i64(in);
        if (ntensors != static_cast<int64_t>(m.params_.size()))
            throw TrialError("checkpoint: tensor count mismatch");
        for (Tensor* t : m.params_) {
            std::string name = read_str(in);
            if (name != t->name) throw TrialError("checkpoint: tensor order mismatch: " + name);
            read_mat(in, t->value, t->value.rows(), t->value.cols());
            int moments = in.get();
            if (moments == 1) {
                t->m.resize(t->value.rows(), t->value.cols());
                t->v.resize(t->value.rows(), t->value.cols());
                read_mat(in, t->m, t->m.rows(), t->m.cols());
                read_mat(in, t->v, t->v.rows(), t->v.cols());
            }
        }
        auto bufs = m.buffers();
        int64_t nbufs = read_i64(in);
        if (nbufs != static_cast<int64_t>(bufs.size()))
            throw TrialError("checkpoint: buffer count mismatch");
        for (Mat* b : bufs) read_mat(in, *b, b->rows(), b->cols());
        if (!in) throw TrialError("checkpoint: truncated blob");
        return m;
    }

private:
    void backward(const Mat& dlogits) {
        if (mlp_) mlp_->backward(dlogits);
        else if (resnet_) resnet_->backward(dlogits);
        else ftt_->backward(dlogits);
    }

    // FT-Transformer activations are heavy per row; process each batch in
    // fixed sub-chunks with immediate backward. Gradients are identical to
    // the full-batch pass (sum over rows); the chunk size is pinned so the
    // dropout stream stays deterministic.
    double batch_step(const Mat& xb, const std::vector<int>& yb, const std::vector<double>* wb,
                      const ForwardCtx& ctx) {
        if (!ftt_) return compute_gradients(xb, yb, wb, ctx);
        const Eigen::Index chunk = 32;
        double wsum = 0.0;
        for (Eigen::Index i = 0; i < xb.rows(); ++i)
            wsum += wb ? (*wb)[static_cast<size_t>(i)] : 1.0;
        double total = 0.0;
        Mat dlogits;
        for (Eigen::Index r = 0; r < xb.rows(); r += chunk) {
            Eigen::Index m = std::min(chunk, xb.rows() - r);
            Mat logits = ftt_->forward(xb.middleRows(r, m), ctx);
            total += detail::ce_chunk(logits, yb.data() + r,
                                      wb ? wb->data() + r : nullptr, wsum, dlogits);
            ftt_->backward(dlogits);
        }
        return total / wsum;
    }

    void collect_params() {
        params_.clear();
        if (mlp_) mlp_->collect(params_);
        else if (resnet_) resnet_->collect(params_);
        else ftt_->collect(params_);
    }

    std::vector<Mat*> buffers() const {
        if (resnet_) return resnet_->buffers();
        return {};
    }

    static void write_i64(std::ostream& o, int64_t v) { o.write(reinterpret_cast<const char*>(&v), 8); }
    static void write_u64(std::ostream& o, uint64_t v) { o.write(reinterpret_cast<const char*>(&v), 8); }
    static void write_double(std::ostream& o, double v) { o.write(reinterpret_cast<const char*>(&v), 8); }
    static void write_str(std::ostream& o, const std::string& s) {
        write_i64(o, static_cast<int64_t>(s.size()));
        o.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    static void write_mat(std::ostream& o, const Mat& m) {
        write_i64(o, m.rows());
        write_i64(o, m.cols());
        o.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double)) * m.size());
    }
    static int64_t read_i64(std::istream& i) {
        int64_t v = 0;
        i.read(reinterpret_cast<char*>(&v), 8);
        return v;
    }
    static uint64_t read_u64(std::istream& i) {
        uint64_t v = 0;
        i.read(reinterpret_cast<char*>(&v), 8);
        return v;
    }
    static double read_double(std::istream& i) {
        double v = 0;
        i.read(reinterpret_cast<char*>(&v), 8);
        return v;
    }
    static std::string read_str(std::istream& i) {
        int64_t n = read_i64(i);
        if (n < 0 || n > (1 << 20)) throw TrialError("checkpoint: bad string length");
        std::string s(static_cast<size_t>(n), '\0');
        i.read(s.data(), n);
        return s;
    }
    static void read_mat(std::istream& i, Mat& m, Eigen::Index rows, Eigen::Index cols) {
        int64_t r = read_i64(i), c = read_i64(i);
        if (r != rows || c != cols) throw TrialError("checkpoint: tensor shape mismatch");
        i.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(sizeof(double)) * m.size());
    }

    Configuration config_;
    int input_width_;
    uint64_t init_seed_;
    int epoch_counter_ = 0;
    int64_t adam_step_ = 0;
    Adam adam_;
    std::vector<Tensor*> params_;
    std::unique_ptr<Mlp> mlp_;
    std::unique_ptr<ResNet> resnet_;
    std::unique_ptr<FtTransformer> ftt_;
};

} // namespace fairhpo::nn
