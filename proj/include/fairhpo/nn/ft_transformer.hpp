#pragma once

#include <memory>
#include <vector>

#include "fairhpo/nn/core.hpp"

namespace fairhpo::nn {

// Multi-head self-attention over the stacked token matrix ((batch *
// n_tokens) x dim). Softmax mixing is per sample; everything else operates
// on the stacked rows.
class SelfAttention {
public:
    SelfAttention(int dim, int heads, double dropout, const std::string& name, Rng& rng)
        : dim_(dim), heads_(heads), head_dim_(dim / heads) {
        wq_.init(dim, dim, name + ".wq", rng);
        wk_.init(dim, dim, name + ".wk", rng);
        wv_.init(dim, dim, name + ".wv", rng);
        wo_.init(dim, dim, name + ".wo", rng);
        drop_.p = dropout;
    }

    Mat forward(const Mat& a, Eigen::Index batch, Eigen::Index n_tokens, const ForwardCtx& ctx) {
        q_ = wq_.forward(a);
        k_ = wk_.forward(a);
        v_ = wv_.forward(a);
        const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
        probs_.assign(static_cast<size_t>(batch * heads_), Mat());
        Mat o(a.rows(), dim_);
        for (Eigen::Index b = 0; b < batch; ++b) {
            for (int h = 0; h < heads_; ++h) {
                auto qb = q_.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_);
                auto kb = k_.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_);
                auto vb = v_.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_);
                Mat s = qb * kb.transpose() * scale;
                Mat& p = probs_[static_cast<size_t>(b * heads_ + h)];
                p.resize(n_tokens, n_tokens);
                for (Eigen::Index i = 0; i < n_tokens; ++i) {
                    double m = s.row(i).maxCoeff();
                    p.row(i) = (s.row(i).array() - m).exp();
                    p.row(i) /= p.row(i).sum();
                }
                o.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_).noalias() = p * vb;
            }
        }
        o_cache_ = o;
        Mat y = wo_.forward(o);
        return drop_.forward(y, ctx);
    }

    Mat backward(const Mat& dy, Eigen::Index batch, Eigen::Index n_tokens) {
        Mat d = drop_.backward(dy);
        Mat dO = wo_.backward(d);
        const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
        Mat dQ(q_.rows(), dim_), dK(q_.rows(), dim_), dV(q_.rows(), dim_);
        for (Eigen::Index b = 0; b < batch; ++b) {
            for (int h = 0; h < heads_; ++h) {
                const Mat& p = probs_[static_cast<size_t>(b * heads_ + h)];
                auto qb = q_.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_);
                auto kb = k_.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_);
                auto vb = v_.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_);
                auto dob = dO.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_);
                Mat dP = dob * vb.transpose();
                Mat dS(n_tokens, n_tokens);
                for (Eigen::Index i = 0; i < n_tokens; ++i) {
                    double dot = dP.row(i).cwiseProduct(p.row(i)).sum();
                    dS.row(i) = (p.row(i).array() * (dP.row(i).array() - dot)).matrix();
                }
                dS *= scale;
                dQ.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_).noalias() = dS * kb;
                dK.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_).noalias() =
                    dS.transpose() * qb;
                dV.block(b * n_tokens, h * head_dim_, n_tokens, head_dim_).noalias() =
                    p.transpose() * dob;
            }
        }
        return wq_.backward(dQ) + wk_.backward(dK) + wv_.backward(dV);
    }

    void collect(std::vector<Tensor*>& out) {
        wq_.collect(out);
        wk_.collect(out);
        wv_.collect(out);
        wo_.collect(out);
    }

private:
    int dim_, heads_, head_dim_;
    Linear wq_, wk_, wv_, wo_;
    Dropout drop_;
    Mat q_, k_, v_, o_cache_;
    std::vector<Mat> probs_;
};

class FtBlock {
public:
    FtBlock(int dim, int heads, int ffn_hidden, int ffn_layers, double dropout, int index,
            Rng& rng)
        : attn_(dim, heads, dropout, "block" + std::to_string(index) + ".attn", rng) {
        std::string name = "block" + std::to_string(index);
        ln1_.init(dim, name + ".ln1");
        ln2_.init(dim, name + ".ln2");
        ffn_in_.init(dim, ffn_hidden, name + ".ffn0", rng);
        for (int l = 1; l < ffn_layers; ++l) {
            ffn_mid_.emplace_back();
            ffn_mid_.back().init(ffn_hidden, ffn_hidden, name + ".ffn" + std::to_string(l), rng);
        }
        ffn_out_.init(ffn_hidden, dim, name + ".ffn_out", rng);
        relu_.resize(static_cast<size_t>(ffn_layers));
        drop_.resize(static_cast<size_t>(ffn_layers));
        for (auto& d : drop_) d.p = dropout;
    }

    Mat forward(const Mat& x, Eigen::Index batch, Eigen::Index n_tokens, const ForwardCtx& ctx) {
        Mat h = x + attn_.forward(ln1_.forward(x), batch, n_tokens, ctx);
        Mat f = ln2_.forward(h);
        f = drop_[0].forward(relu_[0].forward(ffn_in_.forward(f)), ctx);
        for (size_t l = 0; l < ffn_mid_.size(); ++l)
            f = drop_[l + 1].forward(relu_[l + 1].forward(ffn_mid_[l].forward(f)), ctx);
        return h + ffn_out_.forward(f);
    }

    Mat backward(const Mat& dy, Eigen::Index batch, Eigen::Index n_tokens) {
        Mat d = ffn_out_.backward(dy);
        for (size_t l = ffn_mid_.size(); l-- > 0;)
            d = ffn_mid_[l].backward(relu_[l + 1].backward(drop_[l + 1].backward(d)));
        d = ffn_in_.backward(relu_[0].backward(drop_[0].backward(d)));
        Mat dh = dy + ln2_.backward(d);
        Mat da = attn_.backward(dh, batch, n_tokens);
        return dh + ln1_.backward(da);
    }

    void collect(std::vector<Tensor*>& out) {
        ln1_.collect(out);
        attn_.collect(out);
        ln2_.collect(out);
        ffn_in_.collect(out);
        for (auto& l : ffn_mid_) l.collect(out);
        ffn_out_.collect(out);
    }

private:
    LayerNorm ln1_, ln2_;
    SelfAttention attn_;
    Linear ffn_in_;
    std::vector<Linear> ffn_mid_;
    Linear ffn_out_;
    std::vector<Relu> relu_;
    std::vector<Dropout> drop_;
};

// Per-column tokenizer -> pre-norm transformer blocks -> CLS head. Every
// encoded input column gets one token: token_j = x_j * w_j + b_j; a learned
// CLS token is prepended and read out through the final layer norm.
class FtTransformer {
public:
    FtTransformer(int input_width, int n_blocks, int heads, int token_dim, int ffn_expansion,
                  int ffn_layers, double dropout, Rng& rng)
        : m_(input_width), dim_(token_dim) {
        double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
        // Token embeddings are exempt from weight decay, like biases.
        wtok_.init_uniform(m_, dim_, "tokenizer.W", scale, rng, /*dec=*/false);
        btok_.init_uniform(m_, dim_, "tokenizer.b", scale, rng, /*dec=*/false);
        cls_.init_uniform(1, dim_, "tokenizer.cls", scale, rng, /*dec=*/false);
        for (int i = 0; i < n_blocks; ++i)
            blocks_.push_back(std::make_unique<FtBlock>(dim_, heads, token_dim * ffn_expansion,
                                                        ffn_layers, dropout, i, rng));
        final_ln_.init(dim_, "final_ln");
        head_.init(dim_, 2, "head", rng);
    }

    Mat forward(const Mat& x, const ForwardCtx& ctx) {
        const Eigen::Index batch = x.rows();
        const Eigen::Index nt = m_ + 1;
        x_cache_ = x;
        Mat t(batch * nt, dim_);
        for (Eigen::Index b = 0; b < batch; ++b) {
            t.row(b * nt) = cls_.value.row(0);
            for (Eigen::Index j = 0; j < m_; ++j)
                t.row(b * nt + 1 + j) = x(b, j) * wtok_.value.row(j) + btok_.value.row(j);
        }
        for (auto& blk : blocks_) t = blk->forward(t, batch, nt, ctx);
        t = final_ln_.forward(t);
        Mat cls_rows(batch, dim_);
        for (Eigen::Index b = 0; b < batch; ++b) cls_rows.row(b) = t.row(b * nt);
        return head_.forward(cls_rows);
    }

    Mat backward(const Mat& dlogits) {
        const Eigen::Index batch = dlogits.rows();
        const Eigen::Index nt = m_ + 1;
        Mat dcls = head_.backward(dlogits);
        Mat dt = Mat::Zero(batch * nt, dim_);
        for (Eigen::Index b = 0; b < batch; ++b) dt.row(b * nt) = dcls.row(b);
        dt = final_ln_.backward(dt);
        for (size_t i = blocks_.size(); i-- > 0;) dt = blocks_[i]->backward(dt, batch, nt);
        Mat dx(batch, m_);
        for (Eigen::Index b = 0; b < batch; ++b) {
            cls_.grad.row(0) += dt.row(b * nt);
            for (Eigen::Index j = 0; j < m_; ++j) {
                const auto drow = dt.row(b * nt + 1 + j);
                wtok_.grad.row(j) += x_cache_(b, j) * drow;
                btok_.grad.row(j) += drow;
                dx(b, j) = drow.cwiseProduct(wtok_.value.row(j)).sum();
            }
        }
        return dx;
    }

    void collect(std::vector<Tensor*>& out) {
        out.push_back(&wtok_);
        out.push_back(&btok_);
        out.push_back(&cls_);
        for (auto& b : blocks_) b->collect(out);
        final_ln_.collect(out);
        head_.collect(out);
    }

    std::vector<Mat*> buffers() { return {}; }

private:
    Eigen::Index m_;
    int dim_;
    Tensor wtok_, btok_, cls_;
    std::vector<std::unique_ptr<FtBlock>> blocks_;
    LayerNorm final_ln_;
    Linear head_;
    Mat x_cache_;
};

} // namespace fairhpo::nn
