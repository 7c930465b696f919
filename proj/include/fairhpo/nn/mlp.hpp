#pragma once

#include <vector>

#include "fairhpo/nn/core.hpp"

namespace fairhpo::nn {

// Hidden-layer widths for the MLP family: every layer starts at base_width,
// the first and last hidden layers are scaled by their multipliers (a
// single hidden layer receives both), rounded and floored at 4.
inline std::vector<int> mlp_widths(int depth, int base_width, double first_mult,
                                   double last_mult) {
    std::vector<double> mult(static_cast<size_t>(depth), 1.0);
    mult.front() *= first_mult;
    mult.back() *= last_mult;
    std::vector<int> w(static_cast<size_t>(depth));
    for (size_t i = 0; i < w.size(); ++i)
        w[i] = std::max<int>(4, static_cast<int>(std::llround(base_width * mult[i])));
    return w;
}

// [linear -> ReLU -> dropout] x depth -> linear(2)
class Mlp {
public:
    Mlp(int input_width, const std::vector<int>& widths, double dropout, Rng& rng) {
        int in = input_width;
        hidden_.resize(widths.size());
        relu_.resize(widths.size());
        drop_.resize(widths.size());
        for (size_t i = 0; i < widths.size(); ++i) {
            hidden_[i].init(in, widths[i], "hidden" + std::to_string(i), rng);
            drop_[i].p = dropout;
            in = widths[i];
        }
        head_.init(in, 2, "head", rng);
    }

    Mat forward(const Mat& x, const ForwardCtx& ctx) {
        Mat h = x;
        for (size_t i = 0; i < hidden_.size(); ++i) {
            h = hidden_[i].forward(h);
            h = relu_[i].forward(h);
            h = drop_[i].forward(h, ctx);
        }
        return head_.forward(h);
    }

    Mat backward(const Mat& dlogits) {
        Mat d = head_.backward(dlogits);
        for (size_t i = hidden_.size(); i-- > 0;) {
            d = drop_[i].backward(d);
            d = relu_[i].backward(d);
            d = hidden_[i].backward(d);
        }
        return d;
    }

    void collect(std::vector<Tensor*>& out) {
        for (auto& l : hidden_) l.collect(out);
        head_.collect(out);
    }

    std::vector<Mat*> buffers() { return {}; }

private:
    std::vector<Linear> hidden_;
    std::vector<Relu> relu_;
    std::vector<Dropout> drop_;
    Linear head_;
};

} // namespace fairhpo::nn
