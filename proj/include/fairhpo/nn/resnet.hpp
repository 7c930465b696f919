#pragma once

#include <memory>
#include <vector>

#include "fairhpo/nn/core.hpp"

namespace fairhpo::nn {

// block(x) = x + linear2(dropout(relu(norm(linear1(x)))))
// Norm is batch-norm or layer-norm over the hidden width.
class ResNetBlock {
public:
    ResNetBlock(int width, int hidden, bool batch_norm, double dropout, int index, Rng& rng)
        : batch_norm_(batch_norm) {
        std::string name = "block" + std::to_string(index);
        lin1_.init(width, hidden, name + ".lin1", rng);
        if (batch_norm_) bn_.init(hidden, name + ".bn");
        else ln_.init(hidden, name + ".ln");
        drop_.p = dropout;
        lin2_.init(hidden, width, name + ".lin2", rng);
    }

    Mat forward(const Mat& x, const ForwardCtx& ctx) {
        Mat h = lin1_.forward(x);
        h = batch_norm_ ? bn_.forward(h, ctx) : ln_.forward(h);
        h = relu_.forward(h);
        h = drop_.forward(h, ctx);
        h = lin2_.forward(h);
        return x + h;
    }

    Mat backward(const Mat& dy) {
        Mat d = lin2_.backward(dy);
        d = drop_.backward(d);
        d = relu_.backward(d);
        d = batch_norm_ ? bn_.backward(d) : ln_.backward(d);
        d = lin1_.backward(d);
        return d + dy; // identity skip
    }

    void collect(std::vector<Tensor*>& out) {
        lin1_.collect(out);
        if (batch_norm_) bn_.collect(out);
        else ln_.collect(out);
        lin2_.collect(out);
    }

    std::vector<Mat*> buffers() {
        if (batch_norm_) return {&bn_.running_mean, &bn_.running_var};
        return {};
    }

private:
    bool batch_norm_;
    Linear lin1_, lin2_;
    BatchNorm bn_;
    LayerNorm ln_;
    Relu relu_;
    Dropout drop_;
};

class ResNet {
public:
    ResNet(int input_width, int n_blocks, int main_width, int hidden, bool batch_norm,
           double dropout, Rng& rng) {
        input_.init(input_width, main_width, "input", rng);
        for (int i = 0; i < n_blocks; ++i)
            blocks_.push_back(std::make_unique<ResNetBlock>(main_width, hidden, batch_norm,
                                                            dropout, i, rng));
        head_.init(main_width, 2, "head", rng);
    }

    Mat forward(const Mat& x, const ForwardCtx& ctx) {
        Mat h = input_.forward(x);
        for (auto& b : blocks_) h = b->forward(h, ctx);
        return head_.forward(h);
    }

    Mat backward(const Mat& dlogits) {
        Mat d = head_.backward(dlogits);
        for (size_t i = blocks_.size(); i-- > 0;) d = blocks_[i]->backward(d);
        return input_.backward(d);
    }

    void collect(std::vector<Tensor*>& out) {
        input_.collect(out);
        for (auto& b : blocks_) b->collect(out);
        head_.collect(out);
    }

    std::vector<Mat*> buffers() {
        std::vector<Mat*> out;
        for (auto& b : blocks_)
            for (Mat* m : b->buffers()) out.push_back(m);
        return out;
    }

private:
    Linear input_;
    std::vector<std::unique_ptr<ResNetBlock>> blocks_;
    Linear head_;
};

} // namespace fairhpo::nn
