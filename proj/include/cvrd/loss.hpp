#pragma once

#include "cvrd/tensor.hpp"

namespace cvrd::nn {

// Mean over all complex entries of ((d_re)^2 + (d_im)^2) / 2 where
// d = pred - target. The gradient w.r.t. pred is (d_re + i d_im) / count.
inline double split_mse_loss(const CTensor& pred, const CTensor& target, CTensor* grad = nullptr) {
    if (!pred.same_shape(target)) throw config_error("split_mse_loss: shape mismatch");
    const double count = static_cast<double>(pred.size());
    if (grad) *grad = CTensor(pred.re.l, pred.re.c, pred.re.h, pred.re.w);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.re.v.size(); ++i) {
        const double dr = pred.re.v[i] - target.re.v[i];
        const double di = pred.im.v[i] - target.im.v[i];
        acc += dr * dr + di * di;
        if (grad) {
            grad->re.v[i] = dr / count;
            grad->im.v[i] = di / count;
        }
    }
    return acc / (2.0 * count);
}

}  // namespace cvrd::nn
