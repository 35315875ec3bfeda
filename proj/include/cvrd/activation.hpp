#pragma once

#include "cvrd/tensor.hpp"

namespace cvrd::nn {

inline Tensor4 relu(const Tensor4& in) {
    Tensor4 out = in;
    for (double& x : out.v) x = x > 0.0 ? x : 0.0;
    return out;
}

// Backward masks by the saved pre-activation sign.
inline Tensor4 relu_backward(const Tensor4& grad_out, const Tensor4& saved_in) {
    Tensor4 grad_in = grad_out;
    for (std::size_t i = 0; i < grad_in.v.size(); ++i)
        if (saved_in.v[i] <= 0.0) grad_in.v[i] = 0.0;
    return grad_in;
}

// CReLU(z) = ReLU(Re z) + i ReLU(Im z); each component masked independently.
inline CTensor crelu(const CTensor& in) {
    CTensor out;
    out.re = relu(in.re);
    out.im = relu(in.im);
    return out;
}

inline CTensor crelu_backward(const CTensor& grad_out, const CTensor& saved_in) {
    CTensor grad_in;
    grad_in.re = relu_backward(grad_out.re, saved_in.re);
    grad_in.im = relu_backward(grad_out.im, saved_in.im);
    return grad_in;
}

}  // namespace cvrd::nn
