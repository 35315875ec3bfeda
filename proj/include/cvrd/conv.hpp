#pragma once

#include <cstddef>
#include <vector>

#include "cvrd/parallel.hpp"
#include "cvrd/tensor.hpp"

namespace cvrd::nn {

// Weight block dimensions for one conv layer. Weights are stored flat as
// w[((co*cin + ci)*k + ky)*k + kx].
struct ConvDims {
    std::size_t cout = 0, cin = 0, k = 3;

    std::size_t weight_count() const { return cout * cin * k * k; }
    void validate() const {
        if (k % 2 == 0) throw config_error("ConvDims: kernel size must be odd");
        if (cout == 0 || cin == 0) throw config_error("ConvDims: zero channel count");
    }
};

namespace detail {

// out[l,co] (+)= sign * sum_ci w[co,ci] (*) in[l,ci], stride 1, same padding.
inline void conv_plane_accum(const double* in, std::size_t h, std::size_t w, double wv,
                             long dy, long dx, double* out) {
    const long H = static_cast<long>(h), W = static_cast<long>(w);
    const long y0 = std::max(0L, -dy), y1 = std::min(H, H - dy);
    const long x0 = std::max(0L, -dx), x1 = std::min(W, W - dx);
    for (long y = y0; y < y1; ++y) {
        const double* src = in + (y + dy) * W + dx;
        double* dst = out + y * W;
        for (long x = x0; x < x1; ++x) dst[x] += wv * src[x];
    }
}

}  // namespace detail

// Real 2-D convolution, accumulating into `out` with the given sign. The
// caller guarantees out has shape (L, dims.cout, H, W). Parallel over
// (batch, output channel); deterministic for any worker count.
inline void conv2d_accum(const Tensor4& in, const double* weights, const ConvDims& dims,
                         double sign, Tensor4& out) {
    const long p = static_cast<long>(dims.k / 2);
    parallel_for(in.l * dims.cout, [&](std::size_t job) {
        const std::size_t li = job / dims.cout;
        const std::size_t co = job % dims.cout;
        double* dst = out.plane_ptr(li, co);
        for (std::size_t ci = 0; ci < dims.cin; ++ci) {
            const double* src = in.plane_ptr(li, ci);
            const double* wk = weights + (co * dims.cin + ci) * dims.k * dims.k;
            for (std::size_t ky = 0; ky < dims.k; ++ky)
                for (std::size_t kx = 0; kx < dims.k; ++kx) {
                    const double wv = sign * wk[ky * dims.k + kx];
                    if (wv == 0.0) continue;
                    detail::conv_plane_accum(src, in.h, in.w, wv, static_cast<long>(ky) - p,
                                             static_cast<long>(kx) - p, dst);
                }
        }
    });
}

// Adjoint of conv2d_accum w.r.t. the input.
inline void conv2d_backward_data_accum(const Tensor4& grad_out, const double* weights,
                                       const ConvDims& dims, double sign, Tensor4& grad_in) {
    const long p = static_cast<long>(dims.k / 2);
    parallel_for(grad_in.l * dims.cin, [&](std::size_t job) {
        const std::size_t li = job / dims.cin;
        const std::size_t ci = job % dims.cin;
        double* dst = grad_in.plane_ptr(li, ci);
        for (std::size_t co = 0; co < dims.cout; ++co) {
            const double* src = grad_out.plane_ptr(li, co);
            const double* wk = weights + (co * dims.cin + ci) * dims.k * dims.k;
            for (std::size_t ky = 0; ky < dims.k; ++ky)
                for (std::size_t kx = 0; kx < dims.k; ++kx) {
                    const double wv = sign * wk[ky * dims.k + kx];
                    if (wv == 0.0) continue;
                    // forward read offset (dy,dx) becomes a write offset here,
                    // i.e. correlate with the flipped kernel
                    detail::conv_plane_accum(src, grad_out.h, grad_out.w, wv,
                                             p - static_cast<long>(ky), p - static_cast<long>(kx),
                                             dst);
                }
        }
    });
}

// Adjoint w.r.t. the weights. Accumulates sign * dL/dw into grad_weights.
inline void conv2d_backward_weights_accum(const Tensor4& grad_out, const Tensor4& in,
                                          const ConvDims& dims, double sign,
                                          double* grad_weights) {
    const long p = static_cast<long>(dims.k / 2);
    const long H = static_cast<long>(in.h), W = static_cast<long>(in.w);
    parallel_for(dims.cout * dims.cin, [&](std::size_t job) {
        const std::size_t co = job / dims.cin;
        const std::size_t ci = job % dims.cin;
        double* gw = grad_weights + (co * dims.cin + ci) * dims.k * dims.k;
        for (std::size_t ky = 0; ky < dims.k; ++ky)
            for (std::size_t kx = 0; kx < dims.k; ++kx) {
                const long dy = static_cast<long>(ky) - p, dx = static_cast<long>(kx) - p;
                const long y0 = std::max(0L, -dy), y1 = std::min(H, H - dy);
                const long x0 = std::max(0L, -dx), x1 = std::min(W, W - dx);
                double acc = 0.0;
                for (std::size_t li = 0; li < in.l; ++li) {
                    const double* g = grad_out.plane_ptr(li, co);
                    const double* s = in.plane_ptr(li, ci);
                    for (long y = y0; y < y1; ++y) {
                        const double* gr = g + y * W;
                        const double* sr = s + (y + dy) * W + dx;
                        double row = 0.0;
                        for (long x = x0; x < x1; ++x) row += gr[x] * sr[x];
                        acc += row;
                    }
                }
                gw[ky * dims.k + kx] += sign * acc;
            }
    });
}

inline void add_channel_bias(Tensor4& t, const double* bias) {
    for (std::size_t li = 0; li < t.l; ++li)
        for (std::size_t ci = 0; ci < t.c; ++ci) {
            double* p = t.plane_ptr(li, ci);
            const double b = bias[ci];
            for (std::size_t k = 0; k < t.plane(); ++k) p[k] += b;
        }
}

inline void channel_bias_grad_accum(const Tensor4& grad_out, double* grad_bias) {
    for (std::size_t li = 0; li < grad_out.l; ++li)
        for (std::size_t ci = 0; ci < grad_out.c; ++ci) {
            const double* p = grad_out.plane_ptr(li, ci);
            double acc = 0.0;
            for (std::size_t k = 0; k < grad_out.plane(); ++k) acc += p[k];
            grad_bias[ci] += acc;
        }
}

// --- real conv layer -------------------------------------------------------

inline Tensor4 conv2d(const Tensor4& in, const double* weights, const double* bias,
                      const ConvDims& dims) {
    dims.validate();
    if (in.c != dims.cin) throw config_error("conv2d: input channel mismatch");
    Tensor4 out(in.l, dims.cout, in.h, in.w);
    conv2d_accum(in, weights, dims, 1.0, out);
    if (bias) add_channel_bias(out, bias);
    return out;
}

inline void conv2d_backward(const Tensor4& grad_out, const Tensor4& saved_in,
                            const double* weights, const ConvDims& dims, Tensor4& grad_in,
                            double* grad_weights, double* grad_bias) {
    grad_in = Tensor4(saved_in.l, saved_in.c, saved_in.h, saved_in.w);
    conv2d_backward_data_accum(grad_out, weights, dims, 1.0, grad_in);
    conv2d_backward_weights_accum(grad_out, saved_in, dims, 1.0, grad_weights);
    if (grad_bias) channel_bias_grad_accum(grad_out, grad_bias);
}

// --- complex conv layer ----------------------------------------------------

// W = A + iB applied to h = x + iy:
//   re(out) = A*x - B*y + bias_re
//   im(out) = B*x + A*y + bias_im
inline CTensor cconv2d(const CTensor& in, const double* A, const double* B,
                       const double* bias_re, const double* bias_im, const ConvDims& dims) {
    dims.validate();
    if (in.re.c != dims.cin) throw config_error("cconv2d: input channel mismatch");
    CTensor out(in.re.l, dims.cout, in.re.h, in.re.w);
    conv2d_accum(in.re, A, dims, 1.0, out.re);
    conv2d_accum(in.im, B, dims, -1.0, out.re);
    conv2d_accum(in.re, B, dims, 1.0, out.im);
    conv2d_accum(in.im, A, dims, 1.0, out.im);
    if (bias_re) add_channel_bias(out.re, bias_re);
    if (bias_im) add_channel_bias(out.im, bias_im);
    return out;
}

// Reverse-mode of cconv2d, treating A, B and the bias components as
// independent real parameters.
inline void cconv2d_backward(const CTensor& grad_out, const CTensor& saved_in, const double* A,
                             const double* B, const ConvDims& dims, CTensor& grad_in,
                             double* grad_A, double* grad_B, double* grad_bias_re,
                             double* grad_bias_im) {
    grad_in = CTensor(saved_in.re.l, saved_in.re.c, saved_in.re.h, saved_in.re.w);
    // dL/dx = A^T gr + B^T gi ; dL/dy = -B^T gr + A^T gi
    conv2d_backward_data_accum(grad_out.re, A, dims, 1.0, grad_in.re);
    conv2d_backward_data_accum(grad_out.im, B, dims, 1.0, grad_in.re);
    conv2d_backward_data_accum(grad_out.re, B, dims, -1.0, grad_in.im);
    conv2d_backward_data_accum(grad_out.im, A, dims, 1.0, grad_in.im);
    // dL/dA = gr (*) x + gi (*) y ; dL/dB = -gr (*) y + gi (*) x
    conv2d_backward_weights_accum(grad_out.re, saved_in.re, dims, 1.0, grad_A);
    conv2d_backward_weights_accum(grad_out.im, saved_in.im, dims, 1.0, grad_A);
    conv2d_backward_weights_accum(grad_out.re, saved_in.im, dims, -1.0, grad_B);
    conv2d_backward_weights_accum(grad_out.im, saved_in.re, dims, 1.0, grad_B);
    if (grad_bias_re) channel_bias_grad_accum(grad_out.re, grad_bias_re);
    if (grad_bias_im) channel_bias_grad_accum(grad_out.im, grad_bias_im);
}

// Owning kernel for standalone use; the model keeps weights in its flat
// parameter store instead.
struct CConvKernel {
    ConvDims dims;
    std::vector<double> A, B;           // real / imaginary kernel parts
    std::vector<double> bias_re, bias_im;

    CConvKernel() = default;
    CConvKernel(std::size_t cout, std::size_t cin, std::size_t k)
        : dims{cout, cin, k},
          A(dims.weight_count(), 0.0),
          B(dims.weight_count(), 0.0),
          bias_re(cout, 0.0),
          bias_im(cout, 0.0) {
        dims.validate();
    }
};

inline CTensor cconv2d(const CTensor& in, const CConvKernel& w) {
    return cconv2d(in, w.A.data(), w.B.data(), w.bias_re.data(), w.bias_im.data(), w.dims);
}

}  // namespace cvrd::nn
