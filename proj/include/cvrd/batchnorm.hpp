#pragma once

#include <cmath>
#include <vector>

#include "cvrd/parallel.hpp"
#include "cvrd/tensor.hpp"

namespace cvrd::nn {

// --- 2x2 symmetric inverse square root -------------------------------------

// Inverse square root of the SPD matrix [[a, b], [b, d]] in closed form:
//   s = sqrt(det), t = sqrt(trace + 2s), inv_sqrt = (1/(s t)) [[d+s, -b], [-b, a+s]]
struct InvSqrt2x2 {
    double a = 0, b = 0, d = 0;  // input matrix
    double s = 0, t = 0, u = 0;  // intermediates (u = 1/(s t))
    double w11 = 0, w12 = 0, w22 = 0;
};

inline InvSqrt2x2 inv_sqrt_2x2(double a, double b, double d) {
    InvSqrt2x2 r;
    r.a = a;
    r.b = b;
    r.d = d;
    const double det = a * d - b * b;
    if (!(det > 0.0) || !std::isfinite(det))
        throw numeric_error("inv_sqrt_2x2: matrix not positive definite");
    r.s = std::sqrt(det);
    r.t = std::sqrt(a + d + 2.0 * r.s);
    r.u = 1.0 / (r.s * r.t);
    r.w11 = r.u * (d + r.s);
    r.w12 = -r.u * b;
    r.w22 = r.u * (a + r.s);
    return r;
}

// Adjoint of inv_sqrt_2x2: given dL/dW accumulated as (m11, m12, m22) where
// m12 already sums both off-diagonal sensitivities, produce dL/d(a, b, d).
struct InvSqrt2x2Grad {
    double da = 0, db = 0, dd = 0;
};

inline InvSqrt2x2Grad inv_sqrt_2x2_backward(const InvSqrt2x2& r, double m11, double m12,
                                            double m22) {
    InvSqrt2x2Grad g;
    const double inv2s = 1.0 / (2.0 * r.s);
    const double inv2t = 1.0 / (2.0 * r.t);
    // theta ranges over {a, b, d}
    const double ds[3] = {r.d * inv2s, -r.b / r.s, r.a * inv2s};
    const double dt[3] = {(1.0 + 2.0 * ds[0]) * inv2t, (2.0 * ds[1]) * inv2t,
                          (1.0 + 2.0 * ds[2]) * inv2t};
    double out[3];
    for (int i = 0; i < 3; ++i) {
        const double du = -r.u * r.u * (ds[i] * r.t + r.s * dt[i]);
        const double dw11 = du * (r.d + r.s) + r.u * (ds[i] + (i == 2 ? 1.0 : 0.0));
        const double dw12 = -(du * r.b + (i == 1 ? r.u : 0.0));
        const double dw22 = du * (r.a + r.s) + r.u * (ds[i] + (i == 0 ? 1.0 : 0.0));
        out[i] = m11 * dw11 + m12 * dw12 + m22 * dw22;
    }
    g.da = out[0];
    g.db = out[1];
    g.dd = out[2];
    return g;
}

// --- real batch normalization ----------------------------------------------

struct BatchNormContext {
    Tensor4 xhat;                 // normalized pre-affine activations
    std::vector<double> inv_std;  // per channel
};

// Standard per-channel BN over batch and spatial dims. Training mode uses
// batch statistics (biased variance) and updates the running buffers with
// exponential momentum; eval mode uses the running buffers.
inline Tensor4 batchnorm_forward(const Tensor4& in, const double* gamma, const double* beta,
                                 double* running_mean, double* running_var, double eps,
                                 double momentum, bool training, BatchNormContext* ctx) {
    const std::size_t n = in.l * in.plane();
    if (training && n < 2) throw config_error("batchnorm_forward: need at least 2 samples");
    Tensor4 out(in.l, in.c, in.h, in.w);
    if (ctx) {
        ctx->xhat = Tensor4(in.l, in.c, in.h, in.w);
        ctx->inv_std.assign(in.c, 0.0);
    }
    parallel_for(in.c, [&](std::size_t ci) {
        double mean, var;
        if (training) {
            double sum = 0.0;
            for (std::size_t li = 0; li < in.l; ++li) {
                const double* p = in.plane_ptr(li, ci);
                for (std::size_t k = 0; k < in.plane(); ++k) sum += p[k];
            }
            mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t li = 0; li < in.l; ++li) {
                const double* p = in.plane_ptr(li, ci);
                for (std::size_t k = 0; k < in.plane(); ++k) {
                    const double c = p[k] - mean;
                    ss += c * c;
                }
            }
            var = ss / static_cast<double>(n);
            running_mean[ci] = (1.0 - momentum) * running_mean[ci] + momentum * mean;
            running_var[ci] = (1.0 - momentum) * running_var[ci] + momentum * var;
        } else {
            mean = running_mean[ci];
            var = running_var[ci];
        }
        if (!std::isfinite(mean) || !std::isfinite(var))
            throw numeric_error("batchnorm_forward: non-finite statistics");
        const double inv_std = 1.0 / std::sqrt(var + eps);
        if (ctx) ctx->inv_std[ci] = inv_std;
        for (std::size_t li = 0; li < in.l; ++li) {
            const double* p = in.plane_ptr(li, ci);
            double* q = out.plane_ptr(li, ci);
            double* xh = ctx ? ctx->xhat.plane_ptr(li, ci) : nullptr;
            for (std::size_t k = 0; k < in.plane(); ++k) {
                const double h = (p[k] - mean) * inv_std;
                if (xh) xh[k] = h;
                q[k] = gamma[ci] * h + beta[ci];
            }
        }
    });
    return out;
}

inline void batchnorm_backward(const Tensor4& grad_out, const BatchNormContext& ctx,
                               const double* gamma, Tensor4& grad_in, double* grad_gamma,
                               double* grad_beta) {
    const Tensor4& xhat = ctx.xhat;
    grad_in = Tensor4(xhat.l, xhat.c, xhat.h, xhat.w);
    const double n = static_cast<double>(xhat.l * xhat.plane());
    parallel_for(xhat.c, [&](std::size_t ci) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t li = 0; li < xhat.l; ++li) {
            const double* g = grad_out.plane_ptr(li, ci);
            const double* xh = xhat.plane_ptr(li, ci);
            for (std::size_t k = 0; k < xhat.plane(); ++k) {
                sum_g += g[k];
                sum_gx += g[k] * xh[k];
            }
        }
        grad_beta[ci] += sum_g;
        grad_gamma[ci] += sum_gx;
        const double gscale = gamma[ci] * ctx.inv_std[ci];
        const double mean_g = sum_g / n;
        const double mean_gx = sum_gx / n;
        for (std::size_t li = 0; li < xhat.l; ++li) {
            const double* g = grad_out.plane_ptr(li, ci);
            const double* xh = xhat.plane_ptr(li, ci);
            double* gi = grad_in.plane_ptr(li, ci);
            for (std::size_t k = 0; k < xhat.plane(); ++k)
                gi[k] = gscale * (g[k] - mean_g - xh[k] * mean_gx);
        }
    });
}

// --- complex batch normalization -------------------------------------------

// Per-channel whitening of the (re, im) pairs by the inverse square root of
// their 2x2 covariance plus eps*I, followed by the learned affine map
// out = gamma (.) w + beta with diagonal gamma = (gamma_rr, gamma_ii).
struct CBatchNormContext {
    CTensor centered;            // z - E[z]
    CTensor whitened;            // V^{-1/2} (z - E[z])
    std::vector<InvSqrt2x2> w;   // per-channel inverse sqrt factorization
};

// Pointer bundle into the owner's storage; running_* are updated in place in
// training mode.
struct CBatchNormParams {
    const double* gamma_rr = nullptr;
    const double* gamma_ii = nullptr;
    const double* beta_re = nullptr;
    const double* beta_im = nullptr;
    double* running_mean_re = nullptr;
    double* running_mean_im = nullptr;
    double* running_vrr = nullptr;
    double* running_vii = nullptr;
    double* running_vri = nullptr;
    double epsilon = 1e-5;
    double momentum = 0.1;
};

inline CTensor cbatchnorm_forward(const CTensor& in, const CBatchNormParams& prm, bool training,
                                  CBatchNormContext* ctx) {
    const std::size_t C = in.re.c;
    const std::size_t n = in.re.l * in.re.plane();
    if (training && n < 2) throw config_error("cbatchnorm_forward: need at least 2 samples");
    CTensor out(in.re.l, C, in.re.h, in.re.w);
    if (ctx) {
        ctx->centered = CTensor(in.re.l, C, in.re.h, in.re.w);
        ctx->whitened = CTensor(in.re.l, C, in.re.h, in.re.w);
        ctx->w.assign(C, InvSqrt2x2{});
    }
    parallel_for(C, [&](std::size_t ci) {
        double mx, my, vrr, vii, vri;
        if (training) {
            double sx = 0.0, sy = 0.0;
            for (std::size_t li = 0; li < in.re.l; ++li) {
                const double* px = in.re.plane_ptr(li, ci);
                const double* py = in.im.plane_ptr(li, ci);
                for (std::size_t k = 0; k < in.re.plane(); ++k) {
                    sx += px[k];
                    sy += py[k];
                }
            }
            mx = sx / static_cast<double>(n);
            my = sy / static_cast<double>(n);
            double srr = 0.0, sii = 0.0, sri = 0.0;
            for (std::size_t li = 0; li < in.re.l; ++li) {
                const double* px = in.re.plane_ptr(li, ci);
                const double* py = in.im.plane_ptr(li, ci);
                for (std::size_t k = 0; k < in.re.plane(); ++k) {
                    const double cx = px[k] - mx, cy = py[k] - my;
                    srr += cx * cx;
                    sii += cy * cy;
                    sri += cx * cy;
                }
            }
            vrr = srr / static_cast<double>(n);
            vii = sii / static_cast<double>(n);
            vri = sri / static_cast<double>(n);
            const double mom = prm.momentum;
            prm.running_mean_re[ci] = (1.0 - mom) * prm.running_mean_re[ci] + mom * mx;
            prm.running_mean_im[ci] = (1.0 - mom) * prm.running_mean_im[ci] + mom * my;
            prm.running_vrr[ci] = (1.0 - mom) * prm.running_vrr[ci] + mom * vrr;
            prm.running_vii[ci] = (1.0 - mom) * prm.running_vii[ci] + mom * vii;
            prm.running_vri[ci] = (1.0 - mom) * prm.running_vri[ci] + mom * vri;
        } else {
            mx = prm.running_mean_re[ci];
            my = prm.running_mean_im[ci];
            vrr = prm.running_vrr[ci];
            vii = prm.running_vii[ci];
            vri = prm.running_vri[ci];
        }
        if (!std::isfinite(mx) || !std::isfinite(my) || !std::isfinite(vrr) ||
            !std::isfinite(vii) || !std::isfinite(vri))
            throw numeric_error("cbatchnorm_forward: non-finite statistics");
        const InvSqrt2x2 W =
            inv_sqrt_2x2(vrr + prm.epsilon, vri, vii + prm.epsilon);
        if (ctx) ctx->w[ci] = W;
        const double grr = prm.gamma_rr[ci], gii = prm.gamma_ii[ci];
        const double bre = prm.beta_re[ci], bim = prm.beta_im[ci];
        for (std::size_t li = 0; li < in.re.l; ++li) {
            const double* px = in.re.plane_ptr(li, ci);
            const double* py = in.im.plane_ptr(li, ci);
            double* qx = out.re.plane_ptr(li, ci);
            double* qy = out.im.plane_ptr(li, ci);
            double* ccx = ctx ? ctx->centered.re.plane_ptr(li, ci) : nullptr;
            double* ccy = ctx ? ctx->centered.im.plane_ptr(li, ci) : nullptr;
            double* cwx = ctx ? ctx->whitened.re.plane_ptr(li, ci) : nullptr;
            double* cwy = ctx ? ctx->whitened.im.plane_ptr(li, ci) : nullptr;
            for (std::size_t k = 0; k < in.re.plane(); ++k) {
                const double cx = px[k] - mx, cy = py[k] - my;
                const double wx = W.w11 * cx + W.w12 * cy;
                const double wy = W.w12 * cx + W.w22 * cy;
                if (ccx) {
                    ccx[k] = cx;
                    ccy[k] = cy;
                    cwx[k] = wx;
                    cwy[k] = wy;
                }
                qx[k] = grr * wx + bre;
                qy[k] = gii * wy + bim;
            }
        }
    });
    return out;
}

// Reverse mode through the affine map, the whitening and the batch
// statistics (training-mode graph).
inline void cbatchnorm_backward(const CTensor& grad_out, const CBatchNormContext& ctx,
                                const double* gamma_rr, const double* gamma_ii, CTensor& grad_in,
                                double* grad_gamma_rr, double* grad_gamma_ii, double* grad_beta_re,
                                double* grad_beta_im) {
    const CTensor& cen = ctx.centered;
    const CTensor& wh = ctx.whitened;
    const std::size_t C = cen.re.c;
    const double n = static_cast<double>(cen.re.l * cen.re.plane());
    grad_in = CTensor(cen.re.l, C, cen.re.h, cen.re.w);
    parallel_for(C, [&](std::size_t ci) {
        const InvSqrt2x2& W = ctx.w[ci];
        const double grr = gamma_rr[ci], gii = gamma_ii[ci];
        // affine-layer gradients and dL/dW accumulators
        double sum_gx = 0.0, sum_gy = 0.0, sum_gwx = 0.0, sum_gwy = 0.0;
        double m11 = 0.0, m12 = 0.0, m22 = 0.0;
        for (std::size_t li = 0; li < cen.re.l; ++li) {
            const double* gx = grad_out.re.plane_ptr(li, ci);
            const double* gy = grad_out.im.plane_ptr(li, ci);
            const double* wx = wh.re.plane_ptr(li, ci);
            const double* wy = wh.im.plane_ptr(li, ci);
            const double* cx = cen.re.plane_ptr(li, ci);
            const double* cy = cen.im.plane_ptr(li, ci);
            for (std::size_t k = 0; k < cen.re.plane(); ++k) {
                sum_gx += gx[k];
                sum_gy += gy[k];
                sum_gwx += gx[k] * wx[k];
                sum_gwy += gy[k] * wy[k];
                const double Gx = grr * gx[k], Gy = gii * gy[k];  // dL/dw pre-affine
                m11 += Gx * cx[k];
                m12 += Gx * cy[k] + Gy * cx[k];
                m22 += Gy * cy[k];
            }
        }
        grad_beta_re[ci] += sum_gx;
        grad_beta_im[ci] += sum_gy;
        grad_gamma_rr[ci] += sum_gwx;
        grad_gamma_ii[ci] += sum_gwy;
        const InvSqrt2x2Grad K = inv_sqrt_2x2_backward(W, m11, m12, m22);
        // dL/dc via the covariance path: V = (1/n) sum c c^T
        const double ka2 = 2.0 * K.da / n, kd2 = 2.0 * K.dd / n, kb = K.db / n;
        double sub_x = 0.0, sub_y = 0.0;  // mean of dL/dc, removed by centering
        for (std::size_t li = 0; li < cen.re.l; ++li) {
            const double* gx = grad_out.re.plane_ptr(li, ci);
            const double* gy = grad_out.im.plane_ptr(li, ci);
            const double* cx = cen.re.plane_ptr(li, ci);
            const double* cy = cen.im.plane_ptr(li, ci);
            double* dx = grad_in.re.plane_ptr(li, ci);
            double* dy = grad_in.im.plane_ptr(li, ci);
            for (std::size_t k = 0; k < cen.re.plane(); ++k) {
                const double Gx = grr * gx[k], Gy = gii * gy[k];
                double ex = W.w11 * Gx + W.w12 * Gy + ka2 * cx[k] + kb * cy[k];
                double ey = W.w12 * Gx + W.w22 * Gy + kd2 * cy[k] + kb * cx[k];
                dx[k] = ex;
                dy[k] = ey;
                sub_x += ex;
                sub_y += ey;
            }
        }
        sub_x /= n;
        sub_y /= n;
        for (std::size_t li = 0; li < cen.re.l; ++li) {
            double* dx = grad_in.re.plane_ptr(li, ci);
            double* dy = grad_in.im.plane_ptr(li, ci);
            for (std::size_t k = 0; k < cen.re.plane(); ++k) {
                dx[k] -= sub_x;
                dy[k] -= sub_y;
            }
        }
    });
}

// Owning state for standalone use, mirroring the model's layer2 BN.
struct CBatchNormState {
    std::vector<double> gamma_rr, gamma_ii, beta_re, beta_im;
    std::vector<double> running_mean_re, running_mean_im;
    std::vector<double> running_vrr, running_vii, running_vri;
    double epsilon = 1e-5;
    double momentum = 0.1;

    explicit CBatchNormState(std::size_t channels, double eps = 1e-5, double mom = 0.1)
        : gamma_rr(channels, 1.0),
          gamma_ii(channels, 1.0),
          beta_re(channels, 0.0),
          beta_im(channels, 0.0),
          running_mean_re(channels, 0.0),
          running_mean_im(channels, 0.0),
          running_vrr(channels, 0.5),
          running_vii(channels, 0.5),
          running_vri(channels, 0.0),
          epsilon(eps),
          momentum(mom) {}

    CBatchNormParams params() {
        return CBatchNormParams{gamma_rr.data(),       gamma_ii.data(),
                                beta_re.data(),        beta_im.data(),
                                running_mean_re.data(), running_mean_im.data(),
                                running_vrr.data(),    running_vii.data(),
                                running_vri.data(),    epsilon,
                                momentum};
    }
};

inline CTensor cbatchnorm_forward(const CTensor& in, CBatchNormState& state, bool training,
                                  CBatchNormContext* ctx = nullptr) {
    const CBatchNormParams prm = state.params();
    return cbatchnorm_forward(in, prm, training, ctx);
}

}  // namespace cvrd::nn
