#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cvrd/common.hpp"

namespace cvrd::nn {

// Adam with bias correction. Every real scalar is optimized independently;
// complex parameters are simply two adjacent reals.
struct AdamState {
    std::vector<double> m, v;
    std::uint64_t t = 0;
    double lr = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n_params = 0, double lr_ = 5e-3)
        : m(n_params, 0.0), v(n_params, 0.0), lr(lr_) {}
};

// `mask`, when given, marks which entries are trainable (non-zero = update).
inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& st, const std::vector<std::uint8_t>* mask = nullptr) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw config_error("adam_step: size mismatch");
    st.t += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        const double g = grads[i];
        if (!std::isfinite(g)) throw numeric_error("adam_step: non-finite gradient");
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        params[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
    }
}

}  // namespace cvrd::nn
