#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvrd/fft.hpp"
#include "cvrd/radar.hpp"
#include "cvrd/rng.hpp"

namespace cvrd::classical {

using radar::IFMatrix;
using radar::RDMap;

// Boolean time-domain mask; true marks a sample flagged as interfered.
struct InterferenceMask {
    std::size_t rows = 0, cols = 0;
    std::vector<std::uint8_t> mask;

    InterferenceMask() = default;
    InterferenceMask(std::size_t r, std::size_t c) : rows(r), cols(c), mask(r * c, 0) {}

    std::uint8_t& at(std::size_t r, std::size_t c) { return mask[r * cols + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const { return mask[r * cols + c]; }
    std::size_t size() const { return mask.size(); }
};

// Ground-truth interference mask (samples where the interfered frame
// deviates from the clean one), corrupted by flipping an exact share of
// labels so the overall accuracy hits the target. Flip positions are chosen
// uniformly, so they land on flagged and unflagged samples alike.
inline InterferenceMask detect_interference(const IFMatrix& clean, const IFMatrix& interfered,
                                            double accuracy, std::uint64_t seed) {
    if (!clean.data.same_shape(interfered.data))
        throw config_error("detect_interference: frame shapes differ");
    if (!(accuracy > 0.5 && accuracy <= 1.0))
        throw config_error("detect_interference: accuracy must be in (0.5, 1]");
    InterferenceMask out(clean.data.rows, clean.data.cols);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.mask[i] = clean.data.data[i] != interfered.data.data[i] ? 1 : 0;
    const auto flips =
        static_cast<std::size_t>(std::llround((1.0 - accuracy) * static_cast<double>(out.size())));
    if (flips == 0) return out;
    // partial Fisher-Yates: the first `flips` entries are a uniform sample
    std::vector<std::uint32_t> idx(out.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
    Rng rng(seed);
    for (std::size_t i = 0; i < flips; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.index(idx.size() - i));
        std::swap(idx[i], idx[j]);
        out.mask[idx[i]] ^= 1;
    }
    return out;
}

// Flagged samples replaced by zero; everything else untouched.
inline IFMatrix zeroing(const IFMatrix& s, const InterferenceMask& mask) {
    if (s.data.rows != mask.rows || s.data.cols != mask.cols)
        throw config_error("zeroing: mask shape mismatch");
    IFMatrix out = s;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        if (mask.mask[i]) out.data.data[i] = cplx(0.0, 0.0);
    return out;
}

struct ImatConfig {
    std::size_t iters = 10;
    double thresh_decay = 0.7;
};

// Iterative Fourier reconstruction with a decaying adaptive threshold,
// applied independently per ramp. Flagged samples start at zero; each
// iteration keeps the spectral bins above tau_0 * decay^k (tau_0 from the
// initial spectrum's maximum), transforms back and re-imposes the known
// unflagged samples. With iters = 0 this reduces to zeroing.
inline IFMatrix imat(const IFMatrix& s, const InterferenceMask& mask, const ImatConfig& cfg = {}) {
    if (s.data.rows != mask.rows || s.data.cols != mask.cols)
        throw config_error("imat: mask shape mismatch");
    IFMatrix out = s;
    const std::size_t N = s.data.rows, M = s.data.cols;
    std::vector<cplx> orig(N), x(N), spec(N);
    for (std::size_t m = 0; m < M; ++m) {
        bool any = false;
        for (std::size_t n = 0; n < N; ++n) {
            orig[n] = s.data.at(n, m);
            any = any || mask.at(n, m);
        }
        if (!any) continue;
        for (std::size_t n = 0; n < N; ++n) x[n] = mask.at(n, m) ? cplx(0.0, 0.0) : orig[n];
        double tau0 = -1.0;
        for (std::size_t k = 1; k <= cfg.iters; ++k) {
            spec = x;
            fft::forward(spec);
            if (tau0 < 0.0) {
                tau0 = 0.0;
                for (const cplx& z : spec) tau0 = std::max(tau0, std::abs(z));
            }
            const double tau = tau0 * std::pow(cfg.thresh_decay, static_cast<double>(k));
            for (cplx& z : spec)
                if (std::abs(z) < tau) z = cplx(0.0, 0.0);
            x = spec;
            fft::inverse(x);
            for (std::size_t n = 0; n < N; ++n)
                if (!mask.at(n, m)) x[n] = orig[n];
        }
        for (std::size_t n = 0; n < N; ++n) out.data.at(n, m) = mask.at(n, m) ? x[n] : orig[n];
    }
    return out;
}

// Slow-time non-linear magnitude filter on the post-range-DFT spectrum:
// per range bin, magnitudes are clipped at headroom * min_m |S_R[n,m]|,
// phases untouched.
inline CMat ramp_filtering(const CMat& range_spec, double headroom = 1.0) {
    CMat out = range_spec;
    for (std::size_t n = 0; n < out.rows; ++n) {
        double min_mag = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < out.cols; ++m)
            min_mag = std::min(min_mag, std::abs(out.at(n, m)));
        const double cap = headroom * min_mag;
        for (std::size_t m = 0; m < out.cols; ++m) {
            cplx& z = out.at(n, m);
            const double mag = std::abs(z);
            if (mag > cap) z *= cap / mag;
        }
    }
    return out;
}

enum class Method { none, zeroing, imat, rfmin };

inline Method parse_method(const std::string& s) {
    if (s == "none") return Method::none;
    if (s == "zeroing") return Method::zeroing;
    if (s == "imat") return Method::imat;
    if (s == "rfmin") return Method::rfmin;
    throw config_error("unknown mitigation method: " + s);
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::none: return "none";
        case Method::zeroing: return "zeroing";
        case Method::imat: return "imat";
        case Method::rfmin: return "rfmin";
    }
    return "?";
}

// Routes a method through the processing chain at its native stage and
// returns the unstandardized RD-map.
inline RDMap mitigate_pipeline(Method method, const IFMatrix& interfered,
                               const InterferenceMask* mask, const ImatConfig& imat_cfg = {},
                               double rfmin_headroom = 1.0) {
    switch (method) {
        case Method::none:
            return radar::range_doppler_map(interfered);
        case Method::zeroing:
            if (!mask) throw config_error("mitigate_pipeline: zeroing needs a mask");
            return radar::range_doppler_map(zeroing(interfered, *mask));
        case Method::imat:
            if (!mask) throw config_error("mitigate_pipeline: imat needs a mask");
            return radar::range_doppler_map(imat(interfered, *mask, imat_cfg));
        case Method::rfmin:
            return radar::doppler_stage(ramp_filtering(radar::range_spectrum(interfered),
                                                       rfmin_headroom));
    }
    throw config_error("mitigate_pipeline: bad method");
}

}  // namespace cvrd::classical
