#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "cvrd/cmat.hpp"
#include "cvrd/common.hpp"
#include "cvrd/fft.hpp"
#include "cvrd/rng.hpp"

namespace cvrd::radar {

// Transmit and acquisition parameters of the ego radar.
struct RadarParams {
    std::size_t n_fast = 128;             // samples per ramp (N)
    std::size_t n_ramps = 128;            // ramps per frame (M)
    double sample_rate_hz = 10.0e6;
    double ramp_duration_s = 15.0e-6;
    double chirp_start_hz = 77.0e9;
    double chirp_slope_hz_per_s = 2.0e12;
    double if_bandwidth_hz = 5.0e6;

    void validate() const {
        if (n_fast < 8 || n_ramps < 8)
            throw config_error("RadarParams: n_fast and n_ramps must be >= 8");
        if (sample_rate_hz <= 0.0 || ramp_duration_s <= 0.0)
            throw config_error("RadarParams: sample_rate_hz and ramp_duration_s must be positive");
        if (sample_rate_hz * ramp_duration_s < static_cast<double>(n_fast))
            throw config_error("RadarParams: ramp too short for n_fast samples");
        if (if_bandwidth_hz <= 0.0 || if_bandwidth_hz > sample_rate_hz / 2.0)
            throw config_error("RadarParams: if_bandwidth_hz must be in (0, sample_rate/2]");
    }
};

// One point reflector expressed through its normalized IF frequencies.
struct ObjectSpec {
    double beat_freq_norm = 0.0;     // in [0, 0.5): range encoding
    double doppler_freq_norm = 0.0;  // in [-0.5, 0.5): velocity encoding
    double amplitude = 1.0;
    double phase_rad = 0.0;

    void validate() const {
        if (!(beat_freq_norm >= 0.0 && beat_freq_norm < 0.5))
            throw std::domain_error("ObjectSpec: beat_freq_norm outside [0, 0.5)");
        if (!(doppler_freq_norm >= -0.5 && doppler_freq_norm < 0.5))
            throw std::domain_error("ObjectSpec: doppler_freq_norm outside [-0.5, 0.5)");
        if (!(amplitude > 0.0) || !std::isfinite(amplitude))
            throw std::domain_error("ObjectSpec: amplitude must be positive and finite");
    }
};

// A non-coherent interfering radar, modelled as one continuous linear chirp
// sweeping across the frame.
struct InterfererSpec {
    double chirp_slope_hz_per_s = -2.0e12;
    double chirp_start_hz = 77.0e9;
    double time_offset_s = 0.0;
    double amplitude = 1.0;
    double phase_rad = 0.0;
};

struct Scene {
    std::vector<ObjectSpec> objects;
    std::vector<InterfererSpec> interferers;
    double noise_std = 0.0;  // per real component of the complex noise
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (objects.size() > 64) throw config_error("Scene: at most 64 objects");
        if (interferers.size() > 8) throw config_error("Scene: at most 8 interferers");
        if (noise_std < 0.0) throw config_error("Scene: noise_std must be >= 0");
        for (const auto& o : objects) o.validate();
    }
};

// Fast-time x slow-time IF frame.
struct IFMatrix {
    CMat data;
    RadarParams params;
};

// Complex range-Doppler spectrum. `mean`/`scale` always allow exact
// inversion of the standardization; unstandardized maps carry (0, 1).
struct RDMap {
    CMat data;
    bool standardized = false;
    cplx mean{0.0, 0.0};
    double scale = 1.0;
};

// Training pair. Both maps share the crop window and the standardization
// statistics of the interfered map.
struct SamplePair {
    RDMap interfered;
    RDMap clean;
    std::vector<std::pair<std::uint16_t, std::uint16_t>> truth_cells;
};

// 2-D complex exponential carrying one object: amplitude * exp(i(2*pi*f_b*n
// + 2*pi*f_d*m + phase)). Separable, so built as an outer product.
inline IFMatrix object_component(const ObjectSpec& obj, const RadarParams& p) {
    obj.validate();
    p.validate();
    IFMatrix out;
    out.params = p;
    out.data = CMat(p.n_fast, p.n_ramps);
    std::vector<cplx> fast(p.n_fast), slow(p.n_ramps);
    for (std::size_t n = 0; n < p.n_fast; ++n) {
        const double a = kTwoPi * obj.beat_freq_norm * static_cast<double>(n) + obj.phase_rad;
        fast[n] = obj.amplitude * cplx(std::cos(a), std::sin(a));
    }
    for (std::size_t m = 0; m < p.n_ramps; ++m) {
        const double a = kTwoPi * obj.doppler_freq_norm * static_cast<double>(m);
        slow[m] = cplx(std::cos(a), std::sin(a));
    }
    for (std::size_t n = 0; n < p.n_fast; ++n)
        for (std::size_t m = 0; m < p.n_ramps; ++m) out.data.at(n, m) = fast[n] * slow[m];
    return out;
}

// Difference chirp between the ego ramp and the interferer, gated to the
// samples whose instantaneous difference frequency lies inside the IF band.
// Support per ramp is a contiguous run of samples; everything else is 0.
inline IFMatrix interference_component(const InterfererSpec& intf, const RadarParams& p) {
    p.validate();
    if (intf.chirp_slope_hz_per_s == p.chirp_slope_hz_per_s)
        throw std::domain_error("interference_component: coherent case (equal slopes) unsupported");
    IFMatrix out;
    out.params = p;
    out.data = CMat(p.n_fast, p.n_ramps);
    const double fs = p.sample_rate_hz;
    const double ke = p.chirp_slope_hz_per_s;
    const double ki = intf.chirp_slope_hz_per_s;
    const double f0e = p.chirp_start_hz;
    const double f0i = intf.chirp_start_hz;
    for (std::size_t m = 0; m < p.n_ramps; ++m) {
        const double ramp_start = static_cast<double>(m) * p.ramp_duration_s;
        for (std::size_t n = 0; n < p.n_fast; ++n) {
            const double tau_e = static_cast<double>(n) / fs;          // time within the ego ramp
            const double tau_i = ramp_start + tau_e - intf.time_offset_s;  // time on the interferer chirp
            const double f_diff = (f0i + ki * tau_i) - (f0e + ke * tau_e);
            if (std::abs(f_diff) <= p.if_bandwidth_hz) {
                const double phi_i =
                    intf.phase_rad + kTwoPi * (f0i * tau_i + 0.5 * ki * tau_i * tau_i);
                const double phi_e = kTwoPi * (f0e * tau_e + 0.5 * ke * tau_e * tau_e);
                const double phi = phi_i - phi_e;
                out.data.at(n, m) = intf.amplitude * cplx(std::cos(phi), std::sin(phi));
            }
        }
    }
    return out;
}

// Full IF frame per the additive signal model: objects + noise (clean),
// plus interference bursts (interfered). Noise is complex circular Gaussian
// seeded by scene.rng_seed.
inline std::pair<IFMatrix, IFMatrix> synthesize_if(const Scene& scene, const RadarParams& p) {
    scene.validate();
    p.validate();
    IFMatrix clean;
    clean.params = p;
    clean.data = CMat(p.n_fast, p.n_ramps);
    for (const auto& obj : scene.objects) {
        const IFMatrix comp = object_component(obj, p);
        for (std::size_t i = 0; i < clean.data.size(); ++i) clean.data.data[i] += comp.data.data[i];
    }
    if (scene.noise_std > 0.0) {
        Rng rng(scene.rng_seed);
        for (std::size_t i = 0; i < clean.data.size(); ++i)
            clean.data.data[i] += scene.noise_std * cplx(rng.normal(), rng.normal());
    }
    IFMatrix interfered = clean;
    for (const auto& intf : scene.interferers) {
        const IFMatrix comp = interference_component(intf, p);
        for (std::size_t i = 0; i < interfered.data.size(); ++i)
            interfered.data.data[i] += comp.data.data[i];
    }
    return {std::move(clean), std::move(interfered)};
}

// Two-stage DFT chain: DFT over fast time (range), then DFT over slow time
// with an fftshift so zero Doppler is centered. Rectangular window,
// unnormalized transforms.
inline RDMap range_doppler_map(const IFMatrix& s) {
    RDMap out;
    out.data = fft::dft_cols(fft::dft_rows(s.data), /*shift=*/true);
    return out;
}

// First-stage spectrum only (range DFT, no Doppler DFT). Classical
// slow-time methods operate on this intermediate.
inline CMat range_spectrum(const IFMatrix& s) { return fft::dft_rows(s.data); }

// Second processing stage applied to a range spectrum.
inline RDMap doppler_stage(const CMat& range_spec) {
    RDMap out;
    out.data = fft::dft_cols(range_spec, /*shift=*/true);
    return out;
}

// Crop window: range rows [0, n_keep), Doppler columns centered.
inline std::size_t crop_col_offset(std::size_t cols, std::size_t m_keep) {
    return (cols - m_keep) / 2;
}

inline RDMap crop(const RDMap& rd, std::size_t n_keep, std::size_t m_keep) {
    if (n_keep > rd.data.rows || m_keep > rd.data.cols)
        throw config_error("crop: window larger than map");
    const std::size_t c0 = crop_col_offset(rd.data.cols, m_keep);
    RDMap out;
    out.standardized = rd.standardized;
    out.mean = rd.mean;
    out.scale = rd.scale;
    out.data = CMat(n_keep, m_keep);
    for (std::size_t n = 0; n < n_keep; ++n)
        for (std::size_t m = 0; m < m_keep; ++m) out.data.at(n, m) = rd.data.at(n, c0 + m);
    return out;
}

struct StandardizeStats {
    cplx mean{0.0, 0.0};
    double scale = 1.0;  // std of the pooled real and imaginary parts
};

inline StandardizeStats compute_stats(const CMat& m) {
    cplx mean(0.0, 0.0);
    for (const cplx& z : m.data) mean += z;
    mean /= static_cast<double>(m.size());
    double ss = 0.0;
    for (const cplx& z : m.data) ss += std::norm(z - mean);
    const double var = ss / (2.0 * static_cast<double>(m.size()));
    return {mean, std::sqrt(var)};
}

inline void apply_standardization(RDMap& rd, const StandardizeStats& st) {
    for (cplx& z : rd.data.data) z = (z - st.mean) / st.scale;
    rd.standardized = true;
    rd.mean = st.mean;
    rd.scale = st.scale;
}

inline RDMap unstandardize(const RDMap& rd) {
    if (!rd.standardized) return rd;
    RDMap out = rd;
    for (cplx& z : out.data.data) z = z * rd.scale + rd.mean;
    out.standardized = false;
    out.mean = cplx(0.0, 0.0);
    out.scale = 1.0;
    return out;
}

// Crops both maps identically and standardizes them with the statistics of
// the cropped interfered map (the target shares the input's scale, since at
// inference time the clean map is unknown).
inline SamplePair crop_and_standardize(const RDMap& rd_in, const RDMap& rd_target,
                                       std::size_t n_keep, std::size_t m_keep) {
    if (!rd_in.data.same_shape(rd_target.data))
        throw config_error("crop_and_standardize: map shapes differ");
    SamplePair pair;
    pair.interfered = crop(rd_in, n_keep, m_keep);
    pair.clean = crop(rd_target, n_keep, m_keep);
    const StandardizeStats st = compute_stats(pair.interfered.data);
    if (!(st.scale > 0.0) || !std::isfinite(st.scale))
        throw numeric_error("crop_and_standardize: degenerate input (zero variance)");
    apply_standardization(pair.interfered, st);
    apply_standardization(pair.clean, st);
    return pair;
}

}  // namespace cvrd::radar
