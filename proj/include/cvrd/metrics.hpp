#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "cvrd/cmat.hpp"
#include "cvrd/common.hpp"

namespace cvrd::metrics {

using Cell = std::pair<std::size_t, std::size_t>;

struct DetectionMap {
    std::set<Cell> cells;
};

struct CfarConfig {
    std::size_t guard = 2;  // guard cells per side
    std::size_t train = 4;  // training cells per side beyond the guard
    double pfa = 1e-4;

    void validate() const {
        if (train < 1) throw config_error("CfarConfig: train must be >= 1");
        if (!(pfa > 0.0 && pfa < 1.0)) throw config_error("CfarConfig: pfa must be in (0, 1)");
    }
};

// 2-D CA-CFAR on a nonnegative (squared-magnitude) map. A cell is declared
// iff it exceeds alpha * mean(training ring), alpha = T (pfa^(-1/T) - 1)
// with T the per-cell count of usable training cells, and it is a local
// maximum within the guard region. The Doppler axis wraps; the range axis
// clamps (out-of-range ring cells are skipped).
inline DetectionMap ca_cfar(const std::vector<double>& power, std::size_t rows, std::size_t cols,
                            const CfarConfig& cfg = {}) {
    cfg.validate();
    const std::size_t span = 2 * (cfg.guard + cfg.train) + 1;
    if (span > rows || span > cols) throw config_error("ca_cfar: window exceeds map");
    if (power.size() != rows * cols) throw config_error("ca_cfar: size mismatch");
    const long g = static_cast<long>(cfg.guard), t = static_cast<long>(cfg.train);
    const long R = static_cast<long>(rows), C = static_cast<long>(cols);
    DetectionMap out;
    for (long n = 0; n < R; ++n) {
        for (long m = 0; m < C; ++m) {
            const double value = power[static_cast<std::size_t>(n * C + m)];
            double sum = 0.0;
            std::size_t count = 0;
            bool local_max = true;
            for (long dn = -(g + t); dn <= g + t && local_max; ++dn) {
                const long nn = n + dn;
                if (nn < 0 || nn >= R) continue;  // clamp in range
                for (long dm = -(g + t); dm <= g + t; ++dm) {
                    if (dn == 0 && dm == 0) continue;
                    const long mm = ((m + dm) % C + C) % C;  // wrap in Doppler
                    const double v = power[static_cast<std::size_t>(nn * C + mm)];
                    const long cheb = std::max(std::abs(dn), std::abs(dm));
                    if (cheb <= g) {
                        if (v > value) {
                            local_max = false;
                            break;
                        }
                    } else {
                        sum += v;
                        ++count;
                    }
                }
            }
            if (!local_max || count == 0) continue;
            const double T = static_cast<double>(count);
            const double alpha = T * (std::pow(cfg.pfa, -1.0 / T) - 1.0);
            if (value > alpha * (sum / T)) out.cells.insert({static_cast<std::size_t>(n),
                                                             static_cast<std::size_t>(m)});
        }
    }
    return out;
}

inline DetectionMap ca_cfar_map(const CMat& map, const CfarConfig& cfg = {}) {
    std::vector<double> power(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) power[i] = std::norm(map.data[i]);
    return ca_cfar(power, map.rows, map.cols, cfg);
}

namespace detail {
inline long chebyshev(const Cell& a, const Cell& b) {
    const long dn = static_cast<long>(a.first) - static_cast<long>(b.first);
    const long dm = static_cast<long>(a.second) - static_cast<long>(b.second);
    return std::max(std::abs(dn), std::abs(dm));
}
}  // namespace detail

// F1 = 2 tp / (2 tp + fp + fn). A prediction is a true positive when it can
// be matched to a so-far unmatched truth cell within Chebyshev distance 1
// (greedy, nearest first, row-major tie break). Empty vs empty is 1 by
// convention.
inline double f1_score(const DetectionMap& pred, const DetectionMap& truth) {
    if (pred.cells.empty() && truth.cells.empty()) return 1.0;
    std::vector<Cell> unmatched(truth.cells.begin(), truth.cells.end());
    std::size_t tp = 0;
    for (const Cell& p : pred.cells) {
        long best = 2;
        std::size_t best_idx = unmatched.size();
        for (std::size_t i = 0; i < unmatched.size(); ++i) {
            const long d = detail::chebyshev(p, unmatched[i]);
            if (d < best) {
                best = d;
                best_idx = i;
            }
        }
        if (best_idx < unmatched.size()) {
            unmatched.erase(unmatched.begin() + static_cast<long>(best_idx));
            ++tp;
        }
    }
    const std::size_t fp = pred.cells.size() - tp;
    const std::size_t fn = truth.cells.size() - tp;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

struct MetricValue {
    double value = 0.0;
    std::size_t excluded = 0;  // peak cells skipped as undefined
};

// Mean over peak cells of |clean - pred| / |clean|, on physical scale.
// Cells with |clean| = 0 are excluded and counted.
inline MetricValue evm(const CMat& pred, const CMat& clean, const std::set<Cell>& peaks) {
    if (!pred.same_shape(clean)) throw config_error("evm: map shapes differ");
    if (peaks.empty()) throw config_error("evm: empty peak set");
    MetricValue out;
    double acc = 0.0;
    std::size_t used = 0;
    for (const Cell& c : peaks) {
        const cplx sc = clean.at(c.first, c.second);
        const double mag = std::abs(sc);
        if (mag == 0.0) {
            ++out.excluded;
            continue;
        }
        acc += std::abs(sc - pred.at(c.first, c.second)) / mag;
        ++used;
    }
    out.value = used > 0 ? acc / static_cast<double>(used) : 0.0;
    return out;
}

// Mean squared wrap-aware phase difference at peak cells, in rad^2. Angles
// are four-quadrant angles of the complex cell values; cells with zero
// magnitude in either map are excluded and counted.
inline MetricValue ppmse(const CMat& pred, const CMat& clean, const std::set<Cell>& peaks) {
    if (!pred.same_shape(clean)) throw config_error("ppmse: map shapes differ");
    if (peaks.empty()) throw config_error("ppmse: empty peak set");
    MetricValue out;
    double acc = 0.0;
    std::size_t used = 0;
    for (const Cell& c : peaks) {
        const cplx sp = pred.at(c.first, c.second);
        const cplx sc = clean.at(c.first, c.second);
        if (std::abs(sp) == 0.0 || std::abs(sc) == 0.0) {
            ++out.excluded;
            continue;
        }
        double delta = std::abs(std::atan2(sp.imag(), sp.real()) -
                                std::atan2(sc.imag(), sc.real()));
        delta = std::min(delta, kTwoPi - delta);
        acc += delta * delta;
        ++used;
    }
    out.value = used > 0 ? acc / static_cast<double>(used) : 0.0;
    return out;
}

// Sorted step function; fraction k/n at the k-th sorted value (1-based).
inline std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values) {
    if (values.empty()) throw config_error("empirical_cdf: empty input");
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> out(values.size());
    const double n = static_cast<double>(values.size());
    for (std::size_t k = 0; k < values.size(); ++k)
        out[k] = {values[k], static_cast<double>(k + 1) / n};
    return out;
}

struct MetricsReport {
    double f1 = 0.0;
    double evm = 0.0;
    double ppmse_rad2 = 0.0;
    std::vector<double> per_sample_f1;
    std::vector<double> per_sample_evm;
    std::vector<double> per_sample_ppmse;

    void add(double f1_val, double evm_val, double ppmse_val) {
        per_sample_f1.push_back(f1_val);
        per_sample_evm.push_back(evm_val);
        per_sample_ppmse.push_back(ppmse_val);
    }

    void finalize() {
        auto mean = [](const std::vector<double>& v) {
            if (v.empty()) return 0.0;
            double s = 0.0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        f1 = mean(per_sample_f1);
        evm = mean(per_sample_evm);
        ppmse_rad2 = mean(per_sample_ppmse);
    }
};

}  // namespace cvrd::metrics
