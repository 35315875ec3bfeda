#pragma once

#include <cmath>
#include <vector>

#include "cvrd/cmat.hpp"
#include "cvrd/common.hpp"

namespace cvrd::fft {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// Iterative radix-2 Cooley-Tukey, in place. sign = -1 forward, +1 inverse.
inline void fft_pow2(cplx* x, std::size_t n, int sign) {
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = x[i + k];
                const cplx v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// O(n^2) transform for sizes that are not a power of two.
inline void dft_direct(cplx* x, std::size_t n, int sign) {
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * kTwoPi * static_cast<double>(k * j) / static_cast<double>(n);
            acc += x[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    for (std::size_t k = 0; k < n; ++k) x[k] = out[k];
}

}  // namespace detail

// Unnormalized forward transform, in place.
inline void forward(cplx* x, std::size_t n) {
    if (n <= 1) return;
    if (is_pow2(n))
        detail::fft_pow2(x, n, -1);
    else
        detail::dft_direct(x, n, -1);
}

// Inverse transform with 1/n normalization, in place.
inline void inverse(cplx* x, std::size_t n) {
    if (n <= 1) return;
    if (is_pow2(n))
        detail::fft_pow2(x, n, +1);
    else
        detail::dft_direct(x, n, +1);
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

inline void forward(std::vector<cplx>& x) { forward(x.data(), x.size()); }
inline void inverse(std::vector<cplx>& x) { inverse(x.data(), x.size()); }

// DC bin moved to index n/2 (n - n/2 handles odd lengths).
inline std::vector<cplx> fftshift(const std::vector<cplx>& x) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    const std::size_t off = n - n / 2;
    for (std::size_t k = 0; k < n; ++k) out[k] = x[(k + off) % n];
    return out;
}

// Forward DFT along rows (over n, for each column m).
inline CMat dft_rows(const CMat& in) {
    CMat out(in.rows, in.cols);
    std::vector<cplx> col(in.rows);
    for (std::size_t m = 0; m < in.cols; ++m) {
        for (std::size_t n = 0; n < in.rows; ++n) col[n] = in.at(n, m);
        forward(col);
        for (std::size_t n = 0; n < in.rows; ++n) out.at(n, m) = col[n];
    }
    return out;
}

// Forward DFT along columns (over m, for each row n); optional fftshift
// so that the zero-frequency bin lands in the center column.
inline CMat dft_cols(const CMat& in, bool shift) {
    CMat out(in.rows, in.cols);
    std::vector<cplx> row(in.cols);
    for (std::size_t n = 0; n < in.rows; ++n) {
        for (std::size_t m = 0; m < in.cols; ++m) row[m] = in.at(n, m);
        forward(row);
        if (shift) row = fftshift(row);
        for (std::size_t m = 0; m < in.cols; ++m) out.at(n, m) = row[m];
    }
    return out;
}

}  // namespace cvrd::fft
