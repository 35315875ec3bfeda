#pragma once

#include <cstddef>
#include <vector>

#include "cvrd/common.hpp"

namespace cvrd {

// Row-major complex matrix. Rows index fast time / range (n),
// columns index slow time / Doppler (m).
struct CMat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<cplx> data;

    CMat() = default;
    CMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    cplx& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const cplx& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }

    bool same_shape(const CMat& o) const { return rows == o.rows && cols == o.cols; }
};

inline CMat operator+(const CMat& a, const CMat& b) {
    CMat out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    return out;
}

inline CMat operator-(const CMat& a, const CMat& b) {
    CMat out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] - b.data[i];
    return out;
}

inline double energy(const CMat& a) {
    double e = 0.0;
    for (const cplx& z : a.data) e += std::norm(z);
    return e;
}

}  // namespace cvrd
