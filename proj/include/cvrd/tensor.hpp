#pragma once

#include <cstddef>
#include <vector>

#include "cvrd/cmat.hpp"
#include "cvrd/common.hpp"

namespace cvrd::nn {

// Dense real tensor, shape (batch L, channels C, height H, width W),
// row-major with W fastest.
struct Tensor4 {
    std::size_t l = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor4() = default;
    Tensor4(std::size_t l_, std::size_t c_, std::size_t h_, std::size_t w_)
        : l(l_), c(c_), h(h_), w(w_), v(l_ * c_ * h_ * w_, 0.0) {}

    std::size_t size() const { return v.size(); }
    std::size_t plane() const { return h * w; }

    double* plane_ptr(std::size_t li, std::size_t ci) { return v.data() + (li * c + ci) * plane(); }
    const double* plane_ptr(std::size_t li, std::size_t ci) const {
        return v.data() + (li * c + ci) * plane();
    }

    double& at(std::size_t li, std::size_t ci, std::size_t y, std::size_t x) {
        return v[((li * c + ci) * h + y) * w + x];
    }
    double at(std::size_t li, std::size_t ci, std::size_t y, std::size_t x) const {
        return v[((li * c + ci) * h + y) * w + x];
    }

    bool same_shape(const Tensor4& o) const {
        return l == o.l && c == o.c && h == o.h && w == o.w;
    }

    void fill(double val) { std::fill(v.begin(), v.end(), val); }
};

// Complex tensor as a pair of equally shaped real tensors.
struct CTensor {
    Tensor4 re, im;

    CTensor() = default;
    CTensor(std::size_t l, std::size_t c, std::size_t h, std::size_t w)
        : re(l, c, h, w), im(l, c, h, w) {}

    std::size_t size() const { return re.size(); }
    bool same_shape(const CTensor& o) const { return re.same_shape(o.re); }
    void fill(double r, double i) {
        re.fill(r);
        im.fill(i);
    }
};

// One complex map -> batch element (li, channel 0) of a complex tensor.
inline void load_map(CTensor& t, std::size_t li, const CMat& m) {
    double* r = t.re.plane_ptr(li, 0);
    double* i = t.im.plane_ptr(li, 0);
    for (std::size_t k = 0; k < m.size(); ++k) {
        r[k] = m.data[k].real();
        i[k] = m.data[k].imag();
    }
}

inline CMat extract_map(const CTensor& t, std::size_t li) {
    CMat m(t.re.h, t.re.w);
    const double* r = t.re.plane_ptr(li, 0);
    const double* i = t.im.plane_ptr(li, 0);
    for (std::size_t k = 0; k < m.size(); ++k) m.data[k] = cplx(r[k], i[k]);
    return m;
}

// Real-domain view of complex data: channel 0 carries the real part,
// channel 1 the imaginary part.
inline Tensor4 stack_channels(const CTensor& t) {
    Tensor4 out(t.re.l, 2 * t.re.c, t.re.h, t.re.w);
    for (std::size_t li = 0; li < t.re.l; ++li)
        for (std::size_t ci = 0; ci < t.re.c; ++ci) {
            std::copy_n(t.re.plane_ptr(li, ci), t.re.plane(), out.plane_ptr(li, 2 * ci));
            std::copy_n(t.im.plane_ptr(li, ci), t.re.plane(), out.plane_ptr(li, 2 * ci + 1));
        }
    return out;
}

inline CTensor unstack_channels(const Tensor4& t) {
    if (t.c % 2 != 0) throw config_error("unstack_channels: odd channel count");
    CTensor out(t.l, t.c / 2, t.h, t.w);
    for (std::size_t li = 0; li < t.l; ++li)
        for (std::size_t ci = 0; ci < out.re.c; ++ci) {
            std::copy_n(t.plane_ptr(li, 2 * ci), t.plane(), out.re.plane_ptr(li, ci));
            std::copy_n(t.plane_ptr(li, 2 * ci + 1), t.plane(), out.im.plane_ptr(li, ci));
        }
    return out;
}

}  // namespace cvrd::nn
