#include <gtest/gtest.h>

#include "cvrd/fft.hpp"
#include "cvrd/rng.hpp"
#include "testutil.hpp"

using namespace cvrd;

namespace {

CMat random_cmat(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    CMat m(rows, cols);
    Rng rng(seed);
    for (cplx& z : m.data) z = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return m;
}

}  // namespace

TEST(Fft, MatchesDirectDftOnPow2AndOddSizes) {
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 3u, 5u, 12u}) {
        Rng rng(7 + n);
        std::vector<cplx> x(n);
        for (cplx& z : x) z = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        std::vector<cplx> direct = x;
        // reference: textbook summation
        std::vector<cplx> ref(n);
        for (std::size_t k = 0; k < n; ++k) {
            cplx acc(0, 0);
            for (std::size_t j = 0; j < n; ++j) {
                const double ang = -kTwoPi * static_cast<double>(k * j) / static_cast<double>(n);
                acc += x[j] * cplx(std::cos(ang), std::sin(ang));
            }
            ref[k] = acc;
        }
        fft::forward(direct);
        for (std::size_t k = 0; k < n; ++k) {
            EXPECT_NEAR(direct[k].real(), ref[k].real(), 1e-10 * std::max(1.0, std::abs(ref[k])));
            EXPECT_NEAR(direct[k].imag(), ref[k].imag(), 1e-10 * std::max(1.0, std::abs(ref[k])));
        }
    }
}

TEST(Fft, InverseRoundTrip) {
    Rng rng(3);
    std::vector<cplx> x(64);
    for (cplx& z : x) z = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    std::vector<cplx> y = x;
    fft::forward(y);
    fft::inverse(y);
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_NEAR(y[i].real(), x[i].real(), 1e-12);
        EXPECT_NEAR(y[i].imag(), x[i].imag(), 1e-12);
    }
}

TEST(Fft, FftShiftCentersDc) {
    std::vector<cplx> x(8, cplx(0, 0));
    x[0] = cplx(1, 0);
    const auto y = fft::fftshift(x);
    EXPECT_EQ(y[4], cplx(1, 0));
    std::vector<cplx> odd(5, cplx(0, 0));
    odd[0] = cplx(1, 0);
    const auto z = fft::fftshift(odd);
    EXPECT_EQ(z[2], cplx(1, 0));
}

TEST(Fft, TwoStageChainMatchesNaive2dDft) {
    for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{8, 8}, {16, 16}, {8, 16}, {12, 10}}) {
        const CMat in = random_cmat(rows, cols, 11 * rows + cols);
        const CMat got = fft::dft_cols(fft::dft_rows(in), /*shift=*/true);
        const CMat want = testutil::naive_dft2(in, /*shift_doppler=*/true);
        for (std::size_t i = 0; i < got.size(); ++i) {
            const double scale = std::max(1.0, std::abs(want.data[i]));
            EXPECT_NEAR(got.data[i].real(), want.data[i].real(), 1e-10 * scale);
            EXPECT_NEAR(got.data[i].imag(), want.data[i].imag(), 1e-10 * scale);
        }
    }
}

TEST(Fft, ParsevalEnergyIdentity) {
    const CMat in = random_cmat(16, 16, 5);
    const CMat rd = fft::dft_cols(fft::dft_rows(in), true);
    const double lhs = energy(rd);
    const double rhs = static_cast<double>(in.rows * in.cols) * energy(in);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
}
