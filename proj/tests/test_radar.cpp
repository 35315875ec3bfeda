#include <gtest/gtest.h>

#include "cvrd/radar.hpp"
#include "testutil.hpp"

using namespace cvrd;
using namespace cvrd::radar;

namespace {

RadarParams small_params(std::size_t n = 8, std::size_t m = 8) {
    RadarParams p;
    p.n_fast = n;
    p.n_ramps = m;
    p.sample_rate_hz = 10e6;
    p.ramp_duration_s = std::max(1.0, static_cast<double>(n)) / p.sample_rate_hz * 1.5;
    p.if_bandwidth_hz = 5e6;
    return p;
}

std::pair<std::size_t, std::size_t> argmax_mag(const CMat& m) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.size(); ++i)
        if (std::abs(m.data[i]) > std::abs(m.data[best])) best = i;
    return {best / m.cols, best % m.cols};
}

}  // namespace

TEST(ObjectComponent, ZeroFrequencyGivesAllOnes) {
    ObjectSpec o;  // beat 0, doppler 0, amp 1, phase 0
    const IFMatrix s = object_component(o, small_params());
    for (const cplx& z : s.data.data) {
        EXPECT_DOUBLE_EQ(z.real(), 1.0);
        EXPECT_DOUBLE_EQ(z.imag(), 0.0);
    }
}

TEST(ObjectComponent, QuarterBeatHasPeriodFourAndPeakAtBin2) {
    ObjectSpec o;
    o.beat_freq_norm = 0.25;
    const RadarParams p = small_params(8, 8);
    const IFMatrix s = object_component(o, p);
    // closed form: exp(i pi n / 2), constant along m
    for (std::size_t n = 0; n < 8; ++n)
        for (std::size_t m = 0; m < 8; ++m) {
            const cplx want = std::polar(1.0, kTwoPi * 0.25 * static_cast<double>(n));
            EXPECT_NEAR(std::abs(s.data.at(n, m) - want), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(s.data.at(n, m) - s.data.at((n + 4) % 8, m)), 0.0, 1e-12);
        }
    // unshifted 2-D DFT peak at (beat*N, doppler*M mod M) = (2, 0)
    const CMat spec = testutil::naive_dft2(s.data, /*shift_doppler=*/false);
    EXPECT_EQ(argmax_mag(spec), (std::pair<std::size_t, std::size_t>{2, 0}));
    // the processing chain shifts Doppler, moving the peak to the center column
    const RDMap rd = range_doppler_map(s);
    EXPECT_EQ(argmax_mag(rd.data), (std::pair<std::size_t, std::size_t>{2, 4}));
}

TEST(ObjectComponent, AmplitudeIsLinear) {
    ObjectSpec o;
    o.beat_freq_norm = 0.1;
    o.doppler_freq_norm = -0.2;
    o.phase_rad = 0.7;
    const RadarParams p = small_params();
    const IFMatrix s1 = object_component(o, p);
    o.amplitude = 2.0;
    const IFMatrix s2 = object_component(o, p);
    for (std::size_t i = 0; i < s1.data.size(); ++i)
        EXPECT_NEAR(std::abs(s2.data.data[i] - 2.0 * s1.data.data[i]), 0.0, 1e-12);
}

TEST(ObjectComponent, RejectsOutOfRangeFrequencies) {
    ObjectSpec o;
    o.beat_freq_norm = 0.5;
    EXPECT_THROW(object_component(o, small_params()), std::domain_error);
    o.beat_freq_norm = 0.1;
    o.doppler_freq_norm = 0.5;
    EXPECT_THROW(object_component(o, small_params()), std::domain_error);
}

TEST(InterferenceComponent, EqualSlopesRejected) {
    const RadarParams p = small_params();
    InterfererSpec f;
    f.chirp_slope_hz_per_s = p.chirp_slope_hz_per_s;
    EXPECT_THROW(interference_component(f, p), std::domain_error);
}

TEST(InterferenceComponent, OutOfBandInterfererIsSilent) {
    const RadarParams p = small_params();
    InterfererSpec f;
    f.chirp_slope_hz_per_s = -p.chirp_slope_hz_per_s;
    f.chirp_start_hz = p.chirp_start_hz + 1e9;  // difference frequency never in band
    const IFMatrix s = interference_component(f, p);
    for (const cplx& z : s.data.data) EXPECT_EQ(z, cplx(0.0, 0.0));
}

TEST(InterferenceComponent, BurstLengthMatchesCrossingFormula) {
    RadarParams p;
    p.n_fast = 128;
    p.n_ramps = 8;
    p.sample_rate_hz = 10e6;
    p.ramp_duration_s = 12.8e-6;  // samples cover the whole ramp, no idle time
    p.if_bandwidth_hz = 2.1e6;    // band edge falls between sample instants
    InterfererSpec f;
    f.chirp_slope_hz_per_s = p.chirp_slope_hz_per_s + 4e12;  // dk = 4e12
    // put the crossing in the middle of ramp 0
    const double tau_c = 64.0 / p.sample_rate_hz;
    f.chirp_start_hz = p.chirp_start_hz + p.chirp_slope_hz_per_s * tau_c -
                       f.chirp_slope_hz_per_s * tau_c;
    const IFMatrix s = interference_component(f, p);
    // analytic support within ramp 0: |dk (tau - tau_c)| <= B
    const double dk = 4e12;
    const double B = p.if_bandwidth_hz;
    std::size_t expected = 0;
    std::vector<bool> expected_mask(p.n_fast, false);
    for (std::size_t n = 0; n < p.n_fast; ++n) {
        const double tau = static_cast<double>(n) / p.sample_rate_hz;
        if (std::abs(dk * (tau - tau_c)) <= B) {
            expected_mask[n] = true;
            ++expected;
        }
    }
    // approximately round(2B/|dk| * fs) samples
    EXPECT_NEAR(static_cast<double>(expected), 2.0 * B / dk * p.sample_rate_hz, 1.0);
    std::size_t got = 0;
    bool contiguous = true;
    long first = -1, last = -1;
    for (std::size_t n = 0; n < p.n_fast; ++n) {
        const bool on = s.data.at(n, 0) != cplx(0.0, 0.0);
        EXPECT_EQ(on, expected_mask[n]) << "sample " << n;
        if (on) {
            if (first < 0) first = static_cast<long>(n);
            last = static_cast<long>(n);
            ++got;
        }
    }
    if (first >= 0) contiguous = (last - first + 1 == static_cast<long>(got));
    EXPECT_TRUE(contiguous);
    EXPECT_EQ(got, expected);
    // amplitude scales linearly on identical support
    InterfererSpec f2 = f;
    f2.amplitude = 2.0;
    const IFMatrix s2 = interference_component(f2, p);
    for (std::size_t i = 0; i < s.data.size(); ++i)
        EXPECT_NEAR(std::abs(s2.data.data[i] - 2.0 * s.data.data[i]), 0.0, 1e-12);
}

TEST(SynthesizeIf, EmptySceneIsZero) {
    Scene scene;
    const auto [clean, interfered] = synthesize_if(scene, small_params());
    for (const cplx& z : clean.data.data) EXPECT_EQ(z, cplx(0.0, 0.0));
    for (const cplx& z : interfered.data.data) EXPECT_EQ(z, cplx(0.0, 0.0));
}

TEST(SynthesizeIf, NoInterferersMeansIdenticalOutputs) {
    Scene scene;
    scene.objects.push_back({0.1, 0.2, 1.0, 0.3});
    scene.objects.push_back({0.3, -0.1, 0.5, 1.0});
    scene.noise_std = 0.5;
    scene.rng_seed = 42;
    const auto [clean, interfered] = synthesize_if(scene, small_params());
    for (std::size_t i = 0; i < clean.data.size(); ++i)
        EXPECT_EQ(clean.data.data[i], interfered.data.data[i]);
}

TEST(SynthesizeIf, DecomposesIntoComponents) {
    const RadarParams p = small_params(16, 16);
    Scene scene;
    scene.objects.push_back({0.2, 0.1, 1.5, 0.4});
    InterfererSpec f;
    f.chirp_slope_hz_per_s = -p.chirp_slope_hz_per_s;
    f.chirp_start_hz = p.chirp_start_hz;
    f.amplitude = 3.0;
    scene.interferers.push_back(f);
    const auto [clean, interfered] = synthesize_if(scene, p);
    const IFMatrix obj = object_component(scene.objects[0], p);
    const IFMatrix intf = interference_component(f, p);
    for (std::size_t i = 0; i < clean.data.size(); ++i) {
        EXPECT_NEAR(std::abs(clean.data.data[i] - obj.data.data[i]), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(interfered.data.data[i] - (obj.data.data[i] + intf.data.data[i])),
                    0.0, 1e-12);
    }
    // interfered - clean equals the interference sum exactly
    for (std::size_t i = 0; i < clean.data.size(); ++i)
        EXPECT_EQ(interfered.data.data[i] - clean.data.data[i], intf.data.data[i]);
}

TEST(SynthesizeIf, RecompositionLinearity) {
    // objects A union B with one shared noise draw == components recomposed
    const RadarParams p = small_params(16, 16);
    Scene ab;
    ab.objects.push_back({0.1, 0.05, 1.0, 0.0});
    ab.objects.push_back({0.3, -0.2, 0.7, 1.1});
    ab.noise_std = 0.25;
    ab.rng_seed = 99;
    const auto [clean_ab, interfered_ab] = synthesize_if(ab, p);
    Scene noise_only;
    noise_only.noise_std = 0.25;
    noise_only.rng_seed = 99;
    const auto [noise_frame, unused] = synthesize_if(noise_only, p);
    (void)unused;
    const IFMatrix a = object_component(ab.objects[0], p);
    const IFMatrix b = object_component(ab.objects[1], p);
    for (std::size_t i = 0; i < clean_ab.data.size(); ++i) {
        const cplx want = a.data.data[i] + b.data.data[i] + noise_frame.data.data[i];
        EXPECT_NEAR(std::abs(clean_ab.data.data[i] - want), 0.0, 1e-12);
    }
    (void)interfered_ab;
}

TEST(RangeDopplerMap, ConstantInputConcentratesAtDcBin) {
    IFMatrix s;
    s.params = small_params(8, 8);
    s.data = CMat(8, 8);
    for (cplx& z : s.data.data) z = cplx(1.0, 0.0);
    const RDMap rd = range_doppler_map(s);
    for (std::size_t n = 0; n < 8; ++n)
        for (std::size_t m = 0; m < 8; ++m) {
            const cplx want = (n == 0 && m == 4) ? cplx(64.0, 0.0) : cplx(0.0, 0.0);
            EXPECT_NEAR(std::abs(rd.data.at(n, m) - want), 0.0, 1e-9);
        }
}

TEST(RangeDopplerMap, MatchesNaiveDftOracle) {
    Rng rng(17);
    IFMatrix s;
    s.params = small_params(16, 16);
    s.data = CMat(16, 16);
    for (cplx& z : s.data.data) z = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const RDMap rd = range_doppler_map(s);
    const CMat want = testutil::naive_dft2(s.data, true);
    for (std::size_t i = 0; i < rd.data.size(); ++i) {
        const double scale = std::max(1.0, std::abs(want.data[i]));
        EXPECT_NEAR(std::abs(rd.data.data[i] - want.data[i]) / scale, 0.0, 1e-10);
    }
    // Parseval
    EXPECT_NEAR(energy(rd.data) / (256.0 * energy(s.data)), 1.0, 1e-10);
}

TEST(CropAndStandardize, ConstantMapIsDegenerate) {
    RDMap a, b;
    a.data = CMat(8, 8);
    b.data = CMat(8, 8);
    for (cplx& z : a.data.data) z = cplx(3.0, -1.0);
    for (cplx& z : b.data.data) z = cplx(3.0, -1.0);
    EXPECT_THROW(crop_and_standardize(a, b, 8, 8), numeric_error);
}

TEST(CropAndStandardize, WhiteMapIsFixedPoint) {
    // alternating +1/-1 real values: zero mean, pooled variance 1/... build
    // explicitly so mean 0 and pooled var 1
    RDMap a;
    a.data = CMat(4, 4);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double re = (i % 2 == 0) ? 1.0 : -1.0;
        const double im = (i % 4 < 2) ? 1.0 : -1.0;
        a.data.data[i] = cplx(re, im);
    }
    RDMap b = a;
    const SamplePair pair = crop_and_standardize(a, b, 4, 4);
    EXPECT_NEAR(pair.interfered.scale, 1.0, 1e-12);
    EXPECT_NEAR(std::abs(pair.interfered.mean), 0.0, 1e-12);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        EXPECT_NEAR(std::abs(pair.interfered.data.data[i] - a.data.data[i]), 0.0, 1e-12);
}

TEST(CropAndStandardize, OutputStatisticsAreWhite) {
    Rng rng(23);
    RDMap a, b;
    a.data = CMat(128, 128);
    b.data = CMat(128, 128);
    for (cplx& z : a.data.data) z = cplx(rng.uniform(-2, 5), rng.uniform(-1, 3));
    for (cplx& z : b.data.data) z = cplx(rng.uniform(-2, 5), rng.uniform(-1, 3));
    const SamplePair pair = crop_and_standardize(a, b, 96, 96);
    EXPECT_EQ(pair.interfered.data.rows, 96u);
    EXPECT_EQ(pair.interfered.data.cols, 96u);
    const auto st = compute_stats(pair.interfered.data);
    EXPECT_LT(std::abs(st.mean), 1e-12);
    double pooled = 0.0;
    for (const cplx& z : pair.interfered.data.data) pooled += std::norm(z);
    pooled /= 2.0 * static_cast<double>(pair.interfered.data.size());
    EXPECT_NEAR(pooled, 1.0, 1e-9);
    // shared statistics with the target
    EXPECT_EQ(pair.clean.mean, pair.interfered.mean);
    EXPECT_EQ(pair.clean.scale, pair.interfered.scale);
}

TEST(CropAndStandardize, StandardizationInvertsExactly) {
    Rng rng(31);
    RDMap a, b;
    a.data = CMat(32, 32);
    b.data = CMat(32, 32);
    for (cplx& z : a.data.data) z = cplx(rng.uniform(-4, 4), rng.uniform(-4, 4));
    for (cplx& z : b.data.data) z = cplx(rng.uniform(-4, 4), rng.uniform(-4, 4));
    const SamplePair pair = crop_and_standardize(a, b, 24, 24);
    const RDMap back = unstandardize(pair.clean);
    const RDMap cropped_b = crop(b, 24, 24);
    for (std::size_t i = 0; i < back.data.size(); ++i) {
        const double scale = std::max(1.0, std::abs(cropped_b.data.data[i]));
        EXPECT_NEAR(std::abs(back.data.data[i] - cropped_b.data.data[i]) / scale, 0.0, 1e-12);
    }
}

TEST(CropAndStandardize, CropWindowAnchorsRangeAndCentersDoppler) {
    RDMap a, b;
    a.data = CMat(8, 8);
    b.data = CMat(8, 8);
    for (std::size_t n = 0; n < 8; ++n)
        for (std::size_t m = 0; m < 8; ++m) {
            a.data.at(n, m) = cplx(static_cast<double>(n), static_cast<double>(m));
            b.data.at(n, m) = a.data.at(n, m);
        }
    const RDMap c = crop(a, 4, 4);
    for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t m = 0; m < 4; ++m)
            EXPECT_EQ(c.data.at(n, m), cplx(static_cast<double>(n), static_cast<double>(m + 2)));
}
