#include "mtfest/edge_mtf.hpp"
#include "mtfest/error.hpp"
#include "mtfest/gaussian_mtf.hpp"
#include "mtfest/kernel_lab.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace mtfest;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFwhmFactor = 2.3548200450309493;

double phi(double x) { return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

Rect whole(const GrayImage& img) { return {0, 0, img.width(), img.height()}; }

double edge_fwhm(double sigma, int size = 96, int oversample = 4) {
    const GrayImage img = slanted_edge_image(size, size, 5.0, sigma, 100.0, 900.0);
    return lsf_from_edge(extract_edge_profile(img, whole(img), oversample)).fwhm;
}

} // namespace

TEST(ExtractEdgeProfile, UniformSpacingAndRisingOrientation) {
    for (double angle : {5.0, -7.0, 185.0}) {
        const GrayImage img = slanted_edge_image(64, 64, angle, 1.5, 10.0, 90.0);
        const EdgeProfile p = extract_edge_profile(img, whole(img), 4);
        ASSERT_GT(p.samples.size(), 100u);
        for (std::size_t i = 1; i < p.samples.size(); ++i) {
            ASSERT_NEAR(p.samples[i].d - p.samples[i - 1].d, 0.25, 1e-12);
        }
        EXPECT_LT(p.samples.front().v, 20.0) << angle;
        EXPECT_GT(p.samples.back().v, 80.0) << angle;
        EXPECT_NEAR(p.angle_deg, 5.0 + (angle < 0 ? 2.0 : 0.0), 0.2);
    }
}

TEST(ExtractEdgeProfile, NearHorizontalEdge) {
    const GrayImage img = slanted_edge_image(80, 64, 84.0, 1.5, 10.0, 90.0);
    const EdgeProfile p = extract_edge_profile(img, whole(img), 4);
    EXPECT_NEAR(p.angle_deg, 6.0, 0.2);
    EXPECT_NEAR(lsf_from_edge(p).fwhm, kFwhmFactor * 1.5, 0.05 * kFwhmFactor * 1.5);
}

TEST(ExtractEdgeProfile, IdealStepTransitionsWithinOneBin) {
    const GrayImage img = slanted_edge_image(64, 64, 5.0, 0.0, 0.0, 100.0);
    const EdgeProfile p = extract_edge_profile(img, whole(img), 4);
    // 10-90% rise: last sample at or below 10 to first sample at or above 90.
    double last_low = -1e9;
    double first_high = 1e9;
    for (const auto& s : p.samples) {
        if (s.v <= 10.0) {
            last_low = s.d;
        }
        if (s.v >= 90.0 && first_high == 1e9) {
            first_high = s.d;
        }
    }
    EXPECT_LE(first_high - last_low, 0.25 + 1e-12);
}

TEST(ExtractEdgeProfile, ErfEdgeMatchesGaussianCumulative) {
    const double sigma = 1.5;
    const GrayImage img = slanted_edge_image(64, 64, 5.0, sigma, 0.0, 100.0);
    const EdgeProfile p = extract_edge_profile(img, whole(img), 4);
    for (const auto& s : p.samples) {
        if (std::abs(s.d) < 20.0) {
            EXPECT_NEAR(s.v, 100.0 * phi(s.d / sigma), 2.0) << s.d;
        }
    }
}

TEST(ExtractEdgeProfile, BruteForceBlurredStepMatchesGaussianCumulative) {
    // Hard step sampled 8x finer, blurred there, then block-averaged to pixels.
    const int n = 64;
    const int s = 8;
    const double sigma = 1.5;
    const GrayImage fine = slanted_edge_image(n * s, n * s, 5.0, 0.0, 0.0, 100.0);
    const GrayImage img = bin_image(gaussian_blur(fine, sigma * s, sigma * s), s);
    const EdgeProfile p = extract_edge_profile(img, {4, 4, n - 8, n - 8}, 4);
    // The pixel footprint adds a unit box across the edge.
    const double eff = std::sqrt(sigma * sigma + 1.0 / 12.0);
    for (const auto& smp : p.samples) {
        if (std::abs(smp.d) < 15.0) {
            EXPECT_NEAR(smp.v, 100.0 * phi(smp.d / eff), 2.0) << smp.d;
        }
    }
}

TEST(ExtractEdgeProfile, Errors) {
    const GrayImage flat(64, 64, 5.0);
    EXPECT_EQ(code_of([&] { extract_edge_profile(flat, whole(flat)); }), ErrorCode::NoEdgeFound);

    const GrayImage aligned = slanted_edge_image(64, 64, 0.0, 1.5, 0.0, 100.0);
    EXPECT_EQ(code_of([&] { extract_edge_profile(aligned, whole(aligned)); }),
              ErrorCode::EdgeTooAligned);

    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    GrayImage noise(64, 64);
    for (double& v : noise.pixels()) {
        v = u(rng);
    }
    EXPECT_EQ(code_of([&] { extract_edge_profile(noise, whole(noise)); }),
              ErrorCode::NoEdgeFound);

    EXPECT_EQ(code_of([&] { extract_edge_profile(flat, {60, 0, 10, 10}); }),
              ErrorCode::OutOfBounds);
    EXPECT_EQ(code_of([&] { extract_edge_profile(aligned, whole(aligned), 0); }),
              ErrorCode::InvalidArgument);
}

TEST(LsfFromEdge, FwhmOfBlurredEdges) {
    EXPECT_NEAR(edge_fwhm(2.0), 4.7096, 0.03 * 4.7096);
    for (double sigma : {1.0, 2.0, 3.0, 4.0}) {
        const double expected = kFwhmFactor * sigma;
        EXPECT_NEAR(edge_fwhm(sigma, 128), expected, 0.03 * expected) << sigma;
    }
}

TEST(LsfFromEdge, PhysicalFwhm) {
    GrayImage img = slanted_edge_image(96, 96, 5.0, 1.62, 100.0, 900.0);
    img.set_pixel_size(0.262);
    const Lsf lsf = lsf_from_edge(extract_edge_profile(img, whole(img)));
    EXPECT_NEAR(lsf.fwhm, 3.82, 0.1);
    ASSERT_TRUE(lsf.fwhm_length());
    EXPECT_NEAR(*lsf.fwhm_length(), 1.00, 0.05);
    EXPECT_EQ(lsf.pixel_size, 0.262);
}

TEST(LsfFromEdge, IdealStepHitsDiscretizationFloor) {
    const GrayImage img = slanted_edge_image(64, 64, 5.0, 0.0, 0.0, 100.0);
    const Lsf lsf = lsf_from_edge(extract_edge_profile(img, whole(img), 4));
    EXPECT_LE(lsf.fwhm, 2.0 * 0.25);
}

TEST(LsfFromEdge, UnitAreaAndSmoothingRecorded) {
    const GrayImage img = slanted_edge_image(64, 64, 5.0, 1.5, 0.0, 100.0);
    const EdgeProfile p = extract_edge_profile(img, whole(img), 4);
    const Lsf plain = lsf_from_edge(p);
    double area = 0.0;
    for (const auto& s : plain.samples) {
        area += s.w * 0.25;
    }
    EXPECT_NEAR(area, 1.0, 1e-12);
    EXPECT_EQ(plain.smoothing, 0.0);

    const Lsf smooth = lsf_from_edge(p, 0.5);
    EXPECT_EQ(smooth.smoothing, 0.5);
    EXPECT_GT(smooth.fwhm, plain.fwhm);
    // Widths add in quadrature.
    EXPECT_NEAR(smooth.fwhm, kFwhmFactor * std::hypot(1.5, 0.5), 0.1);
}

TEST(LsfFromEdge, NoPeak) {
    EdgeProfile flat;
    for (int i = 0; i < 40; ++i) {
        flat.samples.push_back({i * 0.25, 3.0});
    }
    EXPECT_EQ(code_of([&] { lsf_from_edge(flat); }), ErrorCode::NoPeak);

    EdgeProfile falling;
    for (int i = 0; i < 40; ++i) {
        falling.samples.push_back({i * 0.25, 100.0 - i});
    }
    EXPECT_EQ(code_of([&] { lsf_from_edge(falling); }), ErrorCode::NoPeak);

    // The lobe must fall to half maximum on both sides.
    EdgeProfile ramp;
    for (int i = 0; i < 40; ++i) {
        ramp.samples.push_back({i * 0.25, i * i * 1.0});
    }
    EXPECT_EQ(code_of([&] { lsf_from_edge(ramp); }), ErrorCode::NoPeak);
}

TEST(MtfFromLsf, GaussianTransformPair) {
    const double sigma = 1.8;
    Lsf lsf;
    for (int i = -120; i < 120; ++i) {
        const double d = i * 0.25;
        lsf.samples.push_back({d, std::exp(-d * d / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * kPi))});
    }
    const MtfCurve c = mtf_from_lsf(lsf);
    EXPECT_EQ(c.provenance, MtfProvenance::EdgeDerived);
    EXPECT_EQ(c.samples.front().m, 1.0);
    EXPECT_NEAR(c.samples[1].k, 1.0 / (240 * 0.25), 1e-15);
    EXPECT_NEAR(c.samples.back().k, 2.0, 1e-12);
    const double half = std::sqrt(std::log(2.0) / (2 * kPi * kPi)) / sigma;
    for (const auto& s : c.samples) {
        if (s.k <= half) {
            EXPECT_NEAR(s.m, std::exp(-2 * kPi * kPi * sigma * sigma * s.k * s.k), 1e-2);
        }
    }
}

TEST(MtfFromLsf, ReflectionInvariant) {
    Lsf lsf;
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 33; ++i) {
        lsf.samples.push_back({i * 0.25, u(rng)});
    }
    Lsf mirrored = lsf;
    for (std::size_t i = 0; i < lsf.samples.size(); ++i) {
        mirrored.samples[i].w = lsf.samples[lsf.samples.size() - 1 - i].w;
    }
    const MtfCurve a = mtf_from_lsf(lsf);
    const MtfCurve b = mtf_from_lsf(mirrored);
    ASSERT_EQ(a.samples.size(), b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        EXPECT_NEAR(a.samples[i].m, b.samples[i].m, 1e-12);
    }
}

TEST(EdgeMethod, AgreesWithFourierEstimateOnHalfModulation) {
    const Kernel k = make_kernel(PsfSpec::gaussian(5.0), 4);
    const GrayImage texture = convolve_subpixel(binned_noise_texture(256, 256, 3), k);
    const GrayImage edge = convolve_subpixel(slanted_edge_image(96, 96, 5.0, 0.0, 1e4, 5e4, 8), k);
    const auto fourier = estimate_mtf(texture).curve.half_modulation_frequency();
    const auto edge_half =
        mtf_from_lsf(lsf_from_edge(extract_edge_profile(edge, {8, 8, 80, 80})))
            .half_modulation_frequency();
    ASSERT_TRUE(fourier);
    ASSERT_TRUE(edge_half);
    EXPECT_NEAR(*fourier / *edge_half, 1.0, 0.15);
}
