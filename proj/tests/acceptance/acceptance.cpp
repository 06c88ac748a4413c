// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include "mtfest/edge_mtf.hpp"
#include "mtfest/error.hpp"
#include "mtfest/gaussian_mtf.hpp"
#include "mtfest/image.hpp"
#include "mtfest/kernel_lab.hpp"
#include "mtfest/linear_fit.hpp"
#include "mtfest/mtf_curve.hpp"
#include "mtfest/spectrum.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mtfest;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBesselZero = 3.8317059702075125; // first zero of J1

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

GrayImage texture(int size, std::uint64_t seed) { return binned_noise_texture(size, size, seed); }

// Max |estimated - predicted| over [0, k_hi] for a texture blurred by `spec`.
struct RoundTrip {
    double max_diff = 0.0;
    double fwhm = 0.0;
};

RoundTrip round_trip(const PsfSpec& spec, const EstimateOptions& options, double k_hi) {
    const GrayImage img = convolve_subpixel(texture(512, 1), make_kernel(spec, 4));
    const MtfReport r = estimate_mtf(img, options);
    const auto grid = frequency_grid(k_hi, 201);
    const MtfCurve est = mtf_from_sigma(r.estimate.sigma, grid);
    const MtfCurve pred = predicted_mtf(spec, grid, 4);
    return {max_abs_difference(est, pred, 0.0, k_hi), r.estimate.fwhm};
}

Outcome criterion1() {
    const Clock clock;
    EstimateOptions o;
    o.region.strategy = FitStrategy::AiryLobeFraction;
    o.region.hint = PsfSpec::aperture(2.0);
    const double k0 = kBesselZero / (2.0 * kPi * 2.0);
    const RoundTrip rt = round_trip(PsfSpec::aperture(2.0), o, k0);
    const double t = clock.seconds();
    return {rt.max_diff <= 0.10 && t < 5.0,
            fmt("max |diff| %.4f over [0, %.4f] (limit 0.10), %.2f s (limit 5)", rt.max_diff, k0,
                t)};
}

Outcome criterion2() {
    EstimateOptions airy;
    airy.region.strategy = FitStrategy::AiryLobeFraction;
    airy.region.hint = PsfSpec::aperture(4.0);
    const double k0 = kBesselZero / (2.0 * kPi * 4.0);
    const RoundTrip a4 = round_trip(PsfSpec::aperture(4.0), airy, k0);
    const RoundTrip g6 = round_trip(PsfSpec::gaussian(6.0), {}, 0.5);
    const bool ok = a4.max_diff <= 0.10 && g6.max_diff <= 0.10 && g6.fwhm >= 5.4 && g6.fwhm <= 6.6;
    return {ok, fmt("aperture 4: max |diff| %.4f; gaussian 6: max |diff| %.4f, fwhm %.3f px",
                    a4.max_diff, g6.max_diff, g6.fwhm)};
}

Outcome criterion3() {
    const double sigma = 2.5480;
    const double slope = -4.0 * kPi * kPi * sigma * sigma;
    RadialProfile p;
    for (int b = 0; b < 60; ++b) {
        const double k = (b + 0.5) * 5.0 / 512.0;
        p.bins.push_back({k * k, slope * k * k + 12.5, static_cast<std::size_t>(30 + 31 * b)});
    }
    const GaussianPsfEstimate e = fit_gaussian_psf(p, select_fit_region(p));
    const double rel = std::abs(e.sigma / sigma - 1.0);
    const bool ok = rel <= 1e-9 && fmt("%.3f", e.fwhm) == "6.000";
    return {ok, fmt("sigma relative error %.2e, fwhm %.3f px", rel, e.fwhm)};
}

Outcome criterion4() {
    const Clock clock;
    GrayImage img = slanted_edge_image(128, 128, 5.0, 1.62, 1e4, 5e4);
    img.set_pixel_size(0.262);
    const Lsf lsf = lsf_from_edge(extract_edge_profile(img, {0, 0, 128, 128}));
    const double t = clock.seconds();
    const double um = lsf.fwhm_length().value_or(0.0);
    return {std::abs(um - 1.00) <= 0.05 && t < 1.0,
            fmt("LSF fwhm %.4f um (%.3f px), %.3f s (limit 1)", um, lsf.fwhm, t)};
}

Outcome criterion5() {
    // Texture in the upper part, pixel-integrated slanted step in the lower
    // part, one blur.
    const int size = 512;
    const int split = 320;
    GrayImage scene = texture(size, 7);
    const GrayImage step = slanted_edge_image(size, size - split, 5.0, 0.0, 1e4, 5e4, 8);
    for (int y = split; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            scene(x, y) = step(x, y - split);
        }
    }
    const GrayImage blurred = convolve_subpixel(scene, make_kernel(PsfSpec::gaussian(5.0), 4));

    EstimateOptions o;
    o.roi = Rect{0, 0, size, split - 16};
    const MtfReport fourier = estimate_mtf(blurred, o);
    const MtfCurve edge = mtf_from_lsf(
        lsf_from_edge(extract_edge_profile(blurred, {size / 2 - 80, split + 16, 160, 160})));
    const auto half = edge.half_modulation_frequency();
    if (!half) {
        return {false, "edge MTF never reaches 0.5"};
    }
    double worst = 0.0;
    for (const auto& s : edge.samples) {
        if (s.k < *half) {
            const double m = std::exp(-2.0 * kPi * kPi * fourier.estimate.sigma *
                                      fourier.estimate.sigma * s.k * s.k);
            worst = std::max(worst, std::abs(m - s.m));
        }
    }
    return {worst <= 0.10, fmt("max |fourier - edge| %.4f below k = %.4f (limit 0.10)", worst,
                               *half)};
}

Outcome criterion6() {
    const std::vector<double> pitches{2.0, 1.6, 1.2, 1.0, 0.8, 0.6};
    // Intervals at zero: the clean pattern has modulation 1.
    const BarPattern pattern = square_wave_pattern(pitches, 0.262, 40000.0);
    const GrayImage img = gaussian_blur(pattern.image, 1.62, 1.62);
    bool ok = true;
    std::ostringstream detail;
    for (const BarBand& band : pattern.bands) {
        // Interior only: clear of the band borders and the image sides.
        const Rect inner{band.rect.x0 + 8, band.rect.y0 + 8, band.rect.w - 16, band.rect.h - 16};
        const double c = pattern_contrast(img, inner, band.pitch_px);
        if (band.pitch >= 1.0 - 1e-9) {
            ok = ok && c >= 0.1;
        } else if (band.pitch <= 0.6 + 1e-9) {
            ok = ok && c < 0.1;
        }
        detail << fmt("%.1f:%.4f ", band.pitch, c);
    }
    detail << "(pitch um:contrast; need >= 0.1 down to 1.0, < 0.1 at 0.6)";
    return {ok, detail.str()};
}

bool raises_no_linear_region(const GrayImage& img) {
    try {
        estimate_mtf(img);
    } catch (const Error& e) {
        return e.code() == ErrorCode::NoLinearRegion;
    }
    return false;
}

Outcome criterion7() {
    std::vector<std::string> failed;
    const auto check = [&](bool ok, const char* name) {
        if (!ok) {
            failed.emplace_back(name);
        }
    };

    const GrayImage base = convolve_subpixel(texture(256, 2), make_kernel(PsfSpec::gaussian(4.0), 4));
    {
        GrayImage scaled = base;
        for (double& v : scaled.pixels()) {
            v *= 2.75;
        }
        const double a = estimate_mtf(base).estimate.sigma;
        const double b = estimate_mtf(scaled).estimate.sigma;
        check(std::abs(a - b) <= 1e-9 * a, "scale invariance");
    }
    {
        const LogPowerSpectrum spec = log_power_spectrum(base);
        double spectral = 0.0;
        for (double v : spec.values) {
            spectral += std::exp(v);
        }
        double spatial = 0.0;
        for (double v : base.pixels()) {
            spatial += v * v;
        }
        spatial *= static_cast<double>(base.width()) * base.height();
        check(std::abs(spectral / spatial - 1.0) <= 1e-9, "Parseval");
    }
    for (const PsfSpec& spec : {PsfSpec::aperture(2.0), PsfSpec::aperture(4.0),
                                PsfSpec::gaussian(6.0)}) {
        double sum = 0.0;
        for (double t : make_kernel(spec, 4).taps()) {
            sum += t;
        }
        check(std::abs(sum - 1.0) <= 1e-9, "kernel normalization");
    }
    {
        const Kernel k = make_kernel(PsfSpec::aperture(2.0), 4);
        const GrayImage f = texture(96, 11);
        const GrayImage g = texture(96, 12);
        GrayImage mix(96, 96);
        for (std::size_t i = 0; i < mix.pixels().size(); ++i) {
            mix.pixels()[i] = 0.3 * f.pixels()[i] + 1.7 * g.pixels()[i];
        }
        const GrayImage lhs = convolve_subpixel(mix, k);
        const GrayImage cf = convolve_subpixel(f, k);
        const GrayImage cg = convolve_subpixel(g, k);
        double worst = 0.0;
        for (std::size_t i = 0; i < lhs.pixels().size(); ++i) {
            const double rhs = 0.3 * cf.pixels()[i] + 1.7 * cg.pixels()[i];
            worst = std::max(worst, std::abs(lhs.pixels()[i] - rhs) / std::abs(rhs));
        }
        check(worst <= 1e-9, "convolution linearity");
    }
    {
        std::vector<double> slopes;
        for (std::uint64_t seed = 0; seed < 24; ++seed) {
            std::mt19937_64 rng(1000 + seed);
            std::normal_distribution<double> n(500.0, 40.0);
            GrayImage img(128, 128);
            for (double& v : img.pixels()) {
                v = n(rng);
            }
            const RadialProfile p = radial_profile(log_power_spectrum(img));
            std::vector<double> x, y, w;
            for (const auto& b : p.bins) {
                x.push_back(b.k2);
                y.push_back(b.mean_log_power);
                w.push_back(static_cast<double>(b.count));
            }
            slopes.push_back(fit_line(x, y, w).slope);
        }
        double mean = 0.0;
        for (double s : slopes) {
            mean += s / static_cast<double>(slopes.size());
        }
        double var = 0.0;
        for (double s : slopes) {
            var += (s - mean) * (s - mean) / static_cast<double>(slopes.size() - 1);
        }
        check(std::abs(mean) <= 3.0 * std::sqrt(var / static_cast<double>(slopes.size())),
              "white-noise flatness");
    }
    {
        double previous = 0.0;
        bool monotone = true;
        for (double fwhm : {2.0, 4.0, 6.0, 8.0}) {
            const GrayImage img =
                convolve_subpixel(texture(256, 3), make_kernel(PsfSpec::gaussian(fwhm), 4));
            const double s = estimate_mtf(img).estimate.sigma;
            monotone = monotone && s > previous;
            previous = s;
        }
        check(monotone, "blur monotonicity");
    }
    {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n(1000.0, 30.0);
        GrayImage noise(256, 256);
        for (double& v : noise.pixels()) {
            v = n(rng);
        }
        check(raises_no_linear_region(noise), "pure noise NoLinearRegion");

        GrayImage sparse(256, 256, 100.0);
        sparse(40, 50) = 5000.0;
        sparse(180, 90) = 5000.0;
        sparse(120, 200) = 5000.0;
        check(raises_no_linear_region(sparse), "sparse NoLinearRegion");
    }

    std::string detail = failed.empty() ? "all 7 properties hold" : "failed:";
    for (const auto& f : failed) {
        detail += " " + f + ";";
    }
    return {failed.empty(), detail};
}

Outcome criterion8() {
    const GrayImage img = gaussian_blur(texture(512, 4), 3.0, 1.0);
    const auto sector_sigma = [&](double angle) {
        EstimateOptions o;
        o.sector = Sector{angle, kPi / 24.0};
        return estimate_mtf(img, o).estimate.sigma;
    };
    const double sx = sector_sigma(0.0);
    const double sy = sector_sigma(kPi / 2.0);
    const bool ok = std::abs(sx / 3.0 - 1.0) <= 0.10 && std::abs(sy / 1.0 - 1.0) <= 0.10;
    return {ok, fmt("sigma along x %.3f (target 3), along y %.3f (target 1)", sx, sy)};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"aperture r=2 round trip", criterion1},
        {"aperture r=4 and gaussian fwhm 6 round trip", criterion2},
        {"exact-profile oracle", criterion3},
        {"edge LSF fwhm", criterion4},
        {"fourier vs edge consistency", criterion5},
        {"square-wave resolvability", criterion6},
        {"property suite", criterion7},
        {"anisotropic sector estimate", criterion8},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s  %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
