#include "mtfest/gaussian_mtf.hpp"

#include "mtfest/error.hpp"
#include "mtfest/linear_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace mtfest {

namespace {

constexpr double kPi = std::numbers::pi;

double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

struct ProfileColumns {
    std::vector<double> k2;
    std::vector<double> value;
    std::vector<double> weight;
};

ProfileColumns columns(const RadialProfile& p, std::size_t first, std::size_t last) {
    ProfileColumns c;
    for (std::size_t i = first; i <= last; ++i) {
        c.k2.push_back(p.bins[i].k2);
        c.value.push_back(p.bins[i].mean_log_power);
        c.weight.push_back(static_cast<double>(p.bins[i].count));
    }
    return c;
}

// Weighted residual sum of squares of y = a + b x + c max(0, x - knot); the
// third coefficient is returned through `bend`.
double hinge_sse(const ProfileColumns& c, double knot, double& bend) {
    std::array<std::array<double, 4>, 3> m{};
    for (std::size_t i = 0; i < c.k2.size(); ++i) {
        const std::array<double, 3> row{1.0, c.k2[i], std::max(0.0, c.k2[i] - knot)};
        for (int r = 0; r < 3; ++r) {
            for (int s = 0; s < 3; ++s) {
                m[r][s] += c.weight[i] * row[r] * row[s];
            }
            m[r][3] += c.weight[i] * row[r] * c.value[i];
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 normal equations.
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) {
                pivot = r;
            }
        }
        std::swap(m[col], m[pivot]);
        if (m[col][col] == 0.0) {
            bend = 0.0;
            return std::numeric_limits<double>::infinity();
        }
        for (int r = col + 1; r < 3; ++r) {
            const double f = m[r][col] / m[col][col];
            for (int s = col; s < 4; ++s) {
                m[r][s] -= f * m[col][s];
            }
        }
    }
    std::array<double, 3> coef{};
    for (int r = 2; r >= 0; --r) {
        double acc = m[r][3];
        for (int s = r + 1; s < 3; ++s) {
            acc -= m[r][s] * coef[s];
        }
        coef[r] = acc / m[r][r];
    }
    bend = coef[2];
    double sse = 0.0;
    for (std::size_t i = 0; i < c.k2.size(); ++i) {
        const double model = coef[0] + coef[1] * c.k2[i] + coef[2] * std::max(0.0, c.k2[i] - knot);
        sse += c.weight[i] * (c.value[i] - model) * (c.value[i] - model);
    }
    return sse;
}

std::size_t kink_last_bin(const RadialProfile& profile, const KinkOptions& opt) {
    const auto& bins = profile.bins;
    const std::size_t n = bins.size();

    const auto floor_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(opt.floor_fraction * static_cast<double>(n))));
    std::vector<double> floor_values;
    for (std::size_t i = n - floor_count; i < n; ++i) {
        floor_values.push_back(bins[i].mean_log_power);
    }
    const double floor = median(floor_values);
    std::vector<double> deviations;
    for (double v : floor_values) {
        deviations.push_back(std::abs(v - floor));
    }
    const double threshold = floor + opt.mad_multiplier * median(deviations);

    std::size_t bound = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (bins[i].mean_log_power <= threshold) {
            bound = i;
            break;
        }
    }
    if (bound < kMinFitBins) {
        throw Error(ErrorCode::NoLinearRegion,
                    "profile reaches its noise floor after " + std::to_string(bound) +
                        " bins; no linear region");
    }

    const ProfileColumns below = columns(profile, 0, bound - 1);
    const LineFit line = fit_line(below.k2, below.value, below.weight);

    if (bound < n) {
        // A floor that merely continues the line is no floor at all.
        const double scatter = std::sqrt(line.sse / line.sum_weights);
        double tail_sum = 0.0;
        double tail_weight = 0.0;
        for (std::size_t i = bound; i < n; ++i) {
            const double w = static_cast<double>(bins[i].count);
            tail_sum += w * (bins[i].mean_log_power - (line.slope * bins[i].k2 + line.intercept));
            tail_weight += w;
        }
        const double tail_offset = tail_sum / tail_weight;
        const double tolerance = 3.0 * scatter + 1e-9 * (1.0 + std::abs(line.intercept));
        if (std::abs(tail_offset) <= tolerance) {
            return n - 1;
        }
    }

    if (bound < kMinFitBins + 3 || line.sse <= 0.0) {
        return bound - 1;
    }
    double best_sse = std::numeric_limits<double>::infinity();
    std::size_t best_knot = 0;
    for (std::size_t b = kMinFitBins; b + 2 < bound; ++b) {
        double bend = 0.0;
        const double sse = hinge_sse(below, below.k2[b], bend);
        if (bend > 0.0 && sse < best_sse) {
            best_sse = sse;
            best_knot = b;
        }
    }
    if (best_knot == 0) {
        return bound - 1;
    }
    const double dof = static_cast<double>(bound) - 3.0;
    const double f_stat = best_sse > 0.0 ? (line.sse - best_sse) / (best_sse / dof)
                                         : std::numeric_limits<double>::infinity();
    return f_stat >= opt.hinge_min_f ? best_knot - 1 : bound - 1;
}

} // namespace

std::string_view to_string(FitStrategy s) noexcept {
    switch (s) {
    case FitStrategy::AiryLobeFraction: return "airy_lobe_fraction";
    case FitStrategy::KinkDetection: return "kink_detection";
    case FitStrategy::Explicit: return "explicit";
    }
    return "unknown";
}

FitRegion select_fit_region(const RadialProfile& profile, const RegionOptions& options) {
    const auto& bins = profile.bins;
    if (bins.size() < kMinProfileBins) {
        throw Error(ErrorCode::NoLinearRegion,
                    "profile has " + std::to_string(bins.size()) + " bins, need " +
                        std::to_string(kMinProfileBins));
    }

    FitRegion region;
    region.strategy = options.strategy;
    region.first_bin = 0;

    auto last_at_or_below = [&](double k2_max) {
        std::size_t last = 0;
        bool any = false;
        for (std::size_t i = 0; i < bins.size(); ++i) {
            if (bins[i].k2 <= k2_max) {
                last = i;
                any = true;
            }
        }
        return any ? last : bins.size();
    };

    switch (options.strategy) {
    case FitStrategy::AiryLobeFraction: {
        if (!options.hint || options.hint->kind != PsfSpec::Kind::CircularAperture) {
            throw Error(ErrorCode::MissingHint, "airy strategy needs an aperture radius");
        }
        if (!(options.lobe_fraction > 0.0 && options.lobe_fraction <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "lobe fraction must lie in (0, 1]");
        }
        const double k0 = options.hint->first_zero_frequency();
        region.k2_max = options.lobe_axis == LobeAxis::Frequency
                            ? (options.lobe_fraction * k0) * (options.lobe_fraction * k0)
                            : options.lobe_fraction * k0 * k0;
        region.k2_min = bins.front().k2;
        region.last_bin = last_at_or_below(region.k2_max);
        break;
    }
    case FitStrategy::KinkDetection: {
        region.last_bin = kink_last_bin(profile, options.kink);
        region.k2_min = bins.front().k2;
        region.k2_max = bins[region.last_bin].k2;
        break;
    }
    case FitStrategy::Explicit: {
        if (!(options.k2_min < options.k2_max) || options.k2_min < 0.0) {
            throw Error(ErrorCode::InvalidArgument, "explicit region needs 0 <= k2_min < k2_max");
        }
        region.k2_min = options.k2_min;
        region.k2_max = options.k2_max;
        const auto first = std::find_if(bins.begin(), bins.end(), [&](const ProfileBin& b) {
            return b.k2 >= options.k2_min;
        });
        region.first_bin = static_cast<std::size_t>(first - bins.begin());
        region.last_bin = last_at_or_below(options.k2_max);
        break;
    }
    }

    if (region.last_bin >= bins.size() || region.last_bin < region.first_bin ||
        region.bin_count() < kMinFitBins) {
        throw Error(ErrorCode::NoLinearRegion, "fit region holds fewer than " +
                                                   std::to_string(kMinFitBins) + " bins");
    }
    return region;
}

GaussianPsfEstimate fit_gaussian_psf(const RadialProfile& profile, const FitRegion& region,
                                     const FitOptions& options) {
    if (region.last_bin >= profile.bins.size() || region.last_bin < region.first_bin ||
        region.bin_count() < kMinFitBins) {
        throw Error(ErrorCode::InvalidArgument, "fit region does not match the profile");
    }
    ProfileColumns c = columns(profile, region.first_bin, region.last_bin);
    if (options.weighting == Weighting::Uniform) {
        std::fill(c.weight.begin(), c.weight.end(), 1.0);
    }
    const LineFit line = fit_line(c.k2, c.value, c.weight);
    if (!(line.slope < 0.0)) {
        throw Error(ErrorCode::NonNegativeSlope,
                    "fitted slope " + std::to_string(line.slope) + " shows no blur");
    }

    GaussianPsfEstimate est;
    est.slope = line.slope;
    est.intercept = line.intercept;
    est.r2 = line.r2;
    est.region = region;
    est.sigma = std::sqrt(-line.slope) / (2.0 * kPi);
    est.fwhm = kFwhmPerSigma * est.sigma;
    est.sigma_band = {std::sqrt(1.0 - options.band_fraction) * est.sigma,
                      std::sqrt(1.0 + options.band_fraction) * est.sigma};
    if (line.r2 < options.min_r2) {
        if (!options.allow_poor_fit) {
            throw Error(ErrorCode::PoorFit, "r2 " + std::to_string(line.r2) + " below " +
                                                std::to_string(options.min_r2));
        }
        est.poor_fit = true;
    }
    return est;
}

MtfCurve mtf_from_sigma(double sigma, std::span<const double> freqs,
                        std::optional<std::pair<double, double>> sigma_band) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
    }
    auto gaussian = [](double s, double k) { return std::exp(-2.0 * kPi * kPi * s * s * k * k); };
    MtfCurve curve;
    curve.provenance = MtfProvenance::EstimatedGaussian;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (freqs[i] < 0.0 || (i > 0 && !(freqs[i] > freqs[i - 1]))) {
            throw Error(ErrorCode::InvalidArgument, "frequencies must be ascending and >= 0");
        }
        curve.samples.push_back({freqs[i], gaussian(sigma, freqs[i])});
        if (sigma_band) {
            curve.band.push_back(
                {gaussian(sigma_band->second, freqs[i]), gaussian(sigma_band->first, freqs[i])});
        }
    }
    return curve;
}

MtfReport estimate_mtf(const GrayImage& img, const EstimateOptions& options) {
    const GrayImage work = options.roi ? clip_roi(img, *options.roi) : img;
    if (work.width() < kMinEstimateSize || work.height() < kMinEstimateSize) {
        throw Error(ErrorCode::ImageTooSmall,
                    "estimation needs >= 64x64 pixels, got " + std::to_string(work.width()) +
                        "x" + std::to_string(work.height()));
    }
    const int margin = options.margin.value_or(default_margin(work.width(), work.height()));
    const LogPowerSpectrum spec =
        log_power_spectrum(prepare_for_fft(work, options.ramp, margin));

    MtfReport report;
    report.transform_width = spec.width;
    report.transform_height = spec.height;
    report.pixel_size = work.pixel_size();
    report.profile = options.sector
                         ? sector_profile(spec, options.sector->center_angle,
                                          options.sector->half_width, options.bin_width)
                         : radial_profile(spec, options.bin_width);
    const FitRegion region = select_fit_region(report.profile, options.region);
    report.estimate = fit_gaussian_psf(report.profile, region, options.fit);
    const std::vector<double> freqs =
        options.freqs.empty() ? frequency_grid(0.5, 101) : options.freqs;
    report.curve = mtf_from_sigma(report.estimate.sigma, freqs, report.estimate.sigma_band);
    return report;
}

} // namespace mtfest
