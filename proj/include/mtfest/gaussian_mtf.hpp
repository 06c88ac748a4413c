#pragma once

#include "mtfest/image.hpp"
#include "mtfest/kernel_lab.hpp"
#include "mtfest/mtf_curve.hpp"
#include "mtfest/spectrum.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace mtfest {

enum class FitStrategy { AiryLobeFraction, KinkDetection, Explicit };

std::string_view to_string(FitStrategy s) noexcept;

/// Which axis the airy lobe fraction is applied on.
enum class LobeAxis {
    Frequency,        // k2_max = (fraction * k0)^2
    SquaredFrequency, // k2_max = fraction * k0^2
};

/// Kink detector. The noise floor is the median of the top floor_fraction of
/// bins; the first bin at or below floor + mad_multiplier * MAD bounds the
/// search. If the bins past that bound still follow the line fitted below
/// it, there is no floor and every bin is kept. Otherwise a continuous
/// two-segment fit below the bound places the kink where the slope breaks,
/// provided the break is significant (F statistic >= hinge_min_f).
struct KinkOptions {
    double floor_fraction = 0.2;
    double mad_multiplier = 3.0;
    double hinge_min_f = 10.0;
};

struct RegionOptions {
    FitStrategy strategy = FitStrategy::KinkDetection;
    std::optional<PsfSpec> hint; // aperture radius for AiryLobeFraction
    double lobe_fraction = 0.8;
    LobeAxis lobe_axis = LobeAxis::Frequency;
    double k2_min = 0.0; // Explicit bounds, (cycles/pixel)^2
    double k2_max = 0.0;
    KinkOptions kink;
};

/// Resolved fit window; bins [first_bin, last_bin] of the profile it was
/// selected on.
struct FitRegion {
    FitStrategy strategy = FitStrategy::KinkDetection;
    double k2_min = 0.0;
    double k2_max = 0.0;
    std::size_t first_bin = 0;
    std::size_t last_bin = 0;

    std::size_t bin_count() const noexcept { return last_bin - first_bin + 1; }
    bool contains(std::size_t bin) const noexcept { return bin >= first_bin && bin <= last_bin; }
};

inline constexpr std::size_t kMinFitBins = 5;
inline constexpr std::size_t kMinProfileBins = 10;

FitRegion select_fit_region(const RadialProfile& profile, const RegionOptions& options = {});

enum class Weighting { SampleCount, Uniform };

struct FitOptions {
    Weighting weighting = Weighting::SampleCount;
    double min_r2 = 0.9;
    bool allow_poor_fit = false; // keep the estimate and flag it instead of throwing PoorFit
    double band_fraction = 0.1;  // +-10% on the slope magnitude
};

struct GaussianPsfEstimate {
    double sigma = 0.0; // pixels
    double fwhm = 0.0;  // pixels
    double slope = 0.0; // per (cycles/pixel)^2
    double intercept = 0.0;
    double r2 = 0.0;
    FitRegion region;
    std::pair<double, double> sigma_band{0.0, 0.0}; // (low, high)
    bool poor_fit = false;
};

/// Least squares of mean_log_power against k2 over the region, then
/// sigma = sqrt(-slope) / (2 pi).
GaussianPsfEstimate fit_gaussian_psf(const RadialProfile& profile, const FitRegion& region,
                                     const FitOptions& options = {});

/// m(k) = exp(-2 pi^2 sigma^2 k^2). When sigma_band is given the band holds
/// the curves of the high and low sigma respectively.
MtfCurve mtf_from_sigma(double sigma, std::span<const double> freqs,
                        std::optional<std::pair<double, double>> sigma_band = std::nullopt);

struct Sector {
    double center_angle = 0.0; // radians
    double half_width = 0.0;   // radians
};

struct EstimateOptions {
    std::optional<Rect> roi;
    RegionOptions region;
    int bin_width = 5;
    int ramp = 16;
    std::optional<int> margin; // default_margin() when unset
    std::optional<Sector> sector;
    FitOptions fit;
    std::vector<double> freqs; // cycles/pixel; 0..0.5 in 101 steps when empty
};

inline constexpr int kMinEstimateSize = 64;

struct MtfReport {
    GaussianPsfEstimate estimate;
    MtfCurve curve;
    RadialProfile profile;
    int transform_width = 0;
    int transform_height = 0;
    std::optional<double> pixel_size;
};

/// clip -> prepare -> spectrum -> radial/sector profile -> region -> fit -> MTF.
MtfReport estimate_mtf(const GrayImage& img, const EstimateOptions& options = {});

} // namespace mtfest
