#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace mtfest {

enum class MtfProvenance { EstimatedGaussian, PredictedKernel, EdgeDerived };

std::string_view to_string(MtfProvenance p) noexcept;

struct MtfSample {
    double k = 0.0; // cycles/pixel, or cycles/length after to_physical()
    double m = 0.0;
};

struct MtfBand {
    double low = 0.0;
    double high = 0.0;
};

/// Sampled modulation transfer curve, ordered by ascending k. band is either
/// empty or parallel to samples.
struct MtfCurve {
    std::vector<MtfSample> samples;
    MtfProvenance provenance = MtfProvenance::EstimatedGaussian;
    std::vector<MtfBand> band;

    /// Linear interpolation; clamps to the end samples outside the range.
    double at(double k) const;

    /// First frequency where the curve falls to 0.5, linearly interpolated.
    std::optional<double> half_modulation_frequency() const;
};

/// Rescales the frequency axis from cycles/pixel to cycles/length.
MtfCurve to_physical(const MtfCurve& curve, double pixel_size);

/// Max |a(k) - b(k)| over a's samples with k in [k_lo, k_hi]; b interpolated.
double max_abs_difference(const MtfCurve& a, const MtfCurve& b, double k_lo, double k_hi);

/// n evenly spaced frequencies from 0 to k_max inclusive.
std::vector<double> frequency_grid(double k_max, std::size_t n);

} // namespace mtfest
