#pragma once

#include "mtfest/image.hpp"
#include "mtfest/mtf_curve.hpp"

#include <optional>
#include <vector>

namespace mtfest {

struct EdgeSample {
    double d = 0.0; // signed distance from the edge line, pixels
    double v = 0.0;
};

/// Edge spread profile, ascending d with uniform spacing 1/oversample,
/// oriented so that intensity rises with d.
struct EdgeProfile {
    std::vector<EdgeSample> samples;
    int oversample = 4;
    double angle_deg = 0.0; // slant of the edge from the nearest image axis
    std::optional<double> pixel_size;
};

struct LsfSample {
    double d = 0.0; // pixels
    double w = 0.0;
};

/// Line spread function with unit area (sum of w times spacing is 1).
struct Lsf {
    std::vector<LsfSample> samples;
    double fwhm = 0.0;      // pixels
    double smoothing = 0.0; // Gaussian sigma applied to the derivative, pixels; 0 = none
    std::optional<double> pixel_size;

    /// fwhm in physical units when the pixel size is known.
    std::optional<double> fwhm_length() const;
};

inline constexpr double kMinEdgeR2 = 0.95;
inline constexpr double kMinEdgeSlantDeg = 0.5;

/// Slanted-edge profile. The edge may run near either image axis; the line
/// is fitted to per-row (or per-column) centroids of the gradient magnitude.
EdgeProfile extract_edge_profile(const GrayImage& img, const Rect& roi, int oversample = 4);

/// Central difference of the profile, optionally smoothed by a Gaussian of
/// `smoothing` pixels. Throws NoPeak when no positive main lobe exists.
Lsf lsf_from_edge(const EdgeProfile& profile, std::optional<double> smoothing = std::nullopt);

/// |DFT| of the LSF normalized to 1 at k = 0, from 0 up to the Nyquist
/// frequency of the sample spacing, in cycles/pixel.
MtfCurve mtf_from_lsf(const Lsf& lsf);

} // namespace mtfest
