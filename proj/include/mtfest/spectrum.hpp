#pragma once

#include "mtfest/image.hpp"

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace mtfest {

/// ln|F(k)|^2 of an unnormalized forward 2-D DFT, row-major, DC at (0, 0).
/// Samples whose magnitude is at round-off level hold kZeroPower.
struct LogPowerSpectrum {
    static constexpr double kZeroPower = -std::numeric_limits<double>::infinity();

    int width = 0;
    int height = 0;
    std::vector<double> values;
    double freq_step_x = 0.0; // cycles/pixel per sample
    double freq_step_y = 0.0;

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(j) * width + i];
    }

    /// Signed frequency (cycles/pixel) of column i, row j after wrap-around.
    std::pair<double, double> frequency(int i, int j) const;
};

struct ProfileBin {
    double k2 = 0.0; // squared frequency at the annulus center, (cycles/pixel)^2
    double mean_log_power = 0.0;
    std::size_t count = 0;
};

/// The "logarithmic plot": mean ln|F|^2 per annulus against squared frequency.
struct RadialProfile {
    std::vector<ProfileBin> bins;
    int bin_width_px = 5;
};

/// Smallest n' >= n whose only prime factors are 2, 3 and 5.
int next_efficient_size(int n);

/// Margin that takes the larger dimension to the next power of two at or
/// above 1.25x its size.
int default_margin(int width, int height);

/// Blends a border band of ramp_width pixels linearly toward the image mean,
/// surrounds the result with `margin` pixels of the mean, then pads with the
/// mean up to an efficient transform size on each axis.
GrayImage prepare_for_fft(const GrayImage& img, int ramp_width, int margin);

/// Requires at least 16x16 pixels (ImageTooSmall otherwise).
LogPowerSpectrum log_power_spectrum(const GrayImage& img);

/// Annuli of bin_width_px spectral pixels around the origin. The spectral
/// pixel is 1 / max(width, height) cycles/pixel. DC and zero-power samples
/// never enter a bin; empty annuli are omitted.
RadialProfile radial_profile(const LogPowerSpectrum& spec, int bin_width_px = 5);

/// radial_profile restricted to frequency vectors within +-half_width of
/// center_angle, taken modulo pi. Throws EmptySector when nothing remains.
RadialProfile sector_profile(const LogPowerSpectrum& spec, double center_angle,
                             double half_width, int bin_width_px = 5);

} // namespace mtfest
