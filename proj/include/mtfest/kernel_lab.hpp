#pragma once

#include "mtfest/image.hpp"
#include "mtfest/mtf_curve.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mtfest {

/// FWHM = 2 sqrt(2 ln 2) sigma for a Gaussian.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

/// First positive zero of the Bessel function J1.
inline constexpr double kBesselJ1FirstZero = 3.8317059702075125;

/// Reference point spread function. size is the aperture radius for
/// CircularAperture and the FWHM for Gaussian, both in pixels.
struct PsfSpec {
    enum class Kind { CircularAperture, Gaussian };

    Kind kind = Kind::Gaussian;
    double size = 1.0;

    static PsfSpec aperture(double radius) { return {Kind::CircularAperture, radius}; }
    static PsfSpec gaussian(double fwhm) { return {Kind::Gaussian, fwhm}; }

    double sigma() const { return size / kFwhmPerSigma; }

    /// First zero of the aperture transform, 0.6098/a cycles/pixel.
    double first_zero_frequency() const;

    friend bool operator==(const PsfSpec&, const PsfSpec&) = default;
};

/// Parses "aperture:R" / "gaussian:FWHM" (also "airy:R"). Throws InvalidSpec.
PsfSpec parse_psf_spec(std::string_view text);

/// Centrosymmetric PSF rasterized on a grid with `subdiv` samples per pixel.
/// Taps are stored row-major over offsets [-half_extent, half_extent]^2
/// sub-samples and sum to one.
class Kernel {
public:
    Kernel(int subdiv, int half_extent, std::vector<double> taps);

    /// Single unit tap.
    static Kernel delta(int subdiv = 1);

    int subdiv() const noexcept { return subdiv_; }
    int half_extent() const noexcept { return half_extent_; }
    int size() const noexcept { return 2 * half_extent_ + 1; }
    double support_radius() const noexcept {
        return static_cast<double>(half_extent_) / subdiv_;
    }

    /// Tap at sub-sample offset (qx, qy); zero outside the support.
    double tap(int qx, int qy) const noexcept;
    std::span<const double> taps() const noexcept { return taps_; }
    std::size_t nonzero_count() const noexcept;

private:
    int subdiv_;
    int half_extent_;
    std::vector<double> taps_;
};

/// Aperture: uniform disk, center-in-disk test per sub-sample. Gaussian:
/// sampled isotropic Gaussian truncated at 4 sigma per axis. Both normalized.
Kernel make_kernel(const PsfSpec& spec, int subdiv = 4);

/// Replicates every pixel onto the kernel's sub-sample grid, convolves with
/// clamp-to-edge extension, and box-averages back to the input grid.
GrayImage convolve_subpixel(const GrayImage& img, const Kernel& k);

/// Pixel-grid weights equivalent to convolve_subpixel with `k`, indexed by
/// input-minus-output offset in [-r, r]^2 with r = (size - 1) / 2.
std::vector<double> effective_pixel_kernel(const Kernel& k, int& radius);

/// Radially averaged |DTFT| of the rasterized kernel at the given
/// frequencies (cycles/pixel), normalized to 1 at k = 0.
MtfCurve kernel_mtf(const Kernel& k, std::span<const double> freqs);

/// Predicted MTF of `spec` as rasterized by make_kernel(spec, subdiv).
MtfCurve predicted_mtf(const PsfSpec& spec, std::span<const double> freqs, int subdiv = 4);

// --- synthetic targets ------------------------------------------------------

struct BarBand {
    Rect rect;
    double pitch = 0.0;    // physical length
    double pitch_px = 0.0; // pixels
};

struct BarPattern {
    GrayImage image;
    std::vector<BarBand> bands;
};

struct BarPatternLayout {
    int width = 160;       // pixels
    int band_height = 32;  // pixels
    double base = 0.0;     // intensity of the intervals
};

/// One horizontal band per pitch, stacked top to bottom, each a 50% duty
/// square wave along x (wells at base + depth). Pixels integrate the wave
/// over their footprint, so sub-resolution pitches alias.
BarPattern square_wave_pattern(std::span<const double> pitches, double pixel_size, double depth,
                               const BarPatternLayout& layout = {});

/// Michelson modulation (max - min) / (max + min) of the band's column
/// profile folded at `pitch_px`. Only whole periods are used.
double pattern_contrast(const GrayImage& img, const Rect& band, double pitch_px);

/// Uniform noise rendered at `oversample`x resolution and block-averaged
/// down, mimicking a binned busy photograph. Values lie in [0, amplitude].
GrayImage binned_noise_texture(int width, int height, std::uint64_t seed, int oversample = 4,
                               double amplitude = 60000.0);

/// Straight edge through the image center, rotated `angle_deg` from the
/// vertical. Pixel centers are sampled from low + (high - low) Phi(d / sigma);
/// sigma = 0 yields a hard step. With oversample > 1 each pixel is the mean of
/// an oversample x oversample grid of point samples instead, so a hard step
/// keeps its sub-pixel position the way a camera pixel would.
GrayImage slanted_edge_image(int width, int height, double angle_deg, double sigma_px,
                             double low, double high, int oversample = 1);

/// Separable sampled Gaussian blur (truncated at 4 sigma, clamp-to-edge).
/// A sigma of zero leaves that axis untouched.
GrayImage gaussian_blur(const GrayImage& img, double sigma_x, double sigma_y);

GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed);

} // namespace mtfest
