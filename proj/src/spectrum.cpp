#include "mtfest/spectrum.hpp"

#include "mtfest/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace mtfest {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Magnitudes below this fraction of the image's L1 norm are indistinguishable
// from transform round-off and are recorded as zero power.
constexpr double kZeroRelativeMagnitude = 1e-13;

int signed_index(int i, int n) { return i <= (n - 1) / 2 ? i : i - n; }

template <class Accept>
RadialProfile bin_annuli(const LogPowerSpectrum& spec, int bin_width_px, Accept accept) {
    if (bin_width_px < 1) {
        throw Error(ErrorCode::InvalidArgument, "bin width must be >= 1");
    }
    const int n_ref = std::max(spec.width, spec.height);
    const double max_r = std::numbers::sqrt2 / 2.0 * n_ref + 1.0;
    const auto n_bins = static_cast<std::size_t>(max_r / bin_width_px) + 2;
    std::vector<double> sum(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);

    for (int j = 0; j < spec.height; ++j) {
        for (int i = 0; i < spec.width; ++i) {
            if (i == 0 && j == 0) {
                continue;
            }
            const double v = spec.at(i, j);
            if (!std::isfinite(v)) {
                continue;
            }
            const auto [fx, fy] = spec.frequency(i, j);
            if (!accept(fx, fy)) {
                continue;
            }
            const double r = std::hypot(fx, fy) * n_ref;
            const auto b = static_cast<std::size_t>(r / bin_width_px);
            sum[b] += v;
            ++count[b];
        }
    }

    RadialProfile profile;
    profile.bin_width_px = bin_width_px;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (count[b] == 0) {
            continue;
        }
        const double center = (static_cast<double>(b) + 0.5) * bin_width_px / n_ref;
        profile.bins.push_back({center * center, sum[b] / static_cast<double>(count[b]), count[b]});
    }
    return profile;
}

} // namespace

std::pair<double, double> LogPowerSpectrum::frequency(int i, int j) const {
    return {signed_index(i, width) * freq_step_x, signed_index(j, height) * freq_step_y};
}

int next_efficient_size(int n) {
    if (n <= 1) {
        return 1;
    }
    for (int m = n;; ++m) {
        int r = m;
        for (int p : {2, 3, 5}) {
            while (r % p == 0) {
                r /= p;
            }
        }
        if (r == 1) {
            return m;
        }
    }
}

int default_margin(int width, int height) {
    const int largest = std::max(width, height);
    const auto target = static_cast<int>(std::ceil(1.25 * largest));
    int pow2 = 1;
    while (pow2 < target) {
        pow2 *= 2;
    }
    return (pow2 - largest) / 2;
}

GrayImage prepare_for_fft(const GrayImage& img, int ramp_width, int margin) {
    if (ramp_width < 0 || margin < 0) {
        throw Error(ErrorCode::InvalidArgument, "ramp width and margin must be non-negative");
    }
    if (img.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot prepare an empty image");
    }
    const int w = img.width();
    const int h = img.height();
    const double mu = img.mean();
    const int ow = next_efficient_size(w + 2 * margin);
    const int oh = next_efficient_size(h + 2 * margin);

    GrayImage out(ow, oh, mu, img.pixel_size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int d = std::min({x, y, w - 1 - x, h - 1 - y});
            double v = img(x, y);
            if (d < ramp_width) {
                const double t = (d + 0.5) / ramp_width;
                v = mu + (v - mu) * t;
            }
            out(x + margin, y + margin) = v;
        }
    }
    return out;
}

LogPowerSpectrum log_power_spectrum(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    if (w < 16 || h < 16) {
        throw Error(ErrorCode::ImageTooSmall,
                    "spectrum needs >= 16x16 pixels, got " + std::to_string(w) + "x" +
                        std::to_string(h));
    }
    const std::size_t n = static_cast<std::size_t>(w) * h;

    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf) {
        throw std::bad_alloc();
    }
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    double l1 = 0.0;
    const auto pixels = img.pixels();
    for (std::size_t i = 0; i < n; ++i) {
        buf[i][0] = pixels[i];
        buf[i][1] = 0.0;
        l1 += std::abs(pixels[i]);
    }
    fftw_execute(plan);

    LogPowerSpectrum spec;
    spec.width = w;
    spec.height = h;
    spec.freq_step_x = 1.0 / w;
    spec.freq_step_y = 1.0 / h;
    spec.values.resize(n);
    const double zero_level = kZeroRelativeMagnitude * l1;
    const double zero_power = zero_level * zero_level;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
        spec.values[i] = p > zero_power ? std::log(p) : LogPowerSpectrum::kZeroPower;
    }

    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
    return spec;
}

RadialProfile radial_profile(const LogPowerSpectrum& spec, int bin_width_px) {
    return bin_annuli(spec, bin_width_px, [](double, double) { return true; });
}

RadialProfile sector_profile(const LogPowerSpectrum& spec, double center_angle,
                             double half_width, int bin_width_px) {
    if (!(half_width > 0.0) || half_width > std::numbers::pi / 2.0 + 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "sector half width must lie in (0, pi/2]");
    }
    // Power spectra of real images are centrosymmetric, hence modulo pi.
    auto in_sector = [&](double fx, double fy) {
        const double delta = std::remainder(std::atan2(fy, fx) - center_angle, std::numbers::pi);
        return std::abs(delta) <= half_width;
    };
    RadialProfile p = bin_annuli(spec, bin_width_px, in_sector);
    if (p.bins.empty()) {
        throw Error(ErrorCode::EmptySector, "no spectral samples inside the sector");
    }
    return p;
}

} // namespace mtfest
