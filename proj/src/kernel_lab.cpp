#include "mtfest/kernel_lab.hpp"

#include "mtfest/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace mtfest {

namespace {

constexpr double kPi = std::numbers::pi;

int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

void check_spec(const PsfSpec& spec) {
    if (!(spec.size > 0.0) || !std::isfinite(spec.size)) {
        throw Error(ErrorCode::InvalidSpec, "PSF size must be positive");
    }
}

// Number of angles over [0, pi) used for the radial average of a kernel DTFT.
constexpr int kMtfAngles = 64;

} // namespace

double PsfSpec::first_zero_frequency() const {
    if (kind != Kind::CircularAperture) {
        throw Error(ErrorCode::InvalidSpec, "first zero is defined for circular apertures only");
    }
    check_spec(*this);
    return kBesselJ1FirstZero / (2.0 * kPi * size);
}

PsfSpec parse_psf_spec(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw Error(ErrorCode::InvalidSpec, "expected KIND:SIZE, got '" + std::string(text) + "'");
    }
    const std::string_view kind = text.substr(0, colon);
    const std::string value(text.substr(colon + 1));
    double size = 0.0;
    try {
        std::size_t used = 0;
        size = std::stod(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidSpec, "bad PSF size '" + value + "'");
    }
    PsfSpec spec;
    if (kind == "aperture" || kind == "airy" || kind == "disk") {
        spec = PsfSpec::aperture(size);
    } else if (kind == "gaussian" || kind == "gauss") {
        spec = PsfSpec::gaussian(size);
    } else {
        throw Error(ErrorCode::InvalidSpec, "unknown PSF kind '" + std::string(kind) + "'");
    }
    check_spec(spec);
    return spec;
}

// --- Kernel -----------------------------------------------------------------

Kernel::Kernel(int subdiv, int half_extent, std::vector<double> taps)
    : subdiv_(subdiv), half_extent_(half_extent), taps_(std::move(taps)) {
    if (subdiv < 1 || half_extent < 0) {
        throw Error(ErrorCode::InvalidSpec, "kernel needs subdiv >= 1 and half_extent >= 0");
    }
    const auto n = static_cast<std::size_t>(size());
    if (taps_.size() != n * n) {
        throw Error(ErrorCode::InvalidSpec, "kernel tap count does not match its extent");
    }
    const double sum = std::accumulate(taps_.begin(), taps_.end(), 0.0);
    if (!(sum > 0.0)) {
        throw Error(ErrorCode::InvalidSpec, "kernel taps sum to zero");
    }
    for (double& t : taps_) {
        if (t < 0.0 || !std::isfinite(t)) {
            throw Error(ErrorCode::InvalidSpec, "kernel taps must be finite and non-negative");
        }
        t /= sum;
    }
}

Kernel Kernel::delta(int subdiv) { return Kernel(subdiv, 0, {1.0}); }

double Kernel::tap(int qx, int qy) const noexcept {
    if (std::abs(qx) > half_extent_ || std::abs(qy) > half_extent_) {
        return 0.0;
    }
    const int n = size();
    return taps_[static_cast<std::size_t>(qy + half_extent_) * n + (qx + half_extent_)];
}

std::size_t Kernel::nonzero_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(taps_.begin(), taps_.end(), [](double t) { return t > 0.0; }));
}

Kernel make_kernel(const PsfSpec& spec, int subdiv) {
    check_spec(spec);
    if (subdiv < 1) {
        throw Error(ErrorCode::InvalidSpec, "subdiv must be >= 1");
    }
    const double s = subdiv;
    if (spec.kind == PsfSpec::Kind::CircularAperture) {
        const double a2 = spec.size * spec.size;
        const int r = static_cast<int>(std::ceil(spec.size * s));
        const int n = 2 * r + 1;
        std::vector<double> taps(static_cast<std::size_t>(n) * n, 0.0);
        for (int qy = -r; qy <= r; ++qy) {
            for (int qx = -r; qx <= r; ++qx) {
                const double x = qx / s;
                const double y = qy / s;
                if (x * x + y * y <= a2) {
                    taps[static_cast<std::size_t>(qy + r) * n + (qx + r)] = 1.0;
                }
            }
        }
        return Kernel(subdiv, r, std::move(taps));
    }

    const double sigma = spec.sigma();
    const int r = static_cast<int>(std::ceil(4.0 * sigma * s));
    const int n = 2 * r + 1;
    std::vector<double> taps(static_cast<std::size_t>(n) * n, 0.0);
    for (int qy = -r; qy <= r; ++qy) {
        for (int qx = -r; qx <= r; ++qx) {
            const double x = qx / s;
            const double y = qy / s;
            if (std::abs(x) <= 4.0 * sigma && std::abs(y) <= 4.0 * sigma) {
                taps[static_cast<std::size_t>(qy + r) * n + (qx + r)] =
                    std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            }
        }
    }
    return Kernel(subdiv, r, std::move(taps));
}

// Output pixel m averages sub-samples s*m + u (u in [0, s)); each of those is
// sum_q k[q] U[s*m + u - q], and U[p] = f[floor(p / s)]. Collecting terms by
// input pixel gives a fixed pixel-grid kernel, so the upsampled raster never
// has to be materialized. Clamping the pixel index is the same as clamping
// the replicated sub-sample index.
std::vector<double> effective_pixel_kernel(const Kernel& k, int& radius) {
    const int s = k.subdiv();
    const int r = k.half_extent();
    const int lo = floor_div(-r, s);
    const int hi = floor_div(s - 1 + r, s);
    radius = std::max(-lo, hi);
    const int n = 2 * radius + 1;
    std::vector<double> e(static_cast<std::size_t>(n) * n, 0.0);
    const double norm = 1.0 / (static_cast<double>(s) * s);
    for (int uy = 0; uy < s; ++uy) {
        for (int qy = -r; qy <= r; ++qy) {
            const int oy = floor_div(uy - qy, s) + radius;
            for (int ux = 0; ux < s; ++ux) {
                for (int qx = -r; qx <= r; ++qx) {
                    const double t = k.tap(qx, qy);
                    if (t == 0.0) {
                        continue;
                    }
                    const int ox = floor_div(ux - qx, s) + radius;
                    e[static_cast<std::size_t>(oy) * n + ox] += t * norm;
                }
            }
        }
    }
    return e;
}

GrayImage convolve_subpixel(const GrayImage& img, const Kernel& k) {
    int radius = 0;
    const std::vector<double> e = effective_pixel_kernel(k, radius);
    const int n = 2 * radius + 1;
    if (n > img.width() || n > img.height()) {
        throw Error(ErrorCode::KernelTooLarge,
                    "kernel spans " + std::to_string(n) + " pixels, image is " +
                        std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }

    struct Tap {
        int dx;
        int dy;
        double w;
    };
    std::vector<Tap> taps;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double w = e[static_cast<std::size_t>(dy + radius) * n + (dx + radius)];
            if (w != 0.0) {
                taps.push_back({dx, dy, w});
            }
        }
    }

    const int w = img.width();
    const int h = img.height();
    GrayImage out(w, h, 0.0, img.pixel_size());
    for (int y = 0; y < h; ++y) {
        const bool inner_y = y >= radius && y + radius < h;
        for (int x = 0; x < w; ++x) {
            const bool inner = inner_y && x >= radius && x + radius < w;
            double acc = 0.0;
            if (inner) {
                for (const Tap& t : taps) {
                    acc += t.w * img(x + t.dx, y + t.dy);
                }
            } else {
                for (const Tap& t : taps) {
                    acc += t.w * img(std::clamp(x + t.dx, 0, w - 1), std::clamp(y + t.dy, 0, h - 1));
                }
            }
            out(x, y) = acc;
        }
    }
    return out;
}

// The kernel is centrosymmetric, so its transform is real: a cosine sum over
// the taps, evaluated directly at each requested frequency and averaged over
// orientations.
MtfCurve kernel_mtf(const Kernel& k, std::span<const double> freqs) {
    struct Tap {
        double x;
        double y;
        double w;
    };
    std::vector<Tap> taps;
    const int r = k.half_extent();
    const double s = k.subdiv();
    for (int qy = -r; qy <= r; ++qy) {
        for (int qx = -r; qx <= r; ++qx) {
            if (const double t = k.tap(qx, qy); t > 0.0) {
                taps.push_back({qx / s, qy / s, t});
            }
        }
    }

    std::vector<double> cos_t(kMtfAngles);
    std::vector<double> sin_t(kMtfAngles);
    for (int a = 0; a < kMtfAngles; ++a) {
        const double theta = kPi * a / kMtfAngles;
        cos_t[a] = std::cos(theta);
        sin_t[a] = std::sin(theta);
    }

    MtfCurve curve;
    curve.provenance = MtfProvenance::PredictedKernel;
    curve.samples.reserve(freqs.size());
    for (double f : freqs) {
        if (f < 0.0 || !std::isfinite(f)) {
            throw Error(ErrorCode::InvalidArgument, "frequencies must be non-negative");
        }
        double acc = 0.0;
        for (int a = 0; a < kMtfAngles; ++a) {
            const double fx = 2.0 * kPi * f * cos_t[a];
            const double fy = 2.0 * kPi * f * sin_t[a];
            double h = 0.0;
            for (const Tap& t : taps) {
                h += t.w * std::cos(fx * t.x + fy * t.y);
            }
            acc += std::abs(h);
        }
        curve.samples.push_back({f, acc / kMtfAngles});
    }
    return curve;
}

MtfCurve predicted_mtf(const PsfSpec& spec, std::span<const double> freqs, int subdiv) {
    return kernel_mtf(make_kernel(spec, subdiv), freqs);
}

// --- synthetic targets ------------------------------------------------------

namespace {

// Fraction of [x0, x1) covered by wells of a 50% duty square wave whose
// wells occupy [0, p/2) modulo p.
double well_coverage(double x0, double x1, double p) {
    auto cumulative = [p](double x) {
        const double periods = std::floor(x / p);
        const double rem = x - periods * p;
        return periods * (p / 2.0) + std::min(rem, p / 2.0);
    };
    return (cumulative(x1) - cumulative(x0)) / (x1 - x0);
}

} // namespace

BarPattern square_wave_pattern(std::span<const double> pitches, double pixel_size, double depth,
                               const BarPatternLayout& layout) {
    if (!(pixel_size > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "pixel size must be positive");
    }
    if (pitches.empty()) {
        throw Error(ErrorCode::InvalidPitch, "no pitches given");
    }
    for (double p : pitches) {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw Error(ErrorCode::InvalidPitch, "pitch must be positive");
        }
    }
    if (layout.width < 1 || layout.band_height < 1) {
        throw Error(ErrorCode::InvalidArgument, "bar layout needs positive extents");
    }

    const int h = layout.band_height * static_cast<int>(pitches.size());
    BarPattern out{GrayImage(layout.width, h, layout.base, pixel_size), {}};
    for (std::size_t b = 0; b < pitches.size(); ++b) {
        const double p = pitches[b] / pixel_size;
        const Rect rect{0, static_cast<int>(b) * layout.band_height, layout.width,
                        layout.band_height};
        out.bands.push_back({rect, pitches[b], p});
        for (int x = 0; x < layout.width; ++x) {
            const double v = layout.base + depth * well_coverage(x, x + 1.0, p);
            for (int y = rect.y0; y < rect.y0 + rect.h; ++y) {
                out.image(x, y) = v;
            }
        }
    }
    return out;
}

double pattern_contrast(const GrayImage& img, const Rect& band, double pitch_px) {
    if (!(pitch_px > 0.0)) {
        throw Error(ErrorCode::InvalidPitch, "pitch must be positive");
    }
    if (!img.contains(band)) {
        throw Error(ErrorCode::OutOfBounds, "band outside image");
    }
    const int periods = static_cast<int>(std::floor(band.w / pitch_px));
    if (periods < 3) {
        throw Error(ErrorCode::TooFewPeriods,
                    "band holds " + std::to_string(periods) + " full periods, need 3");
    }

    std::vector<double> profile(band.w, 0.0);
    for (int x = 0; x < band.w; ++x) {
        for (int y = 0; y < band.h; ++y) {
            profile[x] += img(band.x0 + x, band.y0 + y);
        }
        profile[x] /= band.h;
    }

    // Fold pixel centers by phase within the period; with non-integer pitches
    // the centers land at many phases, so the fold resolves the period shape.
    // Coarse phase bins would clip the extremes depending on where the wave
    // happens to start, so use as many bins as the samples allow.
    const double span_px = periods * pitch_px;
    const int phase_bins = std::clamp(static_cast<int>(span_px) / 4, 2, 64);
    std::vector<double> sum(phase_bins, 0.0);
    std::vector<int> count(phase_bins, 0);
    for (int x = 0; x < band.w && x + 0.5 < span_px; ++x) {
        const double phase = std::fmod(x + 0.5, pitch_px) / pitch_px;
        const int bin = std::min(phase_bins - 1, static_cast<int>(phase * phase_bins));
        sum[bin] += profile[x];
        ++count[bin];
    }
    double lo = 0.0;
    double hi = 0.0;
    bool first = true;
    for (int b = 0; b < phase_bins; ++b) {
        if (count[b] == 0) {
            continue;
        }
        const double v = sum[b] / count[b];
        lo = first ? v : std::min(lo, v);
        hi = first ? v : std::max(hi, v);
        first = false;
    }
    if (!(hi + lo > 0.0)) {
        return 0.0;
    }
    return (hi - lo) / (hi + lo);
}

GrayImage binned_noise_texture(int width, int height, std::uint64_t seed, int oversample,
                               double amplitude) {
    if (width < 1 || height < 1 || oversample < 1) {
        throw Error(ErrorCode::InvalidArgument, "texture needs positive dimensions");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, amplitude);
    GrayImage fine(width * oversample, height * oversample);
    for (double& v : fine.pixels()) {
        v = uniform(rng);
    }
    return bin_image(fine, oversample);
}

GrayImage slanted_edge_image(int width, int height, double angle_deg, double sigma_px, double low,
                             double high, int oversample) {
    if (width < 1 || height < 1 || sigma_px < 0.0 || oversample < 1) {
        throw Error(ErrorCode::InvalidArgument, "bad edge image parameters");
    }
    const double theta = angle_deg * kPi / 180.0;
    // Unit normal of a line rotated theta from the vertical.
    const double nx = std::cos(theta);
    const double ny = -std::sin(theta);
    const double cx = width / 2.0;
    const double cy = height / 2.0;
    const double step = 1.0 / oversample;
    auto level = [&](double px, double py) {
        const double d = (px - cx) * nx + (py - cy) * ny;
        if (sigma_px > 0.0) {
            return 0.5 * std::erfc(-d / (sigma_px * std::numbers::sqrt2));
        }
        return d > 0.0 ? 1.0 : (d < 0.0 ? 0.0 : 0.5);
    };
    GrayImage out(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double t = 0.0;
            for (int j = 0; j < oversample; ++j) {
                for (int i = 0; i < oversample; ++i) {
                    t += level(x + (i + 0.5) * step, y + (j + 0.5) * step);
                }
            }
            out(x, y) = low + (high - low) * t / (oversample * oversample);
        }
    }
    return out;
}

namespace {

std::vector<double> gaussian_taps(double sigma) {
    const int r = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> taps(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        taps[i + r] = std::exp(-0.5 * (i / sigma) * (i / sigma));
        sum += taps[i + r];
    }
    for (double& t : taps) {
        t /= sum;
    }
    return taps;
}

} // namespace

GrayImage gaussian_blur(const GrayImage& img, double sigma_x, double sigma_y) {
    if (sigma_x < 0.0 || sigma_y < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "blur sigma must be non-negative");
    }
    const int w = img.width();
    const int h = img.height();
    GrayImage tmp = img;
    if (sigma_x > 0.0) {
        const auto taps = gaussian_taps(sigma_x);
        const int r = static_cast<int>(taps.size() / 2);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    acc += taps[i + r] * img(std::clamp(x + i, 0, w - 1), y);
                }
                tmp(x, y) = acc;
            }
        }
    }
    GrayImage out = tmp;
    if (sigma_y > 0.0) {
        const auto taps = gaussian_taps(sigma_y);
        const int r = static_cast<int>(taps.size() / 2);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    acc += taps[i + r] * tmp(x, std::clamp(y + i, 0, h - 1));
                }
                out(x, y) = acc;
            }
        }
    }
    return out;
}

GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
    }
    GrayImage out = img;
    if (sigma == 0.0) {
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : out.pixels()) {
        v += noise(rng);
    }
    return out;
}

} // namespace mtfest
