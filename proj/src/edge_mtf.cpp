#include "mtfest/edge_mtf.hpp"

#include "mtfest/error.hpp"
#include "mtfest/linear_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mtfest {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGradientFloor = 0.1; // fraction of the row maximum kept for the centroid

// Copy of the ROI with the edge running roughly along the vertical axis.
GrayImage oriented_roi(const GrayImage& roi) {
    double gx = 0.0;
    double gy = 0.0;
    for (int y = 1; y + 1 < roi.height(); ++y) {
        for (int x = 1; x + 1 < roi.width(); ++x) {
            gx += std::abs(roi(x + 1, y) - roi(x - 1, y));
            gy += std::abs(roi(x, y + 1) - roi(x, y - 1));
        }
    }
    if (gy <= gx) {
        return roi;
    }
    GrayImage t(roi.height(), roi.width(), 0.0, roi.pixel_size());
    for (int y = 0; y < roi.height(); ++y) {
        for (int x = 0; x < roi.width(); ++x) {
            t(y, x) = roi(x, y);
        }
    }
    return t;
}

// Resamples the per-bin means onto the bin centres. Each mean sits at the
// mean distance of its samples, which at some slants is well off the centre;
// interpolating between those positions removes that offset and fills empty
// bins. Ends are held constant.
std::vector<double> resample_to_centres(const std::vector<double>& mean_d,
                                        const std::vector<double>& mean_v,
                                        const std::vector<std::size_t>& count,
                                        const std::vector<double>& centre) {
    std::vector<double> d;
    std::vector<double> v;
    for (std::size_t i = 0; i < count.size(); ++i) {
        if (count[i] > 0) {
            d.push_back(mean_d[i]);
            v.push_back(mean_v[i]);
        }
    }
    std::vector<double> out(centre.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < centre.size(); ++i) {
        const double c = centre[i];
        while (j + 1 < d.size() && d[j + 1] < c) {
            ++j;
        }
        if (c <= d.front()) {
            out[i] = v.front();
        } else if (j + 1 >= d.size()) {
            out[i] = v.back();
        } else {
            const double t = (c - d[j]) / (d[j + 1] - d[j]);
            out[i] = v[j] + t * (v[j + 1] - v[j]);
        }
    }
    return out;
}

std::vector<double> gaussian_smooth(const std::vector<double>& v, double sigma_bins) {
    const int r = static_cast<int>(std::ceil(4.0 * sigma_bins));
    std::vector<double> taps(static_cast<std::size_t>(2 * r + 1));
    for (int i = -r; i <= r; ++i) {
        taps[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma_bins * sigma_bins));
    }
    const auto n = static_cast<int>(v.size());
    std::vector<double> out(v.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        double norm = 0.0;
        for (int j = -r; j <= r; ++j) {
            if (i + j < 0 || i + j >= n) {
                continue;
            }
            acc += taps[static_cast<std::size_t>(j + r)] * v[static_cast<std::size_t>(i + j)];
            norm += taps[static_cast<std::size_t>(j + r)];
        }
        out[static_cast<std::size_t>(i)] = acc / norm;
    }
    return out;
}

} // namespace

std::optional<double> Lsf::fwhm_length() const {
    if (!pixel_size) {
        return std::nullopt;
    }
    return fwhm * *pixel_size;
}

EdgeProfile extract_edge_profile(const GrayImage& img, const Rect& roi, int oversample) {
    if (oversample < 1) {
        throw Error(ErrorCode::InvalidArgument, "oversample must be >= 1");
    }
    const GrayImage a = oriented_roi(clip_roi(img, roi));
    const int w = a.width();
    const int h = a.height();
    if (w < 4 || h < 4) {
        throw Error(ErrorCode::NoEdgeFound, "roi too small to hold an edge");
    }

    std::vector<double> rows;
    std::vector<double> centroids;
    std::vector<double> grad(static_cast<std::size_t>(w), 0.0);
    for (int y = 0; y < h; ++y) {
        double peak = 0.0;
        for (int x = 1; x + 1 < w; ++x) {
            grad[static_cast<std::size_t>(x)] = 0.5 * std::abs(a(x + 1, y) - a(x - 1, y));
            peak = std::max(peak, grad[static_cast<std::size_t>(x)]);
        }
        if (peak <= 0.0) {
            continue;
        }
        double sum = 0.0;
        double moment = 0.0;
        for (int x = 1; x + 1 < w; ++x) {
            const double g = grad[static_cast<std::size_t>(x)];
            if (g >= kGradientFloor * peak) {
                sum += g;
                moment += g * x;
            }
        }
        rows.push_back(y);
        centroids.push_back(moment / sum);
    }
    if (rows.size() < 3) {
        throw Error(ErrorCode::NoEdgeFound, "no gradient found in the roi");
    }

    const LineFit line = fit_line(rows, centroids);
    const double slant = std::atan(std::abs(line.slope)) * 180.0 / kPi;
    const double scatter = std::sqrt(line.sse / line.sum_weights);
    if (slant < kMinEdgeSlantDeg && scatter <= 0.5) {
        throw Error(ErrorCode::EdgeTooAligned,
                    "edge slant " + std::to_string(slant) + " deg leaves too little phase diversity");
    }
    if (!(line.r2 >= kMinEdgeR2)) {
        throw Error(ErrorCode::NoEdgeFound,
                    "gradient centroids fit a line with r2 " + std::to_string(line.r2));
    }
    if (slant < kMinEdgeSlantDeg) {
        throw Error(ErrorCode::EdgeTooAligned,
                    "edge slant " + std::to_string(slant) + " deg leaves too little phase diversity");
    }

    // Signed distance of pixel centre (x, y) from x = intercept + slope * y.
    const double norm = std::sqrt(1.0 + line.slope * line.slope);
    auto distance = [&](int x, int y) { return (x - line.intercept - line.slope * y) / norm; };
    double d_min = distance(0, 0);
    double d_max = d_min;
    for (int y : {0, h - 1}) {
        for (int x : {0, w - 1}) {
            d_min = std::min(d_min, distance(x, y));
            d_max = std::max(d_max, distance(x, y));
        }
    }
    const auto first = static_cast<long>(std::floor(d_min * oversample));
    const auto n_bins = static_cast<std::size_t>(std::floor(d_max * oversample) - first + 1);
    std::vector<double> sum(n_bins, 0.0);
    std::vector<double> dsum(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d = distance(x, y);
            const auto b = static_cast<std::size_t>(
                static_cast<long>(std::floor(d * oversample)) - first);
            sum[b] += a(x, y);
            dsum[b] += d;
            ++count[b];
        }
    }
    std::vector<double> centre(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        centre[b] = (static_cast<double>(first) + static_cast<double>(b) + 0.5) / oversample;
        if (count[b] > 0) {
            sum[b] /= static_cast<double>(count[b]);
            dsum[b] /= static_cast<double>(count[b]);
        }
    }
    sum = resample_to_centres(dsum, sum, count, centre);

    const std::size_t quarter = std::max<std::size_t>(1, n_bins / 4);
    double head = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < quarter; ++i) {
        head += sum[i];
        tail += sum[n_bins - 1 - i];
    }
    const bool falling = tail < head;

    EdgeProfile p;
    p.oversample = oversample;
    p.angle_deg = slant;
    p.pixel_size = img.pixel_size();
    p.samples.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        p.samples[b] = {centre[b], sum[b]};
    }
    if (falling) {
        std::reverse(p.samples.begin(), p.samples.end());
        for (auto& s : p.samples) {
            s.d = -s.d;
        }
    }
    return p;
}

Lsf lsf_from_edge(const EdgeProfile& profile, std::optional<double> smoothing) {
    const std::size_t n = profile.samples.size();
    if (n < 3 || profile.oversample < 1) {
        throw Error(ErrorCode::NoPeak, "edge profile too short for a derivative");
    }
    const double step = 1.0 / profile.oversample;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        w[i] = (profile.samples[hi].v - profile.samples[lo].v) /
               (static_cast<double>(hi - lo) * step);
    }
    double applied = 0.0;
    if (smoothing && *smoothing > 0.0) {
        applied = *smoothing;
        w = gaussian_smooth(w, applied * profile.oversample);
    }

    double area = 0.0;
    for (double v : w) {
        area += v * step;
    }
    const auto peak_it = std::max_element(w.begin(), w.end());
    if (!(area > 0.0) || !(*peak_it > 0.0)) {
        throw Error(ErrorCode::NoPeak, "derivative has no positive main lobe");
    }
    for (double& v : w) {
        v /= area;
    }
    const auto peak = static_cast<std::size_t>(peak_it - w.begin());
    // Parabolic vertex through the top three samples; the sampled maximum
    // sits below the true peak by up to half a bin.
    double top = w[peak];
    if (peak > 0 && peak + 1 < n) {
        const double curv = w[peak + 1] - 2.0 * w[peak] + w[peak - 1];
        if (curv < 0.0) {
            const double slope = w[peak + 1] - w[peak - 1];
            top -= slope * slope / (8.0 * curv);
        }
    }
    const double half = 0.5 * top;

    std::optional<double> left;
    for (std::size_t i = peak; i > 0; --i) {
        if (w[i - 1] < half) {
            const double t = (w[i] - half) / (w[i] - w[i - 1]);
            left = profile.samples[i].d - t * step;
            break;
        }
    }
    std::optional<double> right;
    for (std::size_t i = peak; i + 1 < n; ++i) {
        if (w[i + 1] < half) {
            const double t = (w[i] - half) / (w[i] - w[i + 1]);
            right = profile.samples[i].d + t * step;
            break;
        }
    }
    if (!left || !right) {
        throw Error(ErrorCode::NoPeak, "main lobe does not fall to half maximum inside the profile");
    }

    Lsf lsf;
    lsf.fwhm = *right - *left;
    lsf.smoothing = applied;
    lsf.pixel_size = profile.pixel_size;
    lsf.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        lsf.samples[i] = {profile.samples[i].d, w[i]};
    }
    return lsf;
}

MtfCurve mtf_from_lsf(const Lsf& lsf) {
    const std::size_t n = lsf.samples.size();
    MtfCurve curve;
    curve.provenance = MtfProvenance::EdgeDerived;
    if (n < 2) {
        curve.samples.push_back({0.0, 1.0});
        return curve;
    }
    const double step = lsf.samples[1].d - lsf.samples[0].d;
    double dc = 0.0;
    for (const auto& s : lsf.samples) {
        dc += s.w;
    }
    for (std::size_t j = 0; j <= n / 2; ++j) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double phase =
                -2.0 * kPi * static_cast<double>((j * i) % n) / static_cast<double>(n);
            re += lsf.samples[i].w * std::cos(phase);
            im += lsf.samples[i].w * std::sin(phase);
        }
        const double k = static_cast<double>(j) / (static_cast<double>(n) * step);
        curve.samples.push_back({k, j == 0 ? 1.0 : std::hypot(re, im) / std::abs(dc)});
    }
    return curve;
}

} // namespace mtfest
