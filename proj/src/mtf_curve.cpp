#include "mtfest/mtf_curve.hpp"

#include "mtfest/error.hpp"

#include <algorithm>
#include <cmath>

namespace mtfest {

std::string_view to_string(MtfProvenance p) noexcept {
    switch (p) {
    case MtfProvenance::EstimatedGaussian: return "estimated_gaussian";
    case MtfProvenance::PredictedKernel: return "predicted_kernel";
    case MtfProvenance::EdgeDerived: return "edge_derived";
    }
    return "unknown";
}

double MtfCurve::at(double k) const {
    if (samples.empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty MTF curve");
    }
    if (k <= samples.front().k) {
        return samples.front().m;
    }
    if (k >= samples.back().k) {
        return samples.back().m;
    }
    auto hi = std::lower_bound(samples.begin(), samples.end(), k,
                               [](const MtfSample& s, double v) { return s.k < v; });
    auto lo = hi - 1;
    const double t = (k - lo->k) / (hi->k - lo->k);
    return lo->m + t * (hi->m - lo->m);
}

std::optional<double> MtfCurve::half_modulation_frequency() const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const MtfSample& a = samples[i - 1];
        const MtfSample& b = samples[i];
        if (a.m >= 0.5 && b.m < 0.5) {
            return a.k + (a.m - 0.5) / (a.m - b.m) * (b.k - a.k);
        }
    }
    return std::nullopt;
}

MtfCurve to_physical(const MtfCurve& curve, double pixel_size) {
    if (!(pixel_size > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "pixel size must be positive");
    }
    MtfCurve out = curve;
    for (auto& s : out.samples) {
        s.k /= pixel_size;
    }
    return out;
}

double max_abs_difference(const MtfCurve& a, const MtfCurve& b, double k_lo, double k_hi) {
    double worst = 0.0;
    for (const auto& s : a.samples) {
        if (s.k >= k_lo && s.k <= k_hi) {
            worst = std::max(worst, std::abs(s.m - b.at(s.k)));
        }
    }
    return worst;
}

std::vector<double> frequency_grid(double k_max, std::size_t n) {
    if (n < 2 || !(k_max > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "frequency grid needs n >= 2 and k_max > 0");
    }
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i] = k_max * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return k;
}

} // namespace mtfest
