#include "mtfest/linear_fit.hpp"

#include "mtfest/error.hpp"

namespace mtfest {

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights) {
    if (x.size() != y.size() || (!weights.empty() && weights.size() != x.size())) {
        throw Error(ErrorCode::InvalidArgument, "fit_line: mismatched input lengths");
    }
    auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

    double sw = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w(i);
        mx += w(i) * x[i];
        my += w(i) * y[i];
    }
    if (!(sw > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "fit_line: no positive weight");
    }
    mx /= sw;
    my /= sw;

    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += w(i) * dx * dx;
        sxy += w(i) * dx * dy;
        syy += w(i) * dy * dy;
    }
    if (!(sxx > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "fit_line: x values are all equal");
    }

    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.sum_weights = sw;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        fit.sse += w(i) * r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - fit.sse / syy : 1.0;
    return fit;
}

} // namespace mtfest
