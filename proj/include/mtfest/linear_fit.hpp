#pragma once

#include <span>

namespace mtfest {

/// Result of a weighted straight-line fit y = slope * x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;        // weighted coefficient of determination
    double sse = 0.0;       // weighted residual sum of squares
    double sum_weights = 0.0;
};

/// Weighted ordinary least squares on centered sums. weights may be empty
/// (all ones). Throws InvalidArgument for fewer than two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights = {});

} // namespace mtfest
