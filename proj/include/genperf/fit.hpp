#pragma once

#include <span>

namespace genperf {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept. Throws DomainError when x has
/// fewer than two distinct values.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

/// Slope of log(y) against log(x); all values must be positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace genperf
