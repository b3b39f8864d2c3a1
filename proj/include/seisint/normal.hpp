#pragma once

namespace seisint {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile. Rational approximation refined by one Halley
/// step; absolute error well below 1e-9 on [1e-12, 1 - 1e-12]. The argument
/// is clipped to that interval.
double normal_quantile(double p);

}  // namespace seisint
