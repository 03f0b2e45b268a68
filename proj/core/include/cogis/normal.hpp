#pragma once

namespace cogis {

/// Standard normal CDF, Phi(x) = erfc(-x / sqrt(2)) / 2.
double norm_cdf(double x);

/// Standard normal quantile Phi^{-1}(p) for p in (0, 1). Rational initial
/// guess polished by one Newton step on norm_cdf. Throws ContractViolation
/// outside (0, 1).
double inv_norm_cdf(double p);

}  // namespace cogis
