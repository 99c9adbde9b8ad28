#pragma once

// Real-argument helpers shared by the specfun translation units.

namespace ckstab::specfun::detail {

/// log|Gamma(x)| without touching the global `signgam` (thread-safe).
double lgamma(double x);
double sinpi(double x);
double cospi(double x);
bool is_nonpositive_integer(double x);
/// log|1/Gamma(x)| with the sign of 1/Gamma(x) in `sign`; x must not be a pole.
double log_abs_rgamma(double x, int& sign);

}  // namespace ckstab::specfun::detail
