#pragma once

#include <cmath>

namespace ckstab {

/// Fractional order (alpha, rho) together with the base time t0 > 0.
///
/// Every Caputo-Katugampola operator in the library is parameterized by this
/// triple. The transformed time w = (t^rho - t0^rho)/rho turns the deformed
/// kernels into classical Riemann-Liouville kernels, so the helpers below are
/// the only place where t and w are converted.
struct FracOrder {
    double alpha = 0.9;
    double rho = 1.0;
    double t0 = 1.0;

    /// Throws OrderError unless alpha > 0, rho > 0 and t0 > 0.
    void validate() const;
    /// Additionally requires alpha in (0, 1), as needed by derivatives and
    /// the stability theory.
    void validate_derivative_order() const;

    double to_w(double t) const { return (std::pow(t, rho) - std::pow(t0, rho)) / rho; }
    double to_t(double w) const { return std::pow(rho * w + std::pow(t0, rho), 1.0 / rho); }
};

}  // namespace ckstab
