#pragma once

#include <complex>

#include "ckstab/order.hpp"

namespace ckstab::specfun {

using cplx = std::complex<double>;

/// Principal argument in (-pi, pi]. Negative zero imaginary parts map to +pi.
double principal_arg(cplx z);

/// Complex Gamma function (Lanczos g=7, 9 terms; reflection for Re z < 0.5).
/// Throws PoleError on z in {0, -1, -2, ...}.
cplx gamma(cplx z);

/// 1/Gamma(x) for real x; exactly zero on the poles.
double rgamma(double x);

/// Parameters of E_{alpha,beta}.
struct MLParams {
    double alpha = 1.0;
    double beta = 1.0;

    void validate() const;
};

enum class MLRegime { Zero, Series, ExtendedSeries, Asymptotic };

const char* to_string(MLRegime regime);

struct MLResult {
    cplx value;
    /// Estimated relative error of `value`.
    double error = 0.0;
    MLRegime regime = MLRegime::Zero;
};

/// Radius up to which E_{alpha,beta} must be accurate to kSeriesTolerance.
inline constexpr double kSeriesRadius = 10.0;
inline constexpr double kSeriesTolerance = 1e-10;
inline constexpr double kAsymptoticTolerance = 1e-6;
/// |z| from which the asymptotic expansion is the reference regime.
inline constexpr double kAsymptoticRadius = 15.0;

/// Two-parameter Mittag-Leffler function together with its error estimate.
///
/// Three evaluators compete: the power series in double precision with
/// compensated summation, the same series in double-double precision, and
/// the asymptotic expansion (algebraic tail plus the exponential
/// contributions of every admissible branch of z^{1/alpha}). The cheapest
/// evaluator whose estimate is within 1e-12 wins; otherwise the best one is
/// returned. Never throws for valid parameters.
MLResult mittag_leffler_eval(MLParams p, cplx z);

/// E_{alpha,beta}(z). Throws ConvergenceError when the achieved relative
/// error exceeds kSeriesTolerance (|z| <= kSeriesRadius) or
/// kAsymptoticTolerance (beyond).
cplx mittag_leffler(MLParams p, cplx z);

/// E_alpha(z) = E_{alpha,1}(z).
inline cplx mittag_leffler(double alpha, cplx z) { return mittag_leffler({alpha, 1.0}, z); }

/// Resolvent kernel of the linear Caputo-Katugampola equation,
///   ((t^rho - s^rho)/rho)^{alpha-1} E_{alpha,alpha}(lambda ((t^rho - s^rho)/rho)^alpha) s^{rho-1}.
/// Throws DomainError unless order.t0 <= s < t.
cplx ml_kernel(const FracOrder& order, cplx lambda, double t, double s);

/// The stationary kernel v^{alpha-1} E_{alpha,alpha}(lambda v^alpha), v > 0.
cplx ml_kernel_w(double alpha, cplx lambda, double v);

/// Tail bound |v^{alpha-1} E_{alpha,alpha}(lambda v^alpha)| <= M / v^{alpha+1} for v > t1,
/// and, once known, C >= sup_t int_0^t |kernel| (filled in by perron::bound_constants).
struct BoundConstants {
    double M = 0.0;
    double t1 = 0.0;
    double C = 0.0;
};

/// Fit (M, t1) for the tail bound. M is seeded from the leading asymptotic
/// term |lambda|^{-2}/|Gamma(-alpha)| and doubled until the bound holds on a
/// geometric sample of [t1, 1e4 t1]. C is left at zero.
/// Throws SectorError unless |arg lambda| > alpha*pi/2.
BoundConstants tail_constants(double alpha, cplx lambda);

/// Number of geometric sample points used by tail_constants.
inline constexpr int kTailSamples = 400;

}  // namespace ckstab::specfun
