#pragma once

// Lyapunov-Perron operator of the modal system D y = J y + h(y) and the
// constants that make it a contraction: C(alpha, lambda), sup |E_alpha|,
// the local Lipschitz modulus of h and the resulting certificate.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ckstab/dynamics.hpp"
#include "ckstab/order.hpp"
#include "ckstab/spectral.hpp"

namespace ckstab::perron {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;

/// The neglected tail of every infinite-horizon integral stays below this
/// fraction of the computed value.
inline constexpr double kTailFraction = 1e-6;
inline constexpr std::size_t kMinLipschitzSamples = 1000;

struct IntegralBound {
    /// Quadrature of int_0^V |v^{alpha-1} E_{alpha,alpha}(lambda v^alpha)| dv
    /// plus the tail bound M / (alpha V^alpha).
    double C = 0.0;
    /// Truncation point V in the transformed time.
    double w_max = 0.0;
    double tail = 0.0;
};

/// sup_t int_{t0}^t |kernel(t, s)| ds. The substitution to w removes rho and
/// t0, so the value depends on (alpha, lambda) only; `order` is validated.
/// Throws SectorError unless |arg lambda| > alpha pi / 2.
IntegralBound integral_bound(double alpha, cplx lambda, const FracOrder& order);
double estimate_C(double alpha, cplx lambda, const FracOrder& order);

/// sup_{W >= 0} |E_alpha(lambda W^alpha)| from a graded sample refined
/// around the largest value, checked against the asymptotic envelope beyond
/// the sampled range. Throws SectorError as above.
double estimate_supE(double alpha, cplx lambda, const FracOrder& order);

struct LipschitzOptions {
    std::size_t samples = 4096;
    std::uint64_t seed = 0;
    /// A known bound replaces sampling and removes the numerical caveat.
    std::optional<double> analytic;
};

struct LipschitzEstimate {
    double value = 0.0;
    /// Sampled suprema can only under-estimate the true modulus.
    bool lower_estimate = true;
    std::size_t pairs = 0;
};

/// max |h(x) - h(y)| / |x - y| over x, y in the closed complex ball of
/// radius r in C^dim: scrambled Sobol pairs plus near-diagonal pairs at
/// separation 1e-6 r. Throws DomainError if h is not finite in the ball or
/// samples < kMinLipschitzSamples.
LipschitzEstimate local_lipschitz(const spectral::VectorFn& h, int dim, double r, const LipschitzOptions& options = {});

/// F_x on a fixed grid. Component j of
///   (F_x xi)(w) = E_alpha(lambda_j w^alpha) x_j + int_0^w kernel_j(w - s) h_j(xi(s)) ds
/// uses the eigenvalue of its block; the integral is the Mittag-Leffler
/// product quadrature with h interpolated linearly between nodes.
class PerronOperator {
public:
    PerronOperator(const spectral::ModalSystem& ms, const FracOrder& order, const fraccalc::WGrid& grid);

    /// Throws GridError unless xi lives on this grid with ms.dim() components.
    dynamics::Trajectory apply(const CVector& x, const dynamics::Trajectory& xi) const;
    /// The constant trajectory x on this grid.
    dynamics::Trajectory constant(const CVector& x) const;

    const fraccalc::WGrid& grid() const { return grid_; }

private:
    spectral::ModalSystem ms_;
    FracOrder order_;
    fraccalc::WGrid grid_;
    std::vector<std::size_t> weight_index_;  // component -> distinct eigenvalue
    std::vector<fraccalc::ProductWeights<cplx>> weights_;
    std::vector<std::vector<cplx>> free_;  // E_alpha(lambda w_n^alpha) per distinct eigenvalue
};

/// One application of F_x on xi's grid.
dynamics::Trajectory lp_apply(const spectral::ModalSystem& ms, const CVector& x, const dynamics::Trajectory& xi,
                              const FracOrder& order);

struct ContractionCertificate {
    double r = 0.0;
    std::vector<cplx> eigenvalues;  // one per block
    std::vector<double> C_per_block;
    double C = 0.0;
    double delta = 0.0;
    double lip_h = 0.0;
    double q = 0.0;
    std::vector<double> supE_per_block;
    double supE = 0.0;
    double r_star = 0.0;
    bool valid = false;
    /// lip_h came from sampling and may under-estimate the true modulus.
    bool numerical = true;
    double cond_TP = 1.0;
    /// Truncation time of the infinite-horizon integrals (largest over blocks).
    double t_max = 0.0;
    /// When invalid: the largest r' = r 2^{-k} with q(r') < 1, if any.
    std::optional<double> suggested_r;
};

struct CertifyOptions {
    LipschitzOptions lipschitz;
    std::optional<spectral::JordanHint> hint;
};

/// Modal transform with delta = 1/(2 max C), per-block constants computed
/// concurrently, the Lipschitz modulus of h on the transformed ball of
/// radius r, q = C lip_h and r* = r (1 - q) / supE.
/// Throws UnstableSpectrumError (inconclusive() on the sector boundary),
/// DefectiveMatrixError, ConfigError for a bad hint, DomainError for r <= 0.
ContractionCertificate certify(const spectral::Matrix& a, const spectral::VectorFn& f, const FracOrder& order, double r,
                               const CertifyOptions& options = {});

/// The modal system a certificate refers to.
spectral::ModalSystem certified_system(const spectral::Matrix& a, const spectral::VectorFn& f,
                                       const ContractionCertificate& cert, const CertifyOptions& options = {});

struct PicardOptions {
    int max_iter = 50;
    double tol = 1e-13;
    /// When given, |x| > r* is reported in `warning`.
    const ContractionCertificate* certificate = nullptr;
};

struct PicardResult {
    dynamics::Trajectory trajectory;
    /// sup_t |xi_{k+1} - xi_k| for every iteration.
    std::vector<double> residuals;
    bool converged = false;
    std::string warning;

    /// residuals[k+1] / residuals[k], skipping residuals below `floor`.
    std::vector<double> ratios(double floor = 0.0) const;
};

/// xi_{k+1} = F_x xi_k from xi_0 = x until the sup-norm residual is below
/// tol or max_iter is reached; converged reports which.
PicardResult picard_iterate(const spectral::ModalSystem& ms, const CVector& x, const FracOrder& order,
                            const fraccalc::WGrid& grid, const PicardOptions& options = {});

}  // namespace ckstab::perron
