#pragma once

// Trajectories of Caputo-Katugampola systems: the closed-form scalar linear
// solution and a fractional Adams predictor-corrector for D x = A x + f(x).
// Both work on a uniform grid in w = (t^rho - t0^rho)/rho.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "ckstab/fraccalc.hpp"
#include "ckstab/order.hpp"

namespace ckstab::dynamics {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RHS = std::function<CVector(const CVector&)>;

/// States beyond this norm end a simulation.
inline constexpr double kDivergenceCap = 1e8;
inline constexpr std::size_t kMinSteps = 16;

struct Trajectory {
    FracOrder order;
    fraccalc::WGrid grid;
    std::vector<double> t_nodes;
    std::vector<CVector> states;
    double sup_norm = 0.0;
    bool diverged = false;
    /// First node whose norm exceeded the cap; states stop before it.
    std::size_t cut_index = 0;

    std::size_t size() const { return states.size(); }
    int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
    double norm_at(std::size_t k) const { return states[k].norm(); }
    /// max_k |x(t_k) - y(t_k)| over the common nodes.
    double distance(const Trajectory& other) const;
};

/// u(t) = c E_alpha(lambda W^alpha) + int kernel(t, s) h(s) ds with the
/// integral by product quadrature against the Mittag-Leffler kernel. The
/// forcing, if any, must live on `grid`.
Trajectory solve_linear_scalar(cplx lambda, cplx c, const FracOrder& order, const fraccalc::WGrid& grid,
                               const std::optional<fraccalc::ComplexSamples>& forcing = std::nullopt);

struct SolverOptions {
    /// Add starting weights that make both quadratures exact on w^{k alpha},
    /// the non-smooth terms of solutions near t0. Without them the sup-norm
    /// error decays only like h^{2 alpha} for small alpha.
    bool starting_correction = true;
    /// At most this many exponents k alpha < 1 are corrected.
    int max_correction_terms = 4;
    /// The correction extrapolates from the first few nodes, which is only
    /// sound when they resolve the dynamics: it is skipped unless
    /// h^alpha * |Jacobian(x0)| stays below this.
    double correction_resolution = 0.5;
};

/// PECE for D^{alpha,rho} x = rhs(x), x(t0) = x0, with `steps` uniform
/// w-steps up to `horizon`. Throws GridError if steps < kMinSteps or the
/// horizon does not exceed t0; divergence is reported on the trajectory.
Trajectory simulate_rhs(const RHS& rhs, const CVector& x0, const FracOrder& order, double horizon,
                        std::size_t steps, const SolverOptions& options = {});

/// D^{alpha,rho} x = A x + f(x).
Trajectory simulate(const Eigen::MatrixXd& a, const RHS& f, const CVector& x0, const FracOrder& order,
                    double horizon, std::size_t steps, const SolverOptions& options = {});

}  // namespace ckstab::dynamics
