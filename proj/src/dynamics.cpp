#include "ckstab/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "ckstab/errors.hpp"
#include "ckstab/specfun.hpp"

namespace ckstab::dynamics {

namespace {

void finish(Trajectory& tr) {
    tr.sup_norm = 0.0;
    for (const auto& s : tr.states) tr.sup_norm = std::max(tr.sup_norm, s.norm());
}

constexpr int kStartSweeps = 200;
constexpr double kStartTolerance = 1e-14;

// Frobenius norm of the finite-difference Jacobian of rhs at x.
double jacobian_norm(const RHS& rhs, const CVector& x) {
    const CVector fx = rhs(x);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = 1e-7 * std::max(1.0, std::abs(x(i)));
        CVector xp = x;
        xp(i) += step;
        sum += ((rhs(xp) - fx) / step).squaredNorm();
    }
    return std::sqrt(sum);
}

// Correction weights on nodes 0..S-1: with them the predictor and corrector
// integrate w^gamma exactly for gamma = 0 and every corrected k alpha < 1.
struct StartingWeights {
    Eigen::MatrixXd pred;  // S x (N+1): column n corrects the rule for node n
    Eigen::MatrixXd corr;

    /// Number of nodes after t0 that carry correction weights.
    std::size_t size() const { return pred.rows() == 0 ? 0 : static_cast<std::size_t>(pred.rows()) - 1; }
    double predictor(std::size_t i, std::size_t n) const { return pred(i, n); }
    double corrector(std::size_t i, std::size_t n) const { return corr(i, n); }
};

StartingWeights starting_weights(double alpha, const std::vector<double>& b,
                                 const fraccalc::ProductWeights<double>& c, std::size_t steps, int max_terms) {
    // Only exponents below 1 are corrected: above that the trapezoid error is
    // a global smooth-part error that starting values cannot represent.
    std::vector<double> exps{0.0};
    for (int k = 1; k <= max_terms && k * alpha < 1.0 - 1e-12; ++k) exps.push_back(k * alpha);
    StartingWeights sw;
    if (exps.size() == 1) return sw;
    const auto rows = static_cast<Eigen::Index>(exps.size());
    const auto cols = static_cast<Eigen::Index>(steps + 1);

    Eigen::MatrixXd v(rows, rows);
    for (Eigen::Index k = 0; k < rows; ++k)
        for (Eigen::Index i = 0; i < rows; ++i) v(k, i) = i == 0 ? (exps[k] == 0.0 ? 1.0 : 0.0) : std::pow(static_cast<double>(i), exps[k]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(v);

    // residuals of the plain rules on w^gamma, unit step
    Eigen::MatrixXd rp = Eigen::MatrixXd::Zero(rows, cols), rc = Eigen::MatrixXd::Zero(rows, cols);
    std::vector<long double> powers(steps + 1);
    for (Eigen::Index k = 0; k < rows; ++k) {
        const double g = exps[k];
        for (std::size_t j = 0; j <= steps; ++j) powers[j] = j == 0 ? (g == 0.0 ? 1.0L : 0.0L) : std::pow(static_cast<long double>(j), g);
        const long double gr = std::tgamma(g + 1.0) / std::tgamma(g + alpha + 1.0);
        for (std::size_t n = 1; n <= steps; ++n) {
            const long double exact = gr * std::pow(static_cast<long double>(n), g + alpha);
            long double qp = 0.0L;
            for (std::size_t j = 0; j < n; ++j) qp += b[n - 1 - j] * powers[j];
            long double qc = c.start[n] * powers[0];
            for (std::size_t j = 1; j <= n; ++j) qc += c.conv[n - j] * powers[j];
            rp(k, static_cast<Eigen::Index>(n)) = static_cast<double>(exact - qp);
            rc(k, static_cast<Eigen::Index>(n)) = static_cast<double>(exact - qc);
        }
    }
    sw.pred = lu.solve(rp);
    sw.corr = lu.solve(rc);
    return sw;
}

}  // namespace

double Trajectory::distance(const Trajectory& other) const {
    const std::size_t n = std::min(states.size(), other.states.size());
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) d = std::max(d, (states[k] - other.states[k]).norm());
    return d;
}

Trajectory solve_linear_scalar(cplx lambda, cplx c, const FracOrder& order, const fraccalc::WGrid& grid,
                               const std::optional<fraccalc::ComplexSamples>& forcing) {
    order.validate_derivative_order();
    grid.validate();
    if (forcing) {
        forcing->validate();
        if (forcing->grid.size != grid.size || std::fabs(forcing->grid.step - grid.step) > 1e-12 * grid.step) {
            throw GridError("solve_linear_scalar: forcing is not sampled on the trajectory grid");
        }
    }
    const double alpha = order.alpha;
    Trajectory tr{order, grid, fraccalc::time_nodes(order, grid), {}};
    tr.states.assign(grid.size, CVector::Zero(1));

    std::optional<fraccalc::ProductWeights<cplx>> weights;
    if (forcing) weights = fraccalc::ml_product_weights(alpha, lambda, grid.step, grid.intervals());
    for (std::size_t n = 0; n < grid.size; ++n) {
        const double w = grid.node(n);
        cplx u = c * specfun::mittag_leffler(alpha, lambda * std::pow(w, alpha));
        if (weights) u += weights->apply(forcing->values, n);
        tr.states[n](0) = u;
    }
    tr.cut_index = grid.size;
    finish(tr);
    return tr;
}

Trajectory simulate_rhs(const RHS& rhs, const CVector& x0, const FracOrder& order, double horizon,
                        std::size_t steps, const SolverOptions& options) {
    order.validate_derivative_order();
    if (steps < kMinSteps) {
        std::ostringstream os;
        os << "simulate: need at least " << kMinSteps << " steps, got " << steps;
        throw GridError(os.str());
    }
    if (x0.size() == 0 || !x0.allFinite()) throw DomainError("simulate: initial state must be finite and non-empty");
    const auto grid = fraccalc::make_grid(order, horizon, steps);
    const double alpha = order.alpha;
    const double ha = std::pow(grid.step, alpha);

    // Unit-step weights; every quadrature below is scaled by h^alpha.
    // Predictor (product rectangle): b_m = ((m+1)^alpha - m^alpha)/Gamma(alpha+1).
    std::vector<double> b(steps);
    b[0] = 1.0 / std::tgamma(alpha + 1.0);
    for (std::size_t m = 1; m < steps; ++m) {
        const double mm = static_cast<double>(m);
        b[m] = std::pow(mm, alpha) * std::expm1(alpha * std::log1p(1.0 / mm)) / std::tgamma(alpha + 1.0);
    }
    const auto c = fraccalc::rl_product_weights(alpha, 1.0, steps);

    StartingWeights sw;
    if (options.starting_correction && ha * jacobian_norm(rhs, x0) <= options.correction_resolution) {
        sw = starting_weights(alpha, b, c, steps, options.max_correction_terms);
    }
    const std::size_t s = sw.size();

    Trajectory tr{order, grid, fraccalc::time_nodes(order, grid), {}};
    tr.cut_index = grid.size;
    std::vector<CVector>& x = tr.states;
    std::vector<CVector> f;
    x.reserve(grid.size);
    f.reserve(grid.size);
    x.push_back(x0);
    f.push_back(rhs(x0));

    auto predict = [&](std::size_t n) {  // x_{n+1} from f_0..f_n
        CVector p = CVector::Zero(x0.size());
        for (std::size_t j = 0; j <= n; ++j) p += b[n - j] * f[j];
        if (s > 0 && n + 1 > s) {
            for (std::size_t i = 0; i <= s; ++i) p += sw.predictor(i, n + 1) * f[i];
        }
        return CVector(x0 + ha * p);
    };
    // history part of the corrector for node m: everything except f_m
    auto history = [&](std::size_t m, std::size_t known) {
        CVector acc = c.start[m] * f[0];
        for (std::size_t j = 1; j < m && j < known; ++j) acc += c.conv[m - j] * f[j];
        return acc;
    };
    auto diverged_at = [&](const CVector& v, std::size_t index) {
        const double norm = v.norm();
        if (std::isfinite(norm) && norm <= kDivergenceCap) return false;
        tr.diverged = true;
        tr.cut_index = index;
        return true;
    };

    std::size_t n = 0;
    if (s > 0) {
        // plain PECE start, then fixed-point sweeps on the coupled first s nodes
        bool ok = true;
        for (; n < s && ok; ++n) {
            const CVector p = predict(n);
            x.push_back(x0 + ha * (history(n + 1, n + 1) + c.conv[0] * rhs(p)));
            f.push_back(rhs(x.back()));
            ok = x.back().allFinite();
        }
        bool converged = false;
        for (int sweep = 0; sweep < kStartSweeps && ok; ++sweep) {
            double change = 0.0, size = 0.0;
            std::vector<CVector> next(s + 1);
            for (std::size_t m = 1; m <= s; ++m) {
                CVector acc = c.start[m] * f[0];
                for (std::size_t j = 1; j <= m; ++j) acc += c.conv[m - j] * f[j];
                for (std::size_t i = 0; i <= s; ++i) acc += sw.corrector(i, m) * f[i];
                next[m] = x0 + ha * acc;
                change = std::max(change, (next[m] - x[m]).norm());
                size = std::max(size, next[m].norm());
            }
            for (std::size_t m = 1; m <= s; ++m) {
                x[m] = next[m];
                f[m] = rhs(x[m]);
                ok = ok && x[m].allFinite();
            }
            if (change <= kStartTolerance * (1.0 + size)) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            // the coupled start did not settle; fall back to the plain scheme
            SolverOptions plain = options;
            plain.starting_correction = false;
            return simulate_rhs(rhs, x0, order, horizon, steps, plain);
        }
        for (std::size_t m = 1; m <= s; ++m) {
            if (diverged_at(x[m], m)) {
                x.resize(m);
                f.resize(m);
                tr.t_nodes.resize(m);
                finish(tr);
                return tr;
            }
        }
    }

    for (; n < steps; ++n) {
        const CVector p = predict(n);
        CVector acc = history(n + 1, n + 1) + c.conv[0] * rhs(p);
        if (s > 0 && n + 1 > s) {
            for (std::size_t i = 0; i <= s; ++i) acc += sw.corrector(i, n + 1) * f[i];
        }
        CVector next = x0 + ha * acc;
        if (diverged_at(next, n + 1)) break;
        f.push_back(rhs(next));
        x.push_back(std::move(next));
    }
    tr.t_nodes.resize(x.size());
    finish(tr);
    return tr;
}

Trajectory simulate(const Eigen::MatrixXd& a, const RHS& f, const CVector& x0, const FracOrder& order,
                    double horizon, std::size_t steps, const SolverOptions& options) {
    if (a.rows() != a.cols() || a.rows() != x0.size()) throw DomainError("simulate: A and x0 dimensions differ");
    const Eigen::MatrixXcd ac = a.cast<cplx>();
    RHS rhs = [&](const CVector& x) -> CVector {
        if (f) return ac * x + f(x);
        return ac * x;
    };
    return simulate_rhs(rhs, x0, order, horizon, steps, options);
}

}  // namespace ckstab::dynamics
