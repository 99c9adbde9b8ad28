#include "ckstab/perron.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <sstream>

#include "ckstab/errors.hpp"
#include "ckstab/specfun.hpp"

namespace ckstab::perron {

namespace {

constexpr double kPanelRatio = 1.4142135623730951;
constexpr int kMaxPanels = 400;
constexpr double kPanelTolerance = 1e-13;
constexpr int kMaxBisections = 30;
constexpr int kSupSamples = 4000;
constexpr double kSupDecades = 10.0;
constexpr int kMaxSupExtensions = 40;
constexpr double kNearDiagonal = 1e-6;
constexpr int kSuggestHalvings = 40;

void check_alpha(double alpha, const FracOrder& order, const char* who) {
    order.validate_derivative_order();
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream os;
        os << who << ": alpha must lie in (0, 1), got " << alpha;
        throw OrderError(os.str());
    }
}

// |E_alpha| beyond |z| is at most this: the algebraic tail plus, while a
// branch of z^{1/alpha} is visible, the decaying exponential contribution.
double supE_envelope(double alpha, cplx lambda, double u) {
    const double mod = std::abs(lambda) * u;
    const double theta = std::fabs(specfun::principal_arg(lambda));
    double env = 2.0 / (mod * std::fabs(std::tgamma(1.0 - alpha)));
    if (theta < alpha * std::numbers::pi) env += std::exp(std::pow(mod, 1.0 / alpha) * std::cos(theta / alpha)) / alpha;
    return env;
}

// Gauss-Legendre 30 against 20 points, bisecting where they disagree.
template <class F>
double panel_integral(const F& f, double a, double b, double scale, int depth = 0) {
    using boost::math::quadrature::gauss;
    const double fine = gauss<double, 30>::integrate(f, a, b);
    const double coarse = gauss<double, 20>::integrate(f, a, b);
    if (std::fabs(fine - coarse) <= kPanelTolerance * (std::fabs(fine) + scale) || depth >= kMaxBisections) return fine;
    const double mid = 0.5 * (a + b);
    return panel_integral(f, a, mid, scale, depth + 1) + panel_integral(f, mid, b, scale, depth + 1);
}

double cplx_abs_ml(double alpha, cplx lambda, double u) { return std::abs(specfun::mittag_leffler(alpha, lambda * u)); }

// Point of the closed complex ball of radius r in C^d from 2d + 1 uniforms.
CVector ball_point(const std::vector<double>& u, std::size_t offset, int d, double r) {
    CVector x(d);
    for (int i = 0; i < d; ++i) {
        auto normal = [&](std::size_t k) {
            const double v = std::clamp(u[offset + 1 + k], 1e-15, 1.0 - 1e-15);
            return std::numbers::sqrt2 * boost::math::erf_inv(2.0 * v - 1.0);
        };
        x(i) = cplx(normal(2 * i), normal(2 * i + 1));
    }
    const double norm = x.norm();
    if (norm == 0.0) return CVector::Zero(d);
    return x * (r * std::pow(u[offset], 1.0 / (2.0 * d)) / norm);
}

dynamics::Trajectory make_trajectory(const FracOrder& order, const fraccalc::WGrid& grid, std::vector<CVector> states) {
    dynamics::Trajectory tr{order, grid, fraccalc::time_nodes(order, grid), std::move(states)};
    tr.cut_index = grid.size;
    for (const auto& s : tr.states) tr.sup_norm = std::max(tr.sup_norm, s.norm());
    return tr;
}

}  // namespace

IntegralBound integral_bound(double alpha, cplx lambda, const FracOrder& order) {
    check_alpha(alpha, order, "estimate_C");
    const auto tail = specfun::tail_constants(alpha, lambda);

    // With u = v^alpha the integrand v^{alpha-1} |E_{alpha,alpha}(lambda v^alpha)| dv
    // becomes |E_{alpha,alpha}(lambda u)| du / alpha, smooth at the origin.
    auto integrand = [&](double u) { return std::abs(specfun::mittag_leffler({alpha, alpha}, lambda * u)) / alpha; };
    const double scale = 1.0 / std::abs(lambda);
    const double u_onset = std::pow(tail.t1, alpha);

    IntegralBound out;
    double a = 0.0, b = scale / 64.0, sum = 0.0;
    for (int panel = 0; panel < kMaxPanels; ++panel) {
        sum += panel_integral(integrand, a, b, sum);
        const double tail_value = tail.M / (alpha * b);  // M / (alpha V^alpha) with V^alpha = b
        if (b >= u_onset && tail_value <= kTailFraction * sum) {
            out.tail = tail_value;
            out.C = sum + tail_value;
            out.w_max = std::pow(b, 1.0 / alpha);
            return out;
        }
        a = b;
        b *= kPanelRatio;
    }
    throw ConvergenceError("estimate_C: tail did not fall below the truncation tolerance", tail.M / (alpha * a));
}

double estimate_C(double alpha, cplx lambda, const FracOrder& order) { return integral_bound(alpha, lambda, order).C; }

double estimate_supE(double alpha, cplx lambda, const FracOrder& order) {
    check_alpha(alpha, order, "estimate_supE");
    specfun::tail_constants(alpha, lambda);  // sector check

    const double scale = 1.0 / std::abs(lambda);
    double best = 1.0;  // E_alpha(0)
    double best_u = 0.0;
    double lo = scale * 1e-4;
    std::vector<double> us(kSupSamples);
    for (int extension = 0; extension < kMaxSupExtensions; ++extension) {
        for (int j = 0; j < kSupSamples; ++j) us[j] = lo * std::pow(10.0, kSupDecades * j / (kSupSamples - 1));
        for (int j = 0; j < kSupSamples; ++j) {
            const double v = cplx_abs_ml(alpha, lambda, us[j]);
            if (v > best) {
                best = v;
                best_u = us[j];
            }
        }
        if (supE_envelope(alpha, lambda, us.back()) < best) break;
        if (extension + 1 == kMaxSupExtensions) {
            throw ConvergenceError("estimate_supE: envelope did not fall below the sampled supremum",
                                   supE_envelope(alpha, lambda, us.back()));
        }
        lo = us.back();
    }
    if (best_u > 0.0) {
        const double step = std::pow(10.0, kSupDecades / (kSupSamples - 1));
        auto neg = [&](double u) { return -cplx_abs_ml(alpha, lambda, u); };
        const auto m = boost::math::tools::brent_find_minima(neg, best_u / step, best_u * step, 50);
        best = std::max(best, -m.second);
    }
    return best;
}

LipschitzEstimate local_lipschitz(const spectral::VectorFn& h, int dim, double r, const LipschitzOptions& options) {
    if (options.analytic) {
        if (!(*options.analytic >= 0.0) || !std::isfinite(*options.analytic)) {
            throw DomainError("local_lipschitz: analytic bound must be finite and nonnegative");
        }
        return {*options.analytic, false, 0};
    }
    if (dim < 1) throw DomainError("local_lipschitz: dimension must be positive");
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("local_lipschitz: radius must be positive");
    if (options.samples < kMinLipschitzSamples) {
        std::ostringstream os;
        os << "local_lipschitz: need at least " << kMinLipschitzSamples << " samples, got " << options.samples;
        throw DomainError(os.str());
    }
    LipschitzEstimate out;
    if (!h) return out;

    auto eval = [&](const CVector& x) {
        CVector y = h(x);
        if (y.size() != dim || !y.allFinite()) {
            std::ostringstream os;
            os << "local_lipschitz: h is not finite at a point of norm " << x.norm();
            throw DomainError(os.str());
        }
        return y;
    };
    auto quotient = [&](const CVector& x, const CVector& y) {
        const double dist = (x - y).norm();
        if (dist == 0.0) return 0.0;
        ++out.pairs;
        return (eval(x) - eval(y)).norm() / dist;
    };

    const std::size_t per_point = 2 * static_cast<std::size_t>(dim) + 1;
    boost::random::sobol sobol(2 * per_point);
    const double range = static_cast<double>(sobol.max() - sobol.min()) + 1.0;
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit;
    std::vector<double> shift(2 * per_point), u(2 * per_point);
    for (auto& s : shift) s = unit(rng);
    for (std::size_t k = 0; k < u.size(); ++k) sobol();  // drop the origin point

    const double eps = kNearDiagonal * r;
    for (std::size_t i = 0; i < options.samples; ++i) {
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double v = static_cast<double>(sobol() - sobol.min()) / range + shift[k];
            u[k] = v - std::floor(v);
        }
        const CVector x = ball_point(u, 0, dim, r);
        CVector y = ball_point(u, per_point, dim, r);
        out.value = std::max(out.value, quotient(x, y));

        CVector dir = y;
        if (dir.norm() == 0.0) dir = CVector::Ones(dim);
        dir.normalize();
        CVector near = x + eps * dir;
        if (near.norm() > r) near = x - eps * dir;
        CVector base = x;
        const double outer = std::max(base.norm(), near.norm());
        if (outer > r) {
            base *= r / outer;
            near *= r / outer;
        }
        out.value = std::max(out.value, quotient(base, near));
    }
    return out;
}

PerronOperator::PerronOperator(const spectral::ModalSystem& ms, const FracOrder& order, const fraccalc::WGrid& grid)
    : ms_(ms), order_(order), grid_(grid) {
    order_.validate_derivative_order();
    grid_.validate();
    const CVector lambdas = ms_.diagonal();
    std::vector<cplx> distinct;
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
        const auto it = std::find(distinct.begin(), distinct.end(), lambdas(j));
        weight_index_.push_back(static_cast<std::size_t>(it - distinct.begin()));
        if (it == distinct.end()) distinct.push_back(lambdas(j));
    }
    const double alpha = order_.alpha;
    for (const cplx& l : distinct) {
        weights_.push_back(fraccalc::ml_product_weights(alpha, l, grid_.step, grid_.intervals()));
        std::vector<cplx> e(grid_.size);
        for (std::size_t n = 0; n < grid_.size; ++n) e[n] = specfun::mittag_leffler(alpha, l * std::pow(grid_.node(n), alpha));
        free_.push_back(std::move(e));
    }
}

dynamics::Trajectory PerronOperator::constant(const CVector& x) const {
    return make_trajectory(order_, grid_, std::vector<CVector>(grid_.size, x));
}

dynamics::Trajectory PerronOperator::apply(const CVector& x, const dynamics::Trajectory& xi) const {
    const int d = ms_.dim();
    if (x.size() != d) throw DomainError("lp_apply: initial value has the wrong dimension");
    if (xi.states.size() != grid_.size || std::fabs(xi.grid.step - grid_.step) > 1e-12 * grid_.step) {
        throw GridError("lp_apply: trajectory is not sampled on the operator grid");
    }
    std::vector<std::vector<cplx>> hv(d, std::vector<cplx>(grid_.size));
    for (std::size_t n = 0; n < grid_.size; ++n) {
        if (xi.states[n].size() != d) throw GridError("lp_apply: trajectory state has the wrong dimension");
        const CVector hn = ms_.h(xi.states[n]);
        for (int j = 0; j < d; ++j) hv[j][n] = hn(j);
    }
    std::vector<CVector> out(grid_.size, CVector(d));
    for (int j = 0; j < d; ++j) {
        const std::size_t w = weight_index_[j];
        for (std::size_t n = 0; n < grid_.size; ++n) out[n](j) = free_[w][n] * x(j) + weights_[w].apply(hv[j], n);
    }
    return make_trajectory(order_, grid_, std::move(out));
}

dynamics::Trajectory lp_apply(const spectral::ModalSystem& ms, const CVector& x, const dynamics::Trajectory& xi,
                              const FracOrder& order) {
    return PerronOperator(ms, order, xi.grid).apply(x, xi);
}

ContractionCertificate certify(const spectral::Matrix& a, const spectral::VectorFn& f, const FracOrder& order, double r,
                               const CertifyOptions& options) {
    order.validate_derivative_order();
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("certify: radius must be positive and finite");
    const auto report = spectral::sector_check(a, order.alpha);
    if (!report.stable) {
        std::ostringstream os;
        os << "certify: spectrum " << spectral::to_string(report.verdict) << " for alpha = " << order.alpha
           << " (sector margin " << report.margin << ")";
        throw UnstableSpectrumError(os.str(), report.verdict == spectral::Verdict::Inconclusive);
    }

    // The block eigenvalues do not depend on delta.
    const auto probe = spectral::modal_transform(a, nullptr, 1.0, options.hint);
    ContractionCertificate cert;
    cert.r = r;
    for (const auto& b : probe.blocks()) cert.eigenvalues.push_back(b.lambda);

    struct BlockConstants {
        IntegralBound bound;
        double supE;
    };
    std::vector<std::future<BlockConstants>> jobs;
    for (const cplx& l : cert.eigenvalues) {
        jobs.push_back(std::async(std::launch::async, [&order, l] {
            return BlockConstants{integral_bound(order.alpha, l, order), estimate_supE(order.alpha, l, order)};
        }));
    }
    double w_max = 0.0;
    for (auto& job : jobs) {
        const auto bc = job.get();
        cert.C_per_block.push_back(bc.bound.C);
        cert.supE_per_block.push_back(bc.supE);
        cert.C = std::max(cert.C, bc.bound.C);
        cert.supE = std::max(cert.supE, bc.supE);
        w_max = std::max(w_max, bc.bound.w_max);
    }
    cert.t_max = order.to_t(w_max);
    cert.delta = 1.0 / (2.0 * cert.C);

    const auto ms = spectral::modal_transform(a, f, cert.delta, options.hint);
    cert.cond_TP = ms.cond_TP();
    auto h = [&ms](const CVector& y) { return ms.h(y); };
    const auto lip = local_lipschitz(h, ms.dim(), r, options.lipschitz);
    cert.lip_h = lip.value;
    cert.numerical = lip.lower_estimate;
    cert.q = cert.C * cert.lip_h;
    cert.valid = cert.q < 1.0;
    if (cert.valid) {
        cert.r_star = r * (1.0 - cert.q) / cert.supE;
    } else {
        LipschitzOptions sampled = options.lipschitz;
        sampled.analytic.reset();
        for (int k = 1; k <= kSuggestHalvings; ++k) {
            const double rk = std::ldexp(r, -k);
            if (cert.C * local_lipschitz(h, ms.dim(), rk, sampled).value < 1.0) {
                cert.suggested_r = rk;
                break;
            }
        }
    }
    return cert;
}

spectral::ModalSystem certified_system(const spectral::Matrix& a, const spectral::VectorFn& f,
                                       const ContractionCertificate& cert, const CertifyOptions& options) {
    return spectral::modal_transform(a, f, cert.delta, options.hint);
}

std::vector<double> PicardResult::ratios(double floor) const {
    std::vector<double> out;
    for (std::size_t k = 1; k < residuals.size(); ++k) {
        if (residuals[k - 1] > floor && residuals[k] > floor) out.push_back(residuals[k] / residuals[k - 1]);
    }
    return out;
}

PicardResult picard_iterate(const spectral::ModalSystem& ms, const CVector& x, const FracOrder& order,
                            const fraccalc::WGrid& grid, const PicardOptions& options) {
    if (options.max_iter < 1) throw DomainError("picard_iterate: max_iter must be positive");
    const PerronOperator op(ms, order, grid);
    PicardResult result{op.constant(x), {}, false, {}};
    if (options.certificate && x.norm() > options.certificate->r_star) {
        std::ostringstream os;
        os << "initial value norm " << x.norm() << " exceeds the certified radius " << options.certificate->r_star;
        result.warning = os.str();
    }
    for (int k = 0; k < options.max_iter; ++k) {
        auto next = op.apply(x, result.trajectory);
        const double residual = next.distance(result.trajectory);
        result.residuals.push_back(residual);
        result.trajectory = std::move(next);
        if (residual <= options.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace ckstab::perron
