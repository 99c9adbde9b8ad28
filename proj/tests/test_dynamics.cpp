#include <cmath>
#include <vector>

#include "ckstab/dynamics.hpp"
#include "ckstab/errors.hpp"
#include "ckstab/fraccalc.hpp"
#include "ckstab/specfun.hpp"
#include "doctest.h"

using namespace ckstab;
using namespace ckstab::dynamics;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

CVector vec(std::initializer_list<cplx> v) {
    CVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const auto& x : v) out(i++) = x;
    return out;
}

Eigen::MatrixXd lorenz_closed_loop() {
    Eigen::MatrixXd a(3, 3);
    a << -8, 8, 0, 26, -43, 0, 0, 0, -3;
    return a;
}

CVector lorenz_g(const CVector& x) { return vec({0.0, -x(0) * x(2), x(0) * x(1)}); }

// Textbook fractional Adams-Bashforth-Moulton for the classical Caputo
// problem D^alpha y = f(y) on t in [0, T], written out directly from the
// product-rectangle predictor and product-trapezoid corrector formulas.
std::vector<double> classical_abm(double alpha, double lambda, double y0, double big_t, int n) {
    const double h = big_t / n;
    auto f = [&](double y) { return lambda * y; };
    std::vector<double> y(n + 1), fy(n + 1);
    y[0] = y0;
    fy[0] = f(y0);
    const double c1 = std::pow(h, alpha) / std::tgamma(alpha + 1.0);
    const double c2 = std::pow(h, alpha) / std::tgamma(alpha + 2.0);
    for (int k = 0; k < n; ++k) {
        double pred = y0;
        for (int j = 0; j <= k; ++j) pred += c1 * (std::pow(k + 1 - j, alpha) - std::pow(k - j, alpha)) * fy[j];
        double corr = y0 + c2 * (std::pow(k, alpha + 1) - (k - alpha) * std::pow(k + 1, alpha)) * fy[0];
        for (int j = 1; j <= k; ++j) {
            corr += c2 * (std::pow(k - j + 2, alpha + 1) + std::pow(k - j, alpha + 1) - 2 * std::pow(k - j + 1, alpha + 1)) * fy[j];
        }
        corr += c2 * f(pred);
        y[k + 1] = corr;
        fy[k + 1] = f(corr);
    }
    return y;
}

double measured_order(const std::vector<double>& errors) {
    // slope of log error against log N for successive doublings
    double worst = 1e300;
    for (std::size_t i = 1; i < errors.size(); ++i) worst = std::min(worst, std::log2(errors[i - 1] / errors[i]));
    return worst;
}

}  // namespace

TEST_CASE("solve_linear_scalar: unforced solution is the Mittag-Leffler function") {
    const FracOrder order{0.9, 1.2, 1.0};
    const auto grid = fraccalc::make_grid(order, 3.0, 64);
    const auto tr = solve_linear_scalar(-1.0, 1.0, order, grid);
    CHECK(tr.t_nodes.front() == 1.0);
    CHECK(std::fabs(tr.t_nodes.back() - 3.0) < 1e-12);
    for (std::size_t k = 0; k < grid.size; ++k) {
        const double w = order.to_w(tr.t_nodes[k]);
        CHECK(std::abs(tr.states[k](0) - specfun::mittag_leffler(0.9, -std::pow(w, 0.9))) <= 1e-12);
    }
    // Oracle: 60-digit series value of E_0.9(-W^0.9), W = (3^1.2 - 1)/1.2.
    CHECK(std::fabs(tr.states.back()(0).real() - 0.15176767783883644) <= 1e-10);
    CHECK(tr.sup_norm == doctest::Approx(1.0));
}

TEST_CASE("solve_linear_scalar: lambda = 0 reduces to c plus the fractional integral") {
    const FracOrder order{0.6, 0.8, 1.0};
    const auto grid = fraccalc::make_grid(order, 4.0, 200);
    fraccalc::ComplexSamples h{grid, std::vector<cplx>(grid.size)};
    fraccalc::RealSamples hr{grid, std::vector<double>(grid.size)};
    for (std::size_t k = 0; k < grid.size; ++k) {
        hr.values[k] = std::cos(grid.node(k));
        h.values[k] = hr.values[k];
    }
    const auto tr = solve_linear_scalar(0.0, 2.0, order, grid, h);
    const auto integral = fraccalc::katugampola_integral(hr, order, 0.6);
    for (std::size_t k = 0; k < grid.size; ++k) {
        CHECK(std::abs(tr.states[k](0) - (2.0 + integral.values[k])) <= 1e-12);
    }
}

TEST_CASE("solve_linear_scalar: constant forcing is integrated exactly") {
    // u = c E_alpha(lambda W^alpha) + W^alpha E_{alpha,alpha+1}(lambda W^alpha) for h = 1
    const FracOrder order{0.7, 1.3, 0.5};
    const cplx lambda(-1.5, 0.4);
    const auto grid = fraccalc::make_grid(order, 3.0, 300);
    fraccalc::ComplexSamples h{grid, std::vector<cplx>(grid.size, 1.0)};
    const auto tr = solve_linear_scalar(lambda, 0.5, order, grid, h);
    for (std::size_t k = 0; k < grid.size; k += 7) {
        const double w = grid.node(k);
        const cplx z = lambda * std::pow(w, 0.7);
        const cplx want = 0.5 * specfun::mittag_leffler(0.7, z) + std::pow(w, 0.7) * specfun::mittag_leffler({0.7, 1.7}, z);
        CHECK(std::abs(tr.states[k](0) - want) <= 1e-10);
    }
}

TEST_CASE("solve_linear_scalar: forcing on another grid is rejected") {
    const FracOrder order{0.7, 1.0, 1.0};
    const auto grid = fraccalc::make_grid(order, 3.0, 30);
    const auto other = fraccalc::make_grid(order, 3.0, 31);
    fraccalc::ComplexSamples h{other, std::vector<cplx>(other.size, 1.0)};
    CHECK_THROWS_AS(solve_linear_scalar(-1.0, 1.0, order, grid, h), GridError);
}

TEST_CASE("simulate: zero dynamics keep the initial state") {
    const FracOrder order{0.5, 1.2, 1.0};
    const CVector x0 = vec({1.5, -2.0, 0.25});
    const auto tr = simulate(Eigen::MatrixXd::Zero(3, 3), nullptr, x0, order, 4.0, 64);
    CHECK(tr.size() == 65);
    for (const auto& s : tr.states) CHECK((s - x0).norm() == 0.0);
    CHECK_FALSE(tr.diverged);
}

TEST_CASE("simulate: time grid reproduces its endpoints") {
    for (double rho : {0.5, 1.0, 1.7}) {
        const FracOrder order{0.8, rho, 2.0};
        const auto tr = simulate(scalar(-1.0), nullptr, vec({1.0}), order, 9.0, 100);
        CHECK(std::fabs(tr.t_nodes.front() - 2.0) <= 1e-12);
        CHECK(std::fabs(tr.t_nodes.back() - 9.0) <= 1e-12);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const double expected = std::pow(rho * tr.grid.node(k) + std::pow(2.0, rho), 1.0 / rho);
            CHECK(std::fabs(tr.t_nodes[k] - expected) <= 1e-12 * expected);
        }
    }
}

TEST_CASE("simulate: matches the closed form for lambda = -1, alpha = 0.9, rho = 1.2") {
    const FracOrder order{0.9, 1.2, 1.0};
    const auto sim = simulate(scalar(-1.0), nullptr, vec({1.0}), order, 3.0, 4096);
    const auto exact = solve_linear_scalar(-1.0, 1.0, order, sim.grid);
    CHECK(sim.distance(exact) <= 1e-4);
}

TEST_CASE("simulate: closed-form lattice and convergence order") {
    for (double lambda : {-0.5, -2.0}) {
        for (double alpha : {0.4, 0.9}) {
            for (double rho : {0.8, 1.0, 1.2}) {
                const FracOrder order{alpha, rho, 1.0};
                std::vector<double> errors;
                for (std::size_t n : {512u, 1024u, 2048u}) {
                    const auto sim = simulate(scalar(lambda), nullptr, vec({1.0}), order, 5.0, n);
                    errors.push_back(sim.distance(solve_linear_scalar(lambda, 1.0, order, sim.grid)));
                }
                INFO("lambda=" << lambda << " alpha=" << alpha << " rho=" << rho << " err=" << errors.back());
                CHECK(errors.back() <= 1e-3);
                CHECK(measured_order(errors) >= 0.9);
            }
        }
    }
}

TEST_CASE("simulate: complex right-hand side against the complex closed form") {
    const FracOrder order{0.75, 1.1, 1.0};
    const cplx lambda(-1.0, 2.0);
    const RHS rhs = [&](const CVector& x) { return CVector(lambda * x); };
    const auto sim = simulate_rhs(rhs, vec({cplx(0.5, -0.5)}), order, 4.0, 2048);
    const auto exact = solve_linear_scalar(lambda, cplx(0.5, -0.5), order, sim.grid);
    CHECK(sim.distance(exact) <= 1e-3);
}

TEST_CASE("simulate: rho = 1 without correction is the classical Adams scheme") {
    const double alpha = 0.6, lambda = -1.3, t0 = 2.0, horizon = 5.0;
    const int n = 300;
    const auto reference = classical_abm(alpha, lambda, 0.8, horizon - t0, n);
    SolverOptions plain;
    plain.starting_correction = false;
    const auto tr = simulate(scalar(lambda), nullptr, vec({0.8}), FracOrder{alpha, 1.0, t0}, horizon, n, plain);
    REQUIRE(tr.size() == reference.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        CHECK(std::fabs(tr.states[k](0).real() - reference[k]) <= 1e-12);
        CHECK(std::fabs(tr.t_nodes[k] - (t0 + (horizon - t0) * k / n)) <= 1e-12);
    }
}

TEST_CASE("simulate: the starting correction reduces the error for small alpha") {
    SolverOptions plain;
    plain.starting_correction = false;
    for (double alpha : {0.3, 0.6}) {
        const FracOrder order{alpha, 1.0, 1.0};
        const auto corrected = simulate(scalar(-2.0), nullptr, vec({1.0}), order, 5.0, 2048);
        const auto uncorrected = simulate(scalar(-2.0), nullptr, vec({1.0}), order, 5.0, 2048, plain);
        const auto exact = solve_linear_scalar(-2.0, 1.0, order, corrected.grid);
        INFO("alpha=" << alpha);
        CHECK(corrected.distance(exact) < 0.2 * uncorrected.distance(exact));
    }
}

TEST_CASE("simulate: divergence is reported, not thrown") {
    const FracOrder order{0.8, 1.0, 1.0};
    const RHS blowup = [](const CVector& x) { return CVector(x.array().square()); };
    const auto tr = simulate(scalar(0.0), blowup, vec({1.0}), order, 10.0, 2000);
    CHECK(tr.diverged);
    CHECK(tr.cut_index == tr.size());
    CHECK(tr.cut_index < 2001);
    CHECK(tr.sup_norm <= kDivergenceCap);
    CHECK(tr.t_nodes.size() == tr.size());
}

TEST_CASE("simulate: argument errors") {
    const FracOrder order{0.8, 1.0, 1.0};
    CHECK_THROWS_AS(simulate(scalar(-1.0), nullptr, vec({1.0}), order, 2.0, 15), GridError);
    CHECK_THROWS_AS(simulate(scalar(-1.0), nullptr, vec({1.0}), order, 0.5, 100), GridError);
    CHECK_THROWS_AS(simulate(scalar(-1.0), nullptr, vec({1.0}), FracOrder{1.2, 1.0, 1.0}, 2.0, 100), OrderError);
    CHECK_THROWS_AS(simulate(Eigen::MatrixXd::Zero(2, 2), nullptr, vec({1.0}), order, 2.0, 100), DomainError);
}

TEST_CASE("simulate: controlled Lorenz system decays") {
    const FracOrder order{0.9, 1.2, 1.0};
    // h^alpha * 48.18 must stay below the explicit stability limit
    const auto tr = simulate(lorenz_closed_loop(), lorenz_g, vec({0.1, 0.1, 0.1}), order, 51.0, 4096);
    CHECK_FALSE(tr.diverged);
    CHECK(tr.states.back().norm() < 1e-2);
    CHECK(tr.states.back().norm() < 0.1 * tr.states.front().norm());
}

TEST_CASE("simulate: small initial states scale linearly") {
    const FracOrder order{0.9, 1.2, 1.0};
    const CVector x0 = vec({1e-3, 1e-3, 1e-3}) / std::sqrt(3.0);
    const auto full = simulate(lorenz_closed_loop(), lorenz_g, x0, order, 51.0, 4096);
    const auto half = simulate(lorenz_closed_loop(), lorenz_g, x0 / 2.0, order, 51.0, 4096);
    const double ratio = half.sup_norm / full.sup_norm;
    CHECK(std::fabs(ratio / 0.5 - 1.0) <= 0.1);
}
