// Acceptance run: one PASS/FAIL line per criterion with its runtime.
// Exit status is the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ckstab/cli.hpp"
#include "ckstab/dynamics.hpp"
#include "ckstab/fraccalc.hpp"
#include "ckstab/perron.hpp"
#include "ckstab/specfun.hpp"
#include "ckstab/spectral.hpp"
#include "json.hpp"

using namespace ckstab;
using perron::CVector;
using perron::cplx;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

void require(Outcome& o, bool ok, const std::string& what) {
    if (!ok) {
        o.pass = false;
        o.detail += (o.detail.empty() ? "" : "; ") + what;
    }
}

spectral::Matrix lorenz_closed_loop() {
    spectral::Matrix a(3, 3);
    a << -8, 8, 0, 26, -43, 0, 0, 0, -3;
    return a;
}

CVector lorenz_g(const CVector& x) {
    CVector out(3);
    out << 0.0, -x(0) * x(2), x(0) * x(1);
    return out;
}

const FracOrder kLorenzOrder{0.9, 1.2, 1.0};
constexpr double kLorenzHorizon = 51.0;

double rel_err(cplx got, double want) { return std::abs(got - want) / std::max(std::fabs(want), 1e-300); }

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double sup_norm(const dynamics::Trajectory& tr) {
    double s = 0.0;
    for (const auto& v : tr.states) s = std::max(s, v.norm());
    return s;
}

Outcome eigenvalues() {
    Outcome o;
    const auto dir = std::filesystem::temp_directory_path() / "ckstab-acceptance";
    setenv("CKSTAB_OUT", dir.c_str(), 1);
    const char* argv[] = {"ckstab", "demo-lorenz"};
    std::ostringstream out, err;
    const int code = cli::run(2, argv, out, err);
    require(o, code == cli::kOk, "exit code " + std::to_string(code));
    if (code != cli::kOk) return o;
    const auto j = nlohmann::json::parse(out.str());
    std::vector<double> got;
    double imag = 0.0;
    for (const auto& e : j["spectrum"]["eigenvalues"]) {
        got.push_back(e["re"].get<double>());
        imag = std::max(imag, std::fabs(e["im"].get<double>()));
    }
    std::sort(got.begin(), got.end());
    const std::vector<double> want{-48.1771, -3.0, -2.8229};
    double worst = imag;
    require(o, got.size() == 3, "expected three eigenvalues");
    for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) worst = std::max(worst, std::fabs(got[i] - want[i]));
    require(o, worst <= 1e-3, "eigenvalue error " + fmt("%.3g", worst));
    require(o, j["spectrum"]["verdict"] == "stable", "verdict not stable");
    o.detail = o.pass ? "max eigenvalue error " + fmt("%.2e", worst) + ", verdict stable" : o.detail;
    return o;
}

Outcome power_rule() {
    Outcome o;
    double worst = 0.0;
    std::string where;
    for (double beta : {0.0, 0.5, 1.0, 2.0}) {
        for (double alpha : {0.3, 0.9}) {
            for (double rho : {0.5, 1.0, 1.2}) {
                const FracOrder order{alpha, rho, 1.0};
                const auto grid = fraccalc::make_grid(order, 3.0, 4096);
                const auto f = fraccalc::sample_w(grid, [&](double w) { return std::pow(w, beta); });
                const auto got = fraccalc::katugampola_integral(f, order, alpha);
                std::vector<double> err(grid.size), exact(grid.size);
                for (std::size_t k = 0; k < grid.size; ++k) {
                    const double w = grid.node(k);
                    exact[k] = std::tgamma(beta + 1.0) / std::tgamma(alpha + beta + 1.0) * std::pow(w, alpha + beta);
                    err[k] = got.values[k] - exact[k];
                }
                const double e = sup_abs(err) / sup_abs(exact);
                if (e > 1e-5) {
                    require(o, false,
                            "beta=" + fmt("%g", beta) + " alpha=" + fmt("%g", alpha) + " rho=" + fmt("%g", rho) + " rel error " + fmt("%.2e", e));
                }
                worst = std::max(worst, e);
            }
        }
    }
    if (o.pass) o.detail = "max relative error " + fmt("%.2e", worst);
    return o;
}

Outcome semigroup_and_constants() {
    Outcome o;
    const FracOrder order{0.5, 1.2, 1.0};
    const auto grid = fraccalc::make_grid(order, 6.0, 4096);
    const auto f = fraccalc::sample_w(grid, [](double w) { return std::sin(w); });
    const auto lhs = fraccalc::katugampola_integral(fraccalc::katugampola_integral(f, order, 0.4), order, 0.3);
    const auto rhs = fraccalc::katugampola_integral(f, order, 0.7);
    std::vector<double> err(grid.size);
    for (std::size_t k = 0; k < grid.size; ++k) err[k] = lhs.values[k] - rhs.values[k];
    const double semigroup = sup_abs(err);
    require(o, semigroup <= 1e-4, "semigroup error " + fmt("%.2e", semigroup));

    double constant = 0.0;
    for (double alpha : {0.3, 0.7, 0.9}) {
        for (double rho : {0.5, 1.0, 1.2}) {
            const FracOrder ord{alpha, rho, 1.0};
            const auto g = fraccalc::make_grid(ord, 5.0, 4096);
            const auto d = fraccalc::ck_derivative(fraccalc::sample_w(g, [](double) { return 5.0; }), ord, true);
            constant = std::max(constant, sup_abs(d.values));
        }
    }
    require(o, constant <= 1e-12, "constant rule error " + fmt("%.2e", constant));
    if (o.pass) o.detail = "semigroup " + fmt("%.2e", semigroup) + ", constant rule " + fmt("%.2e", constant);
    return o;
}

Outcome ml_identities() {
    Outcome o;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = -10.0 + 20.0 * i / 199.0;
        worst = std::max(worst, rel_err(specfun::mittag_leffler({1.0, 1.0}, x), std::exp(x)));
        const double y = 5.0 * i / 199.0;
        worst = std::max(worst, rel_err(specfun::mittag_leffler({2.0, 1.0}, -y * y), std::cos(y)));
        const double z = -5.0 + 10.0 * i / 199.0;
        if (z != 0.0) worst = std::max(worst, rel_err(specfun::mittag_leffler({1.0, 2.0}, z), std::expm1(z) / z));
        const double alpha = 0.1 + 2.9 * (i % 20) / 19.0, beta = 0.2 + 6.8 * (i / 20) / 9.0;
        worst = std::max(worst, rel_err(specfun::mittag_leffler({alpha, beta}, 0.0), 1.0 / std::tgamma(beta)));
    }
    require(o, worst <= 1e-10, "max relative error " + fmt("%.2e", worst));
    if (o.pass) o.detail = "max relative error " + fmt("%.2e", worst) + " over 4 x 200 points";
    return o;
}

double measured_order(const std::vector<double>& errors) {
    double worst = 1e300;
    for (std::size_t i = 1; i < errors.size(); ++i) worst = std::min(worst, std::log2(errors[i - 1] / errors[i]));
    return worst;
}

Outcome simulator_oracle() {
    Outcome o;
    double worst_err = 0.0, worst_order = 1e300;
    for (double lambda : {-0.5, -2.0}) {
        for (double alpha : {0.4, 0.9}) {
            for (double rho : {0.8, 1.0, 1.2}) {
                const FracOrder order{alpha, rho, 1.0};
                std::vector<double> errors;
                for (std::size_t n : {512u, 1024u, 2048u}) {
                    const auto sim = dynamics::simulate(spectral::Matrix::Constant(1, 1, lambda), nullptr, CVector::Constant(1, 1.0), order, 5.0, n);
                    errors.push_back(sim.distance(dynamics::solve_linear_scalar(lambda, 1.0, order, sim.grid)));
                }
                const double p = measured_order(errors);
                if (errors.back() > 1e-3 || p < 0.9) {
                    require(o, false,
                            "lambda=" + fmt("%g", lambda) + " alpha=" + fmt("%g", alpha) + " rho=" + fmt("%g", rho) + " error " + fmt("%.2e", errors.back()) +
                                " order " + fmt("%.2f", p));
                }
                worst_err = std::max(worst_err, errors.back());
                worst_order = std::min(worst_order, p);
            }
        }
    }
    if (o.pass) o.detail = "max error " + fmt("%.2e", worst_err) + " at N=2048, min order " + fmt("%.2f", worst_order);
    return o;
}

Outcome integral_constant() {
    Outcome o;
    double worst = 0.0, drift = 0.0;
    for (double alpha : {0.5, 0.9}) {
        for (double lambda : {-1.0, -2.8229, -3.0}) {
            const double c1 = perron::estimate_C(alpha, lambda, FracOrder{alpha, 1.0, 1.0});
            const double c12 = perron::estimate_C(alpha, lambda, FracOrder{alpha, 1.2, 1.0});
            worst = std::max(worst, std::fabs(c1 - 1.0 / std::fabs(lambda)));
            drift = std::max(drift, std::fabs(c12 - c1));
        }
    }
    require(o, worst <= 1e-3, "C error " + fmt("%.2e", worst));
    require(o, drift <= 1e-10, "rho drift " + fmt("%.2e", drift));
    if (o.pass) o.detail = "max |C - 1/|lambda|| " + fmt("%.2e", worst) + ", rho drift " + fmt("%.2e", drift);
    return o;
}

Outcome tail_bound() {
    Outcome o;
    int checked = 0, violations = 0;
    for (double alpha : {0.5, 0.9}) {
        for (double lambda : {-1.0, -3.0}) {
            const auto bc = specfun::tail_constants(alpha, lambda);
            require(o, bc.M > 0.0 && bc.t1 > 0.0, "degenerate constants");
            for (int j = 1; j <= 3000; ++j) {
                const double v = bc.t1 * std::pow(10.0, 6.0 * j / 3000.0);
                ++checked;
                if (std::abs(specfun::ml_kernel_w(alpha, lambda, v)) > bc.M / std::pow(v, alpha + 1.0)) ++violations;
            }
        }
    }
    require(o, violations == 0, std::to_string(violations) + " violations");
    if (o.pass) o.detail = std::to_string(checked) + " check points beyond t1, no violation";
    return o;
}

Outcome fixed_point() {
    Outcome o;
    const auto cert = perron::certify(lorenz_closed_loop(), lorenz_g, kLorenzOrder, 0.05);
    const auto ms = perron::certified_system(lorenz_closed_loop(), lorenz_g, cert);
    const CVector x = ms.to_modal(CVector::Constant(3, 1e-3 / std::sqrt(3.0)));
    const CVector diag = ms.diagonal();
    const dynamics::RHS rhs = [&](const CVector& y) { return CVector(diag.cwiseProduct(y) + ms.h(y)); };
    const auto sim = dynamics::simulate_rhs(rhs, x, kLorenzOrder, kLorenzHorizon, 8192);
    require(o, !sim.diverged, "simulation diverged");
    const double defect = perron::lp_apply(ms, x, sim, kLorenzOrder).distance(sim);
    require(o, defect <= 1e-3, "defect " + fmt("%.2e", defect));

    perron::PicardOptions options;
    options.certificate = &cert;
    const auto res = perron::picard_iterate(ms, x, kLorenzOrder, sim.grid, options);
    require(o, res.converged, "Picard did not converge");
    const auto ratios = res.ratios(1e-15);
    require(o, !ratios.empty(), "no residual ratios");
    const double worst = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
    require(o, worst <= cert.q + 0.1, "ratio " + fmt("%.3g", worst) + " above q + 0.1");
    if (o.pass) o.detail = "defect " + fmt("%.2e", defect) + ", max Picard ratio " + fmt("%.2e", worst) + " vs q + 0.1 = " + fmt("%.4f", cert.q + 0.1);
    return o;
}

Outcome decay() {
    Outcome o;
    const auto a = lorenz_closed_loop();
    const auto tr = dynamics::simulate(a, lorenz_g, CVector::Constant(3, 0.1), kLorenzOrder, kLorenzHorizon, 8192);
    require(o, !tr.diverged, "simulation diverged");
    const double final_norm = tr.states.back().norm();
    require(o, final_norm < 1e-2, "final norm " + fmt("%.3g", final_norm));
    for (double scale : {1e-3, 1e-4, 1e-6}) {
        const CVector x0 = CVector::Constant(3, scale / std::sqrt(3.0));
        const auto small = dynamics::simulate(a, lorenz_g, x0, kLorenzOrder, kLorenzHorizon, 8192);
        const double initial = small.states.front().norm();
        require(o, sup_norm(small) <= initial, "|x0| = " + fmt("%g", scale) + ": sup norm above the initial norm");
        require(o, small.sup_norm <= initial, "|x0| = " + fmt("%g", scale) + ": reported sup norm above the initial norm");
    }
    if (o.pass) o.detail = "final norm " + fmt("%.3e", final_norm) + ", sup at the initial node for |x0| in {1e-3, 1e-4, 1e-6}";
    return o;
}

Outcome certificate() {
    Outcome o;
    const auto cert = perron::certify(lorenz_closed_loop(), lorenz_g, kLorenzOrder, 0.05);
    require(o, cert.valid, "certificate at r = 0.05 invalid");
    require(o, cert.q < 1.0, "q = " + fmt("%g", cert.q));
    require(o, cert.r_star > 0.0, "r* = " + fmt("%g", cert.r_star));

    const auto ms = perron::certified_system(lorenz_closed_loop(), lorenz_g, cert);
    const perron::PerronOperator op(ms, kLorenzOrder, fraccalc::make_grid(kLorenzOrder, kLorenzHorizon, 1024));
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n01;
    auto trajectory = [&] {
        auto tr = op.constant(CVector::Zero(3));
        const double amp = cert.r / std::sqrt(3.0) / 3.0;
        for (int j = 0; j < 3; ++j) {
            for (int m = 0; m < 3; ++m) {
                const double c = u(rng), omega = 2.0 * u(rng), phase = 2.0 * std::numbers::pi * u(rng);
                for (std::size_t n = 0; n < tr.size(); ++n) tr.states[n](j) += amp * c * std::polar(1.0, omega * op.grid().node(n) + phase);
            }
        }
        return tr;
    };
    int failures = 0;
    for (int pair = 0; pair < 20; ++pair) {
        const auto xi = trajectory();
        const auto eta = trajectory();
        CVector x(3);
        for (int j = 0; j < 3; ++j) x(j) = cplx(n01(rng), n01(rng));
        x *= cert.r_star / x.norm();
        const auto fxi = op.apply(x, xi);
        const auto feta = op.apply(x, eta);
        if (fxi.distance(feta) > (cert.q + 0.05) * xi.distance(eta)) ++failures;
        if (sup_norm(fxi) > cert.supE * x.norm() + cert.q * sup_norm(xi) + 0.05) ++failures;
        if (sup_norm(fxi) > cert.r * (1.0 + 1e-6)) ++failures;
    }
    require(o, failures == 0, std::to_string(failures) + " sampled invariant failures");
    const auto big = perron::certify(lorenz_closed_loop(), lorenz_g, kLorenzOrder, 1e3);
    require(o, !big.valid, "certificate at r = 1e3 valid");
    if (o.pass) o.detail = "q " + fmt("%.4f", cert.q) + ", r* " + fmt("%.5f", cert.r_star) + ", 60 sampled inequalities hold, r = 1e3 invalid";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0 for none
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "closed-loop Lorenz eigenvalues and verdict", 1.0, eigenvalues},
        {2, "power rule lattice at N=4096", 30.0, power_rule},
        {3, "semigroup and constant rule at N=4096", 0.0, semigroup_and_constants},
        {4, "Mittag-Leffler identities", 5.0, ml_identities},
        {5, "simulator vs closed form and convergence order", 120.0, simulator_oracle},
        {6, "integral bound C for real eigenvalues", 0.0, integral_constant},
        {7, "Mittag-Leffler tail bound beyond t1", 0.0, tail_bound},
        {8, "Lyapunov-Perron fixed point and Picard rate", 120.0, fixed_point},
        {9, "controlled Lorenz decay", 0.0, decay},
        {10, "contraction certificate sanity", 0.0, certificate},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0.0 && secs >= c.limit_s) {
            require(o, false, "runtime above " + fmt("%g", c.limit_s) + " s");
        }
        if (!o.pass) ++failed;
        std::printf("criterion %2d %s (%.3f s): %s | %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
