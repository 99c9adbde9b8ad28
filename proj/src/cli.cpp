#include "ckstab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ckstab/config.hpp"
#include "ckstab/dynamics.hpp"
#include "ckstab/errors.hpp"
#include "ckstab/fraccalc.hpp"
#include "ckstab/perron.hpp"
#include "ckstab/specfun.hpp"
#include "ckstab/spectral.hpp"
#include "json.hpp"

namespace ckstab::cli {

namespace {

using json = nlohmann::json;
using cplx = std::complex<double>;

std::string format_number(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// nlohmann's float formatting is shortest round-trip; reports use a fixed
// 17 significant digits so identical runs give identical bytes.
void write_json(std::ostream& os, const json& j, int level = 0) {
    const std::string pad(2 * (level + 1), ' '), close(2 * level, ' ');
    if (j.is_object()) {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            if (!first) os << ",\n";
            first = false;
            os << pad << json(key).dump() << ": ";
            write_json(os, value, level + 1);
        }
        os << "\n" << close << "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            os << "[]";
            return;
        }
        const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
        if (flat) {
            os << "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i > 0) os << ", ";
                write_json(os, j[i], level + 1);
            }
            os << "]";
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0) os << ",\n";
            os << pad;
            write_json(os, j[i], level + 1);
        }
        os << "\n" << close << "]";
    } else if (j.is_number_float()) {
        os << format_number(j.get<double>());
    } else {
        os << j.dump();
    }
}

std::string json_text(const json& j) {
    std::ostringstream os;
    write_json(os, j);
    os << "\n";
    return os.str();
}

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        rows.push_back(row);
    }
    return rows;
}

json order_json(const FracOrder& o) { return json{{"alpha", o.alpha}, {"rho", o.rho}, {"t0", o.t0}}; }

struct Output {
    std::filesystem::path dir;
    std::ostream& out;

    void artifact(const std::string& name, const std::string& content) const {
        std::filesystem::create_directories(dir);
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        f << content;
    }
    void report(const std::string& name, const json& j) const {
        const auto text = json_text(j);
        artifact(name, text);
        out << text;
    }
};

std::string trajectory_csv(const dynamics::Trajectory& tr) {
    std::ostringstream os;
    os << "t";
    for (int i = 1; i <= tr.dim(); ++i) os << ",x" << i;
    os << ",norm\n";
    for (std::size_t k = 0; k < tr.size(); ++k) {
        os << format_number(tr.t_nodes[k]);
        for (int i = 0; i < tr.dim(); ++i) os << "," << format_number(tr.states[k](i).real());
        os << "," << format_number(tr.states[k].norm()) << "\n";
    }
    return os.str();
}

json trajectory_summary(const dynamics::Trajectory& tr) {
    return json{{"sup_norm", tr.sup_norm},
                {"initial_norm", tr.norm_at(0)},
                {"final_norm", tr.norm_at(tr.size() - 1)},
                {"final_t", tr.t_nodes.back()},
                {"diverged", tr.diverged},
                {"cut_index", tr.cut_index},
                {"nodes", tr.size()}};
}

int verdict_code(spectral::Verdict v) {
    switch (v) {
        case spectral::Verdict::Stable: return kOk;
        case spectral::Verdict::Unstable: return kNegative;
        case spectral::Verdict::Inconclusive: return kInconclusive;
    }
    return kNumericError;
}

json spectral_json(const spectral::SpectralReport& r, double alpha) {
    json ev = json::array();
    for (const auto& l : r.eigenvalues) ev.push_back(complex_json(l));
    return json{{"alpha", alpha},
                {"eigenvalues", ev},
                {"args", r.args},
                {"threshold", r.threshold},
                {"margin", r.margin},
                {"stable", r.stable},
                {"verdict", spectral::to_string(r.verdict)}};
}

json certificate_json(const perron::ContractionCertificate& c) {
    json ev = json::array();
    for (const auto& l : c.eigenvalues) ev.push_back(complex_json(l));
    json j{{"r", c.r},
           {"eigenvalues", ev},
           {"C_per_block", c.C_per_block},
           {"C", c.C},
           {"delta", c.delta},
           {"lip_h", c.lip_h},
           {"q", c.q},
           {"supE_per_block", c.supE_per_block},
           {"supE", c.supE},
           {"r_star", c.r_star},
           {"valid", c.valid},
           {"numerical", c.numerical},
           {"cond_TP", c.cond_TP},
           {"t_max", c.t_max}};
    j["suggested_r"] = c.suggested_r ? json(*c.suggested_r) : json(nullptr);
    return j;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            v.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError(what + ": '" + cell + "' is not a number");
        }
    }
    if (v.empty()) throw ConfigError(what + ": empty list");
    return v;
}

// (t, value) rows; a non-numeric first line is a header.
std::pair<std::vector<double>, std::vector<double>> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("input: cannot read '" + path + "'");
    std::vector<double> t, v;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        try {
            if (comma == std::string::npos) throw std::invalid_argument("no comma");
            const double tv = std::stod(line.substr(0, comma));
            const double vv = std::stod(line.substr(comma + 1));
            t.push_back(tv);
            v.push_back(vv);
        } catch (const std::exception&) {
            if (row == 1) continue;
            throw ConfigError("input: line " + std::to_string(row) + " is not a 't,value' pair");
        }
    }
    if (t.size() < 2) throw ConfigError("input: need at least two samples");
    return {t, v};
}

std::string samples_csv(const std::vector<double>& t, const std::vector<double>& v) {
    std::ostringstream os;
    os << "t,value\n";
    for (std::size_t k = 0; k < t.size(); ++k) os << format_number(t[k]) << "," << format_number(v[k]) << "\n";
    return os.str();
}

struct SystemFlags {
    std::string system = "lorenz";
    std::string matrix;
    double alpha = 0.0, rho = 0.0, t0 = 0.0;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* rho_opt = nullptr;
    CLI::Option* t0_opt = nullptr;
    CLI::Option* matrix_opt = nullptr;

    void add(CLI::App* sub, bool with_matrix) {
        sub->add_option("--system", system, "built-in name (lorenz) or JSON config path")->capture_default_str();
        if (with_matrix) matrix_opt = sub->add_option("--matrix", matrix, "inline JSON rows or CSV file; replaces the system matrix");
        alpha_opt = sub->add_option("--alpha", alpha, "fractional order in (0, 1)");
        rho_opt = sub->add_option("--rho", rho, "Katugampola parameter > 0");
        t0_opt = sub->add_option("--t0", t0, "base time > 0");
    }
    config::SystemConfig load() const {
        auto cfg = config::load_config(system);
        if (alpha_opt && alpha_opt->count()) cfg.order.alpha = alpha;
        if (rho_opt && rho_opt->count()) cfg.order.rho = rho;
        if (t0_opt && t0_opt->count()) cfg.order.t0 = t0;
        if (cfg.simulation.horizon <= cfg.order.t0) cfg.simulation.horizon = cfg.order.t0 + 50.0;
        cfg.validate();
        return cfg;
    }
    bool has_matrix() const { return matrix_opt && matrix_opt->count(); }
    Eigen::MatrixXd matrix_or(const config::SystemConfig& cfg) const {
        return has_matrix() ? config::parse_matrix(matrix) : cfg.closed_loop();
    }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Caputo-Katugampola stability toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    app.add_option("--out", out_dir, "artifact directory (CKSTAB_OUT overrides)")->capture_default_str();
    app.add_option("--seed", seed, "seed for every sampled estimate")->capture_default_str();

    // ml
    double ml_alpha = 0.0, ml_beta = 1.0, ml_re = 0.0, ml_im = 0.0;
    auto* ml = app.add_subcommand("ml", "two-parameter Mittag-Leffler function");
    ml->add_option("--alpha", ml_alpha)->required();
    ml->add_option("--beta", ml_beta)->capture_default_str();
    ml->add_option("--re", ml_re)->required();
    ml->add_option("--im", ml_im)->capture_default_str();

    // fracint / fracderiv
    std::string in_path;
    double fi_alpha = 0.0, fi_rho = 1.0, fi_t0 = 0.0;
    bool riemann = false;
    auto* fracint = app.add_subcommand("fracint", "Katugampola fractional integral of sampled data");
    auto* fracderiv = app.add_subcommand("fracderiv", "Caputo-Katugampola derivative of sampled data");
    CLI::Option* fi_t0_opt[2];
    int idx = 0;
    for (auto* sub : {fracint, fracderiv}) {
        sub->add_option("--input", in_path, "CSV of t,value rows, uniform in w")->required();
        sub->add_option("--alpha", fi_alpha)->required();
        sub->add_option("--rho", fi_rho)->capture_default_str();
        fi_t0_opt[idx++] = sub->add_option("--t0", fi_t0, "base time (default: first t)");
    }
    fracderiv->add_flag("--riemann", riemann, "Katugampola (Riemann-Liouville type) instead of Caputo");

    // eigen / check-stability
    SystemFlags eig_flags, chk_flags, sim_flags, cert_flags;
    auto* eigen = app.add_subcommand("eigen", "eigenvalues of a matrix");
    eig_flags.add(eigen, true);
    auto* check = app.add_subcommand("check-stability", "sector condition |arg lambda| > alpha pi / 2");
    chk_flags.add(check, true);

    // simulate
    double horizon = 0.0;
    std::size_t steps = 0;
    std::string x0_text;
    auto* simulate = app.add_subcommand("simulate", "predictor-corrector trajectory of the system");
    sim_flags.add(simulate, false);
    auto* horizon_opt = simulate->add_option("--horizon", horizon);
    auto* steps_opt = simulate->add_option("--steps", steps);
    auto* x0_opt = simulate->add_option("--x0", x0_text, "comma-separated initial state");

    // certify
    double radius = 0.05, lipschitz = 0.0;
    std::size_t samples = 4096;
    std::string nonlinearity = "zero";
    auto* certify = app.add_subcommand("certify", "Lyapunov-Perron contraction certificate");
    cert_flags.add(certify, true);
    certify->add_option("--radius", radius, "ball radius in modal coordinates")->capture_default_str();
    certify->add_option("--samples", samples, "Lipschitz sample pairs")->capture_default_str();
    auto* lip_opt = certify->add_option("--lipschitz", lipschitz, "analytic Lipschitz bound of h on the ball");
    auto* nl_opt = certify->add_option("--nonlinearity", nonlinearity, "with --matrix: zero or lorenz-g");

    // demo-lorenz
    std::size_t demo_steps = 8192;
    double demo_radius = 0.05;
    auto* demo = app.add_subcommand("demo-lorenz", "controlled Lorenz system end to end");
    demo->add_option("--steps", demo_steps)->capture_default_str();
    demo->add_option("--radius", demo_radius)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    if (const char* env = std::getenv("CKSTAB_OUT"); env && *env) out_dir = env;
    const Output output{out_dir, out};
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        if (ml->parsed()) {
            const specfun::MLParams p{ml_alpha, ml_beta};
            const cplx z(ml_re, ml_im);
            const auto res = specfun::mittag_leffler_eval(p, z);
            specfun::mittag_leffler(p, z);  // raises if the tolerance is missed
            output.report("ml.json", json{{"alpha", ml_alpha},
                                          {"beta", ml_beta},
                                          {"z", complex_json(z)},
                                          {"value", complex_json(res.value)},
                                          {"error", res.error},
                                          {"regime", specfun::to_string(res.regime)}});
            return kOk;
        }
        if (fracint->parsed() || fracderiv->parsed()) {
            const auto [t, v] = read_samples(in_path);
            const bool deriv = fracderiv->parsed();
            const FracOrder order{deriv ? fi_alpha : 0.5, fi_rho, fi_t0_opt[deriv ? 1 : 0]->count() ? fi_t0 : t.front()};
            const auto f = fraccalc::from_time_samples(order, t, v);
            const auto r = deriv ? fraccalc::ck_derivative(f, order, !riemann) : fraccalc::katugampola_integral(f, order, fi_alpha);
            if (r.first_node_extrapolated) err << command << ": value at t0 is extrapolated from the next two nodes\n";
            const auto text = samples_csv(t, r.values);
            output.artifact(command + ".csv", text);
            out << text;
            return kOk;
        }
        if (eigen->parsed()) {
            const auto a = eig_flags.has_matrix() ? config::parse_matrix(eig_flags.matrix) : eig_flags.load().closed_loop();
            json ev = json::array();
            for (const auto& l : spectral::eigenvalues(a)) ev.push_back(complex_json(l));
            output.report("eigen.json", json{{"matrix", matrix_json(a)}, {"eigenvalues", ev}});
            return kOk;
        }
        if (check->parsed()) {
            double alpha;
            Eigen::MatrixXd a;
            if (chk_flags.has_matrix()) {
                if (!chk_flags.alpha_opt->count()) throw ConfigError("check-stability: --alpha is required with --matrix");
                alpha = chk_flags.alpha;
                a = config::parse_matrix(chk_flags.matrix);
            } else {
                const auto cfg = chk_flags.load();
                alpha = cfg.order.alpha;
                a = cfg.closed_loop();
            }
            const auto report = spectral::sector_check(a, alpha);
            output.report("check-stability.json", spectral_json(report, alpha));
            return verdict_code(report.verdict);
        }
        if (simulate->parsed()) {
            auto cfg = sim_flags.load();
            if (horizon_opt->count()) cfg.simulation.horizon = horizon;
            if (steps_opt->count()) cfg.simulation.steps = steps;
            if (x0_opt->count()) {
                const auto x = parse_list(x0_text, "--x0");
                cfg.simulation.x0 = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
            }
            cfg.validate();
            const auto tr = dynamics::simulate(cfg.closed_loop(), cfg.nonlinearity.function(), cfg.simulation.x0.cast<cplx>(),
                                               cfg.order, cfg.simulation.horizon, cfg.simulation.steps);
            output.artifact("trajectory.csv", trajectory_csv(tr));
            json summary = trajectory_summary(tr);
            summary["system"] = cfg.name;
            summary["order"] = order_json(cfg.order);
            summary["horizon"] = cfg.simulation.horizon;
            summary["steps"] = cfg.simulation.steps;
            output.report("simulate.json", summary);
            return kOk;
        }
        if (certify->parsed()) {
            const auto cfg = cert_flags.load();
            Eigen::MatrixXd a = cfg.closed_loop();
            spectral::VectorFn f = cfg.nonlinearity.function();
            if (cert_flags.has_matrix()) {
                a = config::parse_matrix(cert_flags.matrix);
                config::Nonlinearity nl;
                nl.kind = nonlinearity;
                if (nl.kind != "zero" && nl.kind != "lorenz-g") throw ConfigError("--nonlinearity: expected zero or lorenz-g");
                if (nl.kind == "lorenz-g" && a.rows() != 3) throw ConfigError("--nonlinearity: lorenz-g needs a 3x3 matrix");
                f = nl.function();
            } else if (nl_opt->count()) {
                throw ConfigError("--nonlinearity: only meaningful together with --matrix");
            }
            perron::CertifyOptions options;
            options.lipschitz.seed = seed;
            options.lipschitz.samples = samples;
            if (lip_opt->count()) options.lipschitz.analytic = lipschitz;
            if (!cert_flags.has_matrix()) options.hint = cfg.jordan_hint;
            try {
                const auto cert = perron::certify(a, f, cfg.order, radius, options);
                json j = certificate_json(cert);
                j["order"] = order_json(cfg.order);
                j["seed"] = seed;
                output.report("certificate.json", j);
                return cert.valid ? kOk : kNegative;
            } catch (const UnstableSpectrumError& e) {
                output.report("certificate.json", json{{"valid", false},
                                                       {"verdict", e.inconclusive() ? "inconclusive" : "unstable"},
                                                       {"message", e.what()}});
                return e.inconclusive() ? kInconclusive : kNegative;
            }
        }
        if (demo->parsed()) {
            auto cfg = config::builtin_config("lorenz");
            cfg.simulation.steps = demo_steps;
            cfg.validate();
            const Eigen::MatrixXd a = cfg.closed_loop();
            const auto report = spectral::sector_check(a, cfg.order.alpha);
            json j{{"system", cfg.name},
                   {"A", matrix_json(cfg.A)},
                   {"A_closed_loop", matrix_json(a)},
                   {"order", order_json(cfg.order)},
                   {"spectrum", spectral_json(report, cfg.order.alpha)}};
            if (report.stable) {
                const auto tr = dynamics::simulate(a, cfg.nonlinearity.function(), cfg.simulation.x0.cast<cplx>(), cfg.order,
                                                   cfg.simulation.horizon, cfg.simulation.steps);
                output.artifact("demo-lorenz-trajectory.csv", trajectory_csv(tr));
                json sim = trajectory_summary(tr);
                sim["x0"] = std::vector<double>(cfg.simulation.x0.data(), cfg.simulation.x0.data() + cfg.simulation.x0.size());
                sim["steps"] = cfg.simulation.steps;
                sim["decay_ratio"] = tr.norm_at(tr.size() - 1) / tr.norm_at(0);
                j["simulation"] = sim;
                perron::CertifyOptions options;
                options.lipschitz.seed = seed;
                j["certificate"] = certificate_json(perron::certify(a, cfg.nonlinearity.function(), cfg.order, demo_radius, options));
            }
            output.report("demo-lorenz.json", j);
            return verdict_code(report.verdict);
        }
    } catch (const ConfigError& e) {
        err << command << ": " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << command << ": numeric error: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        err << command << ": " << e.what() << "\n";
        return kNumericError;
    }
    return kUsage;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace ckstab::cli
