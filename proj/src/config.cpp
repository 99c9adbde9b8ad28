#include "ckstab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ckstab/errors.hpp"
#include "json.hpp"

namespace ckstab::config {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw ConfigError(field + ": " + message);
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(field, "must be finite");
    return v;
}

Eigen::MatrixXd matrix(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Eigen::MatrixXd m;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        const std::string rf = field + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.empty()) fail(rf, "expected a non-empty array");
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            fail(rf, "has " + std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = number(row[static_cast<std::size_t>(c)], rf + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

Eigen::VectorXd vector(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
    return v;
}

const json& require(const json& j, const std::string& key, const std::string& field) {
    if (!j.contains(key)) fail(field.empty() ? key : field + "." + key, "missing");
    return j.at(key);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& field) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) fail(field.empty() ? key : field + "." + key, "unknown field");
    }
}

Nonlinearity parse_nonlinearity(const json& j) {
    Nonlinearity nl;
    if (j.is_string()) {
        nl.kind = j.get<std::string>();
        if (nl.kind != "zero" && nl.kind != "lorenz-g") fail("nonlinearity", "unknown built-in '" + nl.kind + "'");
        return nl;
    }
    if (!j.is_object()) fail("nonlinearity", "expected a built-in name or an object with 'terms'");
    reject_unknown(j, {"terms"}, "nonlinearity");
    const auto& terms = require(j, "terms", "nonlinearity");
    if (!terms.is_array()) fail("nonlinearity.terms", "expected an array");
    nl.kind = "polynomial";
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const std::string tf = "nonlinearity.terms[" + std::to_string(k) + "]";
        const auto& t = terms[k];
        if (!t.is_object()) fail(tf, "expected an object");
        reject_unknown(t, {"component", "coefficient", "exponents"}, tf);
        PolynomialTerm term;
        const auto& comp = require(t, "component", tf);
        if (!comp.is_number_integer()) fail(tf + ".component", "expected an integer");
        term.component = comp.get<int>();
        term.coefficient = number(require(t, "coefficient", tf), tf + ".coefficient");
        const auto& ex = require(t, "exponents", tf);
        if (!ex.is_array()) fail(tf + ".exponents", "expected an array");
        for (std::size_t i = 0; i < ex.size(); ++i) {
            if (!ex[i].is_number_integer() || ex[i].get<int>() < 0) {
                fail(tf + ".exponents[" + std::to_string(i) + "]", "expected a nonnegative integer");
            }
            term.exponents.push_back(ex[i].get<int>());
        }
        nl.terms.push_back(std::move(term));
    }
    return nl;
}

}  // namespace

spectral::VectorFn Nonlinearity::function() const {
    if (kind == "zero") return nullptr;
    if (kind == "lorenz-g") {
        return [](const spectral::CVector& x) {
            spectral::CVector out(3);
            out << 0.0, -x(0) * x(2), x(0) * x(1);
            return out;
        };
    }
    return [terms = terms](const spectral::CVector& x) {
        spectral::CVector out = spectral::CVector::Zero(x.size());
        for (const auto& t : terms) {
            std::complex<double> m = t.coefficient;
            for (std::size_t i = 0; i < t.exponents.size(); ++i) {
                for (int e = 0; e < t.exponents[i]; ++e) m *= x(static_cast<Eigen::Index>(i));
            }
            out(t.component) += m;
        }
        return out;
    };
}

Eigen::MatrixXd SystemConfig::closed_loop() const {
    if (!feedback) return A;
    return A + feedback->B * feedback->K;
}

void SystemConfig::validate() const {
    const auto d = A.rows();
    if (d == 0 || A.cols() != d) fail("A", "must be square and non-empty");
    if (!A.allFinite()) fail("A", "entries must be finite");
    if (!(order.alpha > 0.0 && order.alpha < 1.0)) {
        fail("order.alpha", "must lie in (0, 1), got " + std::to_string(order.alpha));
    }
    if (!(order.rho > 0.0)) fail("order.rho", "must be positive, got " + std::to_string(order.rho));
    if (!(order.t0 > 0.0)) fail("order.t0", "must be positive, got " + std::to_string(order.t0));
    if (nonlinearity.kind == "lorenz-g" && d != 3) fail("nonlinearity", "lorenz-g needs a 3-dimensional system");
    for (std::size_t k = 0; k < nonlinearity.terms.size(); ++k) {
        const auto& t = nonlinearity.terms[k];
        const std::string tf = "nonlinearity.terms[" + std::to_string(k) + "]";
        if (t.component < 0 || t.component >= d) fail(tf + ".component", "out of range for dimension " + std::to_string(d));
        if (static_cast<Eigen::Index>(t.exponents.size()) != d) {
            fail(tf + ".exponents", "needs one exponent per coordinate (" + std::to_string(d) + ")");
        }
        int degree = 0;
        for (int e : t.exponents) degree += e;
        if (degree == 0) fail(tf, "constant term violates f(0) = 0");
    }
    if (feedback) {
        if (feedback->B.rows() != d) fail("feedback.B", "must have " + std::to_string(d) + " rows");
        if (feedback->K.cols() != d) fail("feedback.K", "must have " + std::to_string(d) + " columns");
        if (feedback->B.cols() != feedback->K.rows()) fail("feedback", "B columns must match K rows");
    }
    if (!(simulation.horizon > order.t0)) fail("simulation.horizon", "must exceed order.t0");
    if (simulation.steps < 16) fail("simulation.steps", "must be at least 16");
    if (simulation.x0.size() != d) fail("simulation.x0", "must have " + std::to_string(d) + " entries");
    if (jordan_hint) {
        if (jordan_hint->T.rows() != d || jordan_hint->T.cols() != d) fail("jordan_hint.T", "must be d x d");
    }
}

std::vector<std::string> builtin_names() { return {"lorenz"}; }

SystemConfig builtin_config(const std::string& name) {
    if (name != "lorenz") fail("system", "unknown built-in '" + name + "'");
    const double a = -8.0, b = 26.0, c = -7.0, d = 3.0;
    SystemConfig cfg;
    cfg.name = "lorenz";
    cfg.A.resize(3, 3);
    cfg.A << a, -a, 0.0, b, -c, 0.0, 0.0, 0.0, -d;
    cfg.nonlinearity.kind = "lorenz-g";
    Feedback fb;
    fb.B = Eigen::MatrixXd(3, 1);
    fb.B << 0.0, 1.0, 0.0;
    fb.K = Eigen::MatrixXd(1, 3);
    fb.K << 0.0, -50.0, 0.0;
    cfg.feedback = fb;
    cfg.order = FracOrder{0.9, 1.2, 1.0};
    cfg.simulation.horizon = cfg.order.t0 + 50.0;
    cfg.simulation.steps = 8192;
    cfg.simulation.x0 = Eigen::VectorXd::Constant(3, 0.1);
    cfg.validate();
    return cfg;
}

SystemConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("config", "expected a JSON object");
    reject_unknown(j, {"name", "A", "nonlinearity", "feedback", "order", "simulation", "jordan_hint"}, "");

    SystemConfig cfg;
    const auto& name = require(j, "name", "");
    if (!name.is_string()) fail("name", "expected a string");
    cfg.name = name.get<std::string>();
    cfg.A = matrix(require(j, "A", ""), "A");
    cfg.nonlinearity = j.contains("nonlinearity") ? parse_nonlinearity(j.at("nonlinearity")) : Nonlinearity{};
    if (j.contains("feedback")) {
        const auto& fb = j.at("feedback");
        if (!fb.is_object()) fail("feedback", "expected an object");
        reject_unknown(fb, {"B", "K"}, "feedback");
        cfg.feedback = Feedback{matrix(require(fb, "B", "feedback"), "feedback.B"), matrix(require(fb, "K", "feedback"), "feedback.K")};
    }
    const auto& ord = require(j, "order", "");
    if (!ord.is_object()) fail("order", "expected an object");
    reject_unknown(ord, {"alpha", "rho", "t0"}, "order");
    cfg.order.alpha = number(require(ord, "alpha", "order"), "order.alpha");
    cfg.order.rho = ord.contains("rho") ? number(ord.at("rho"), "order.rho") : 1.0;
    cfg.order.t0 = ord.contains("t0") ? number(ord.at("t0"), "order.t0") : 1.0;
    const auto& sim = require(j, "simulation", "");
    if (!sim.is_object()) fail("simulation", "expected an object");
    reject_unknown(sim, {"horizon", "steps", "x0"}, "simulation");
    cfg.simulation.horizon = number(require(sim, "horizon", "simulation"), "simulation.horizon");
    const auto& steps = require(sim, "steps", "simulation");
    if (!steps.is_number_integer() || steps.get<long long>() < 0) fail("simulation.steps", "expected a nonnegative integer");
    cfg.simulation.steps = steps.get<std::size_t>();
    cfg.simulation.x0 = vector(require(sim, "x0", "simulation"), "simulation.x0");
    if (j.contains("jordan_hint")) {
        const auto& h = j.at("jordan_hint");
        if (!h.is_object()) fail("jordan_hint", "expected an object");
        reject_unknown(h, {"T", "block_sizes"}, "jordan_hint");
        spectral::JordanHint hint;
        hint.T = matrix(require(h, "T", "jordan_hint"), "jordan_hint.T").cast<std::complex<double>>();
        const auto& bs = require(h, "block_sizes", "jordan_hint");
        if (!bs.is_array()) fail("jordan_hint.block_sizes", "expected an array");
        for (const auto& s : bs) {
            if (!s.is_number_integer()) fail("jordan_hint.block_sizes", "expected integers");
            hint.block_sizes.push_back(s.get<int>());
        }
        cfg.jordan_hint = hint;
    }
    cfg.validate();
    return cfg;
}

SystemConfig load_config(const std::string& name_or_path) {
    for (const auto& n : builtin_names()) {
        if (n == name_or_path) return builtin_config(n);
    }
    std::ifstream in(name_or_path);
    if (!in) fail("system", "'" + name_or_path + "' is neither a built-in nor a readable file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

Eigen::MatrixXd parse_matrix(const std::string& text_or_path) {
    const auto first = text_or_path.find_first_not_of(" \t\n");
    if (first != std::string::npos && text_or_path[first] == '[') {
        json j;
        try {
            j = json::parse(text_or_path);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("matrix: not valid JSON: ") + e.what());
        }
        return matrix(j, "matrix");
    }
    std::ifstream in(text_or_path);
    if (!in) fail("matrix", "'" + text_or_path + "' is neither inline JSON nor a readable CSV file");
    json rows = json::array();
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row = json::array();
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                fail("matrix", "row " + std::to_string(rows.size() + 1) + ": '" + cell + "' is not a number");
            }
        }
        rows.push_back(row);
    }
    return matrix(rows, "matrix");
}

}  // namespace ckstab::config
