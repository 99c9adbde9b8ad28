#pragma once

// System descriptions for the command line: D x = (A + B K) x + f(x) with a
// polynomial or built-in nonlinearity f, its fractional order and the
// simulation setup. Configs are JSON documents; see config.schema.json.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ckstab/order.hpp"
#include "ckstab/spectral.hpp"

namespace ckstab::config {

/// coefficient * prod_i x_i^{exponents[i]} added to output `component`.
struct PolynomialTerm {
    int component = 0;
    double coefficient = 0.0;
    std::vector<int> exponents;
};

struct Nonlinearity {
    /// "zero", "lorenz-g" or "polynomial".
    std::string kind = "zero";
    std::vector<PolynomialTerm> terms;

    /// f as a callable on C^d; nullptr for "zero".
    spectral::VectorFn function() const;
};

struct Feedback {
    Eigen::MatrixXd B;
    Eigen::MatrixXd K;
};

struct Simulation {
    double horizon = 0.0;
    std::size_t steps = 0;
    Eigen::VectorXd x0;
};

struct SystemConfig {
    std::string name;
    Eigen::MatrixXd A;
    Nonlinearity nonlinearity;
    std::optional<Feedback> feedback;
    FracOrder order;
    Simulation simulation;
    std::optional<spectral::JordanHint> jordan_hint;

    int dim() const { return static_cast<int>(A.rows()); }
    /// A + B K, or A without feedback.
    Eigen::MatrixXd closed_loop() const;
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Names accepted by builtin_config.
std::vector<std::string> builtin_names();

/// The controlled Lorenz system: a = -8, b = 26, c = -7, d = 3,
/// g(x) = (0, -x1 x3, x1 x2), B = (0, 1, 0)^T, K = (0, -50, 0),
/// alpha = 0.9, rho = 1.2, t0 = 1, horizon t0 + 50, x0 = (0.1, 0.1, 0.1).
SystemConfig builtin_config(const std::string& name);

/// Parses and validates a JSON document. Throws ConfigError.
SystemConfig parse_config(const std::string& text);

/// A built-in name or the path of a JSON config file. Throws ConfigError.
SystemConfig load_config(const std::string& name_or_path);

/// Row-major matrix from inline JSON ("[[1,2],[3,4]]") or a CSV file path.
Eigen::MatrixXd parse_matrix(const std::string& text_or_path);

}  // namespace ckstab::config
