#pragma once

// Katugampola integrals and (Caputo-)Katugampola derivatives of sampled
// functions. Everything is discretized in the transformed variable
// w = (t^rho - t0^rho)/rho, where the operators become the classical
// Riemann-Liouville / Caputo ones with a stationary kernel.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "ckstab/order.hpp"

namespace ckstab::fraccalc {

using cplx = std::complex<double>;

/// Uniform grid w_k = k * step, k = 0..size-1.
struct WGrid {
    double step = 0.0;
    std::size_t size = 0;

    double node(std::size_t k) const { return static_cast<double>(k) * step; }
    std::size_t intervals() const { return size == 0 ? 0 : size - 1; }
    void validate() const;
};

/// Grid of `intervals` equal w-steps covering [t0, horizon].
WGrid make_grid(const FracOrder& order, double horizon, std::size_t intervals);

/// t_k for every node; t_0 == t0 and the last node reproduces the horizon
/// up to rounding.
std::vector<double> time_nodes(const FracOrder& order, const WGrid& grid);

template <class T>
struct SampledFunction {
    WGrid grid;
    std::vector<T> values;
    /// Set when values[0] was extrapolated rather than computed.
    bool first_node_extrapolated = false;

    void validate() const;
};

using RealSamples = SampledFunction<double>;
using ComplexSamples = SampledFunction<cplx>;

/// Samples fn(w) on the grid.
RealSamples sample_w(const WGrid& grid, const std::function<double(double)>& fn);

/// Samples fn(t) on the grid, t_k = order.to_t(w_k).
RealSamples sample_t(const FracOrder& order, const WGrid& grid, const std::function<double(double)>& fn);

/// Builds samples from (t, value) pairs. The t must start at t0 and be
/// uniformly spaced in w to relative 1e-9; throws GridError otherwise.
RealSamples from_time_samples(const FracOrder& order, const std::vector<double>& t,
                              const std::vector<double>& values);

/// Convolution quadrature for integral_0^{w_n} K(w_n - s) f(s) ds with f
/// interpolated linearly between nodes:
///   start[n] * f_0 + sum_{j=1..n} conv[n-j] * f_j.
template <class T>
struct ProductWeights {
    std::vector<T> start;
    std::vector<T> conv;

    template <class V>
    auto apply(const std::vector<V>& f, std::size_t n) const {
        using R = decltype(T{} * V{});
        if (n == 0) return R{};
        R acc = start[n] * f[0];
        for (std::size_t j = 1; j <= n; ++j) acc += conv[n - j] * f[j];
        return acc;
    }
};

/// Weights for K(v) = v^{alpha-1}/Gamma(alpha) up to n_max steps of size h.
ProductWeights<double> rl_product_weights(double alpha, double h, std::size_t n_max);

/// Weights for K(v) = v^{alpha-1} E_{alpha,alpha}(lambda v^alpha). At
/// lambda = 0 they agree with rl_product_weights.
ProductWeights<cplx> ml_product_weights(double alpha, cplx lambda, double h, std::size_t n_max);

/// I^{alpha_i, rho}_{t0+} f at every node. Throws OrderError unless
/// alpha_i > 0, GridError on an empty or malformed grid.
template <class T>
SampledFunction<T> katugampola_integral(const SampledFunction<T>& f, const FracOrder& order, double alpha_i);

/// Order order.alpha derivative by the L1 scheme in w. With caputo the
/// base value f(t0) is subtracted first; without it the singular term
/// f(t0) w^{-alpha}/Gamma(1-alpha) is kept and node 0 is extrapolated.
/// Throws OrderError unless 0 < alpha < 1, GridError if fewer than 3 nodes.
template <class T>
SampledFunction<T> ck_derivative(const SampledFunction<T>& f, const FracOrder& order, bool caputo);

}  // namespace ckstab::fraccalc
