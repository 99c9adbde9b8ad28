#include "ckstab/fraccalc.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

#include "ckstab/errors.hpp"
#include "ckstab/specfun.hpp"

namespace ckstab::fraccalc {

namespace {

constexpr double kUniformTolerance = 1e-9;

// m^p [(1 + 1/m)^p - 2 + (1 - 1/m)^p] without cancellation.
double second_difference(double m, double p) {
    return std::pow(m, p) * (std::expm1(p * std::log1p(1.0 / m)) + std::expm1(p * std::log1p(-1.0 / m)));
}

template <class T>
bool all_finite(const std::vector<T>& v) {
    for (const auto& x : v) {
        if (!std::isfinite(std::abs(x))) return false;
    }
    return true;
}

}  // namespace

void WGrid::validate() const {
    if (size < 2 || !(step > 0.0) || !std::isfinite(step)) {
        std::ostringstream os;
        os << "grid needs at least 2 nodes and a positive step, got size=" << size << " step=" << step;
        throw GridError(os.str());
    }
}

template <class T>
void SampledFunction<T>::validate() const {
    grid.validate();
    if (values.size() != grid.size) throw GridError("sample count does not match the grid");
    if (!all_finite(values)) throw GridError("samples must be finite");
}

WGrid make_grid(const FracOrder& order, double horizon, std::size_t intervals) {
    order.validate();
    if (!(horizon > order.t0)) throw GridError("horizon must exceed t0");
    if (intervals < 1) throw GridError("need at least one interval");
    return {order.to_w(horizon) / static_cast<double>(intervals), intervals + 1};
}

std::vector<double> time_nodes(const FracOrder& order, const WGrid& grid) {
    std::vector<double> t(grid.size);
    for (std::size_t k = 0; k < grid.size; ++k) t[k] = k == 0 ? order.t0 : order.to_t(grid.node(k));
    return t;
}

RealSamples sample_w(const WGrid& grid, const std::function<double(double)>& fn) {
    RealSamples out{grid, std::vector<double>(grid.size)};
    for (std::size_t k = 0; k < grid.size; ++k) out.values[k] = fn(grid.node(k));
    return out;
}

RealSamples sample_t(const FracOrder& order, const WGrid& grid, const std::function<double(double)>& fn) {
    const auto t = time_nodes(order, grid);
    RealSamples out{grid, std::vector<double>(grid.size)};
    for (std::size_t k = 0; k < grid.size; ++k) out.values[k] = fn(t[k]);
    return out;
}

RealSamples from_time_samples(const FracOrder& order, const std::vector<double>& t,
                              const std::vector<double>& values) {
    order.validate();
    if (t.size() != values.size()) throw GridError("time and value columns differ in length");
    if (t.size() < 2) throw GridError("need at least 2 samples");
    const double scale = std::max(std::fabs(order.t0), std::fabs(t.back()));
    if (std::fabs(t.front() - order.t0) > kUniformTolerance * scale) {
        std::ostringstream os;
        os << "first sample must be at t0=" << order.t0 << ", got " << t.front();
        throw GridError(os.str());
    }
    const double total = order.to_w(t.back());
    const double step = total / static_cast<double>(t.size() - 1);
    if (!(step > 0.0)) throw GridError("times must increase");
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double w = order.to_w(t[k]);
        if (std::fabs(w - step * static_cast<double>(k)) > kUniformTolerance * total) {
            std::ostringstream os;
            os << "samples are not uniform in w = (t^rho - t0^rho)/rho at index " << k << " (t=" << t[k] << ")";
            throw GridError(os.str());
        }
    }
    RealSamples out{{step, t.size()}, values};
    out.validate();
    return out;
}

ProductWeights<double> rl_product_weights(double alpha, double h, std::size_t n_max) {
    if (!(alpha > 0.0)) throw OrderError("integral order must be positive");
    const double p = alpha + 1.0;
    const double scale = std::pow(h, alpha) / std::tgamma(alpha + 2.0);
    ProductWeights<double> w;
    w.start.assign(n_max + 1, 0.0);
    w.conv.assign(n_max + 1, 0.0);
    w.conv[0] = scale;
    for (std::size_t m = 1; m <= n_max; ++m) w.conv[m] = scale * second_difference(static_cast<double>(m), p);
    for (std::size_t n = 1; n <= n_max; ++n) {
        // (n-1)^p - (n-1-alpha) n^alpha = n^p [(1 - 1/n)^p - 1 + p/n]
        const double nn = static_cast<double>(n);
        w.start[n] = scale * std::pow(nn, p) * (std::expm1(p * std::log1p(-1.0 / nn)) + p / nn);
    }
    return w;
}

ProductWeights<cplx> ml_product_weights(double alpha, cplx lambda, double h, std::size_t n_max) {
    if (!(alpha > 0.0)) throw OrderError("kernel order must be positive");
    // On [(m-1)h, mh] with m >= 2 the kernel is smooth, so its moments
    // against the two hat functions are taken by Gauss-Legendre; the
    // singular first cell uses closed-form primitives.
    using Rule = boost::math::quadrature::gauss<double, 10>;
    const auto& abscissa = Rule::abscissa();
    const auto& gweights = Rule::weights();

    std::vector<cplx> a(n_max + 2), b(n_max + 2);  // weights on the left/right node of cell m
    const double ha = std::pow(h, alpha);
    const cplx z = lambda * ha;
    const cplx e1 = specfun::mittag_leffler({alpha, alpha + 1.0}, z);
    const cplx e2 = specfun::mittag_leffler({alpha, alpha + 2.0}, z);
    b[1] = ha * e2;
    a[1] = ha * (e1 - e2);
    for (std::size_t m = 2; m <= n_max + 1; ++m) {
        const double lo = (static_cast<double>(m) - 1.0) * h;
        const double mid = lo + 0.5 * h;
        cplx am = 0.0, bm = 0.0;
        auto add = [&](double x, double weight) {
            const double v = mid + 0.5 * h * x;
            const cplx k = specfun::ml_kernel_w(alpha, lambda, v) * (0.5 * h * weight);
            // right node weight is (mh - v)/h, the left one (v - (m-1)h)/h
            const double r = (lo + h - v) / h;
            bm += k * r;
            am += k * (1.0 - r);
        };
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            if (abscissa[i] == 0.0) {
                add(0.0, gweights[i]);
            } else {
                add(abscissa[i], gweights[i]);
                add(-abscissa[i], gweights[i]);
            }
        }
        a[m] = am;
        b[m] = bm;
    }
    ProductWeights<cplx> w;
    w.start.assign(n_max + 1, 0.0);
    w.conv.assign(n_max + 1, 0.0);
    w.conv[0] = b[1];
    for (std::size_t m = 1; m <= n_max; ++m) w.conv[m] = a[m] + b[m + 1];
    for (std::size_t n = 1; n <= n_max; ++n) w.start[n] = a[n];
    return w;
}

template <class T>
SampledFunction<T> katugampola_integral(const SampledFunction<T>& f, const FracOrder& order, double alpha_i) {
    order.validate();
    if (!(alpha_i > 0.0) || !std::isfinite(alpha_i)) {
        std::ostringstream os;
        os << "katugampola_integral: order must be positive, got " << alpha_i;
        throw OrderError(os.str());
    }
    f.validate();
    const std::size_t n_max = f.grid.intervals();
    const auto weights = rl_product_weights(alpha_i, f.grid.step, n_max);
    SampledFunction<T> out{f.grid, std::vector<T>(f.grid.size, T{})};
    for (std::size_t n = 1; n <= n_max; ++n) out.values[n] = weights.apply(f.values, n);
    return out;
}

template <class T>
SampledFunction<T> ck_derivative(const SampledFunction<T>& f, const FracOrder& order, bool caputo) {
    order.validate_derivative_order();
    f.validate();
    if (f.grid.size < 3) throw GridError("ck_derivative needs at least 3 nodes");
    const double alpha = order.alpha;
    const double h = f.grid.step;
    const std::size_t n_max = f.grid.intervals();
    // L1: D f(w_n) = h^{-alpha}/Gamma(2-alpha) sum_k c_k (f_{n-k} - f_{n-k-1}),
    // c_k = (k+1)^{1-alpha} - k^{1-alpha}.
    std::vector<double> c(n_max);
    for (std::size_t k = 0; k < n_max; ++k) {
        const double kk = static_cast<double>(k);
        c[k] = std::pow(kk + 1.0, 1.0 - alpha) - std::pow(kk, 1.0 - alpha);
    }
    const double scale = std::pow(h, -alpha) / std::tgamma(2.0 - alpha);
    std::vector<T> diff(f.grid.size, T{});
    for (std::size_t j = 1; j <= n_max; ++j) diff[j] = f.values[j] - f.values[j - 1];

    SampledFunction<T> out{f.grid, std::vector<T>(f.grid.size, T{})};
    for (std::size_t n = 1; n <= n_max; ++n) {
        T acc{};
        for (std::size_t k = 0; k < n; ++k) acc += c[k] * diff[n - k];
        out.values[n] = scale * acc;
        if (!caputo) {
            // derivative of the constant f(t0): w^{-alpha}/Gamma(1-alpha)
            out.values[n] += f.values[0] * (std::pow(f.grid.node(n), -alpha) / std::tgamma(1.0 - alpha));
        }
    }
    out.values[0] = 2.0 * out.values[1] - out.values[2];
    out.first_node_extrapolated = true;
    return out;
}

template struct SampledFunction<double>;
template struct SampledFunction<cplx>;
template RealSamples katugampola_integral(const RealSamples&, const FracOrder&, double);
template ComplexSamples katugampola_integral(const ComplexSamples&, const FracOrder&, double);
template RealSamples ck_derivative(const RealSamples&, const FracOrder&, bool);
template ComplexSamples ck_derivative(const ComplexSamples&, const FracOrder&, bool);

}  // namespace ckstab::fraccalc
