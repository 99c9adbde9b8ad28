#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ckstab/errors.hpp"
#include "ckstab/specfun.hpp"
#include "special.hpp"

namespace ckstab::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos approximation, g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

cplx lanczos(cplx z) {
    z -= 1.0;
    cplx x = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) x += kLanczos[i] / (z + static_cast<double>(i));
    const cplx t = z + kLanczosG + 0.5;
    const double sqrt_two_pi = std::sqrt(2.0 * kPi);
    return sqrt_two_pi * std::exp((z + 0.5) * std::log(t) - t) * x;
}

cplx sinpi(cplx z) {
    const double x = z.real();
    const double y = z.imag();
    return {detail::sinpi(x) * std::cosh(kPi * y), detail::cospi(x) * std::sinh(kPi * y)};
}

}  // namespace

double principal_arg(cplx z) {
    const double a = std::atan2(z.imag(), z.real());
    return a == -kPi ? kPi : a;
}

cplx gamma(cplx z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
        std::ostringstream os;
        os << "gamma: pole at z = " << z.real();
        throw PoleError(os.str());
    }
    if (z.real() < 0.5) return kPi / (sinpi(z) * lanczos(1.0 - z));
    return lanczos(z);
}

double rgamma(double x) {
    if (detail::is_nonpositive_integer(x)) return 0.0;
    if (x > 0.0) return x < 170.0 ? 1.0 / std::tgamma(x) : std::exp(-detail::lgamma(x));
    int sign = 1;
    const double log_mag = detail::log_abs_rgamma(x, sign);
    return sign * std::exp(log_mag);
}

namespace detail {

double lgamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

double sinpi(double x) {
    // Reduce to [-1, 1]; exact for |x| < 2^52.
    double r = x - 2.0 * std::nearbyint(0.5 * x);
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    if (r > 0.5) r = 1.0 - r;
    if (r < -0.5) r = -1.0 - r;
    return std::sin(kPi * r);
}

double cospi(double x) {
    double r = std::fabs(x - 2.0 * std::nearbyint(0.5 * x));
    if (r == 0.5) return 0.0;
    return r <= 0.5 ? std::cos(kPi * r) : -std::cos(kPi * (1.0 - r));
}

bool is_nonpositive_integer(double x) {
    if (x > 0.0) return false;
    const double n = std::nearbyint(x);
    return std::fabs(x - n) <= 1e-12 * std::max(1.0, std::fabs(x));
}

double log_abs_rgamma(double x, int& sign) {
    if (x > 0.0) {
        sign = 1;
        return -lgamma(x);
    }
    // 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi
    const double s = sinpi(x);
    sign = s < 0.0 ? -1 : 1;
    return lgamma(1.0 - x) + std::log(std::fabs(s)) - std::log(kPi);
}

}  // namespace detail

}  // namespace ckstab::specfun
