#pragma once

// Double-double arithmetic built on error-free transforms (Dekker/Knuth),
// giving roughly 106 bits of significand. Only the operations needed by the
// extended-precision Mittag-Leffler series are provided.

#include <cmath>
#include <complex>
#include <limits>

namespace ckstab::ext {

struct dd {
    double hi = 0.0;
    double lo = 0.0;

    constexpr dd() = default;
    constexpr dd(double h) : hi(h), lo(0.0) {}  // NOLINT(google-explicit-constructor)
    constexpr dd(double h, double l) : hi(h), lo(l) {}

    double to_double() const { return hi + lo; }
};

inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline dd quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline dd operator+(dd a, dd b) {
    dd s = two_sum(a.hi, b.hi);
    dd t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline dd operator-(dd a) { return {-a.hi, -a.lo}; }
inline dd operator-(dd a, dd b) { return a + (-b); }

inline dd operator*(dd a, dd b) {
    dd p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline dd operator*(dd a, double b) {
    dd p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

inline dd operator/(dd a, dd b) {
    double q1 = a.hi / b.hi;
    dd r = a - b * q1;
    double q2 = r.hi / b.hi;
    r = r - b * q2;
    double q3 = r.hi / b.hi;
    dd q = quick_two_sum(q1, q2);
    return q + dd(q3);
}

inline dd& operator+=(dd& a, dd b) { return a = a + b; }
inline dd& operator*=(dd& a, dd b) { return a = a * b; }

inline dd ldexp(dd a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }
inline dd abs(dd a) { return a.hi < 0.0 ? -a : a; }

inline const dd kLn2{6.931471805599452862e-01, 2.319046813846299558e-17};
inline const dd kTwoPi{6.283185307179586232e+00, 2.449293598294706414e-16};

inline dd exp(dd a) {
    if (a.hi > 709.7) return {std::numeric_limits<double>::infinity(), 0.0};
    if (a.hi < -745.0) return {0.0, 0.0};
    const double k = std::nearbyint(a.hi / kLn2.hi);
    dd r = a - kLn2 * k;
    constexpr int kHalvings = 10;
    r = ldexp(r, -kHalvings);
    // e^r - 1 by Taylor; |r| < 3.4e-4 so 12 terms reach well below 1e-32.
    dd term = r;
    dd sum = r;
    for (int n = 2; n <= 12; ++n) {
        term = term * r / dd(static_cast<double>(n));
        sum += term;
    }
    // (1 + p)^2 - 1 = 2p + p^2 keeps the small quantity in full precision.
    for (int i = 0; i < kHalvings; ++i) sum = sum * 2.0 + sum * sum;
    return ldexp(sum + dd(1.0), static_cast<int>(k));
}

inline dd log(dd a) {
    dd x = std::log(a.hi);
    for (int i = 0; i < 2; ++i) x = x + a * exp(-x) - dd(1.0);
    return x;
}

/// log Gamma(x) for x > 0 in double-double: upward shift then Stirling.
inline dd lgamma(dd x) {
    constexpr double kShift = 25.0;
    dd prod = 1.0;
    bool shifted = false;
    while (x.hi < kShift) {
        prod = prod * x;
        x = x + dd(1.0);
        shifted = true;
    }
    // Bernoulli numbers B_{2j} as exact rationals, j = 1..14.
    static constexpr double kNum[] = {1.0,         -1.0,       1.0,        -1.0,        5.0,
                                      -691.0,      7.0,        -3617.0,    43867.0,     -174611.0,
                                      854513.0,    -236364091.0, 8553103.0, -23749461029.0};
    static constexpr double kDen[] = {6.0,  30.0,  42.0, 30.0, 66.0, 2730.0, 6.0,
                                      510.0, 798.0, 330.0, 138.0, 2730.0, 6.0, 870.0};
    static const dd half_log_two_pi = log(kTwoPi) * 0.5;
    dd result = (x - dd(0.5)) * log(x) - x + half_log_two_pi;
    const dd inv = dd(1.0) / x;
    const dd inv2 = inv * inv;
    dd power = inv;
    for (int j = 1; j <= 14; ++j) {
        const double denom = kDen[j - 1] * (2.0 * j) * (2.0 * j - 1.0);
        result += dd(kNum[j - 1]) / dd(denom) * power;
        power = power * inv2;
    }
    if (shifted) result = result - log(prod);
    return result;
}

struct cdd {
    dd re;
    dd im;
};

inline cdd operator+(cdd a, cdd b) { return {a.re + b.re, a.im + b.im}; }

inline cdd operator*(cdd a, std::complex<double> b) {
    return {a.re * b.real() - a.im * b.imag(), a.re * b.imag() + a.im * b.real()};
}

inline cdd operator*(cdd a, dd b) { return {a.re * b, a.im * b}; }

inline double magnitude(cdd a) { return std::hypot(a.re.to_double(), a.im.to_double()); }

}  // namespace ckstab::ext
