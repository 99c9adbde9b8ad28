#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "ckstab/errors.hpp"
#include "ckstab/specfun.hpp"
#include "double_double.hpp"
#include "special.hpp"

namespace ckstab::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

// An evaluator whose relative error estimate is below this is accepted
// without trying the others.
constexpr double kGoodEnough = 1e-12;
// Series evaluators are attempted while |z|^{1/alpha} stays below this; the
// asymptotic remainder is ~exp(-|z|^{1/alpha}) beyond it.
constexpr double kSeriesMaxX = 60.0;
constexpr double kAsymptoticMinX = 3.0;
constexpr int kMaxSeriesTerms = 6000;
constexpr int kMaxAsymptoticTerms = 250;
constexpr double kDDUnit = 4.93e-32;  // 2^-104

// Complex Kahan-Babuska (Neumaier) accumulator.
struct CompensatedSum {
    cplx sum{0.0, 0.0};
    cplx comp{0.0, 0.0};

    void add(cplx x) {
        sum_part(sum, comp, x);
    }
    cplx value() const { return sum + comp; }

private:
    static void sum_part(cplx& s, cplx& c, cplx x) {
        auto step = [](double& acc, double& cc, double v) {
            const double t = acc + v;
            if (std::fabs(acc) >= std::fabs(v))
                cc += (acc - t) + v;
            else
                cc += (v - t) + acc;
            acc = t;
        };
        double sr = s.real(), si = s.imag(), cr = c.real(), ci = c.imag();
        step(sr, cr, x.real());
        step(si, ci, x.imag());
        s = {sr, si};
        c = {cr, ci};
    }
};

MLResult relative(cplx value, double abs_error, MLRegime regime) {
    const double mag = std::abs(value);
    double rel = mag > 0.0 ? abs_error / mag : kInf;
    if (!std::isfinite(mag)) rel = 0.0;
    return {value, rel, regime};
}

// Power series in double precision; every term is formed in log space so
// that neither z^k nor Gamma(k alpha + beta) overflow.
MLResult series_double(const MLParams& p, cplx z) {
    const double r = std::abs(z);
    const double theta = principal_arg(z);
    const double log_r = std::log(r);
    CompensatedSum sum;
    double budget = 0.0;
    double prev_mag = kInf;
    bool converged = false;
    for (int k = 0; k < kMaxSeriesTerms; ++k) {
        const double lg = detail::lgamma(k * p.alpha + p.beta);
        const double log_mag = k * log_r - lg;
        const double mag = std::exp(log_mag);
        sum.add(std::polar(mag, k * theta));
        budget += mag * (2.0 + std::fabs(k * log_r) + std::fabs(lg) + std::fabs(k * theta));
        const double current = std::abs(sum.value());
        if (k > 0 && mag < prev_mag && (mag <= 1e-17 * current || mag == 0.0)) {
            converged = true;
            break;
        }
        prev_mag = mag;
    }
    const cplx value = sum.value();
    if (!converged) return {value, kInf, MLRegime::Series};
    return relative(value, kEps * budget, MLRegime::Series);
}

// Ratios Gamma((k-1) alpha + beta) / Gamma(k alpha + beta) in double-double.
// They depend on (alpha, beta) only, and callers evaluate many z with the
// same parameters, so each thread keeps a few recent sequences.
class RatioCache {
public:
    const std::vector<ext::dd>& ratios(double alpha, double beta, std::size_t count) {
        Entry* hit = nullptr;
        for (auto& e : entries_) {
            if (e.alpha == alpha && e.beta == beta && !e.ratio.empty()) hit = &e;
        }
        if (hit == nullptr) {
            hit = &entries_[next_];
            next_ = (next_ + 1) % entries_.size();
            *hit = Entry{alpha, beta, {}, {}};
        }
        auto arg_of = [&](std::size_t k) {
            return ext::two_prod(static_cast<double>(k), alpha) + ext::dd(beta);
        };
        if (hit->ratio.empty()) {
            hit->last_lg = ext::lgamma(arg_of(0));
            hit->ratio.push_back(ext::exp(-hit->last_lg));  // slot 0 holds 1/Gamma(beta)
        }
        while (hit->ratio.size() < count) {
            const ext::dd lg = ext::lgamma(arg_of(hit->ratio.size()));
            hit->ratio.push_back(ext::exp(hit->last_lg - lg));
            hit->last_lg = lg;
        }
        return hit->ratio;
    }

private:
    struct Entry {
        double alpha = 0.0;
        double beta = 0.0;
        std::vector<ext::dd> ratio;
        ext::dd last_lg;
    };
    std::array<Entry, 8> entries_{};
    std::size_t next_ = 0;
};

// Same series in double-double arithmetic, t_k = t_{k-1} z ratio_k.
MLResult series_extended(const MLParams& p, cplx z) {
    using ext::cdd;
    thread_local RatioCache cache;
    constexpr std::size_t kChunk = 64;
    const std::vector<ext::dd>* ratio = &cache.ratios(p.alpha, p.beta, kChunk);
    cdd term{(*ratio)[0], ext::dd(0.0)};
    cdd sum = term;
    double budget = ext::magnitude(term);
    double prev_mag = kInf;
    bool converged = false;
    for (std::size_t k = 1; k < static_cast<std::size_t>(kMaxSeriesTerms); ++k) {
        if (k >= ratio->size()) ratio = &cache.ratios(p.alpha, p.beta, k + kChunk);
        term = term * z * (*ratio)[k];
        sum = sum + term;
        const double mag = ext::magnitude(term);
        budget += mag * (static_cast<double>(k) + 2.0);
        if (mag < prev_mag && (mag <= 1e-34 * ext::magnitude(sum) || mag == 0.0)) {
            converged = true;
            break;
        }
        prev_mag = mag;
    }
    const cplx value{sum.re.to_double(), sum.im.to_double()};
    if (!converged) return {value, kInf, MLRegime::ExtendedSeries};
    // Rounding to double adds half an ulp.
    return relative(value, kDDUnit * 8.0 * budget + 0.5 * kEps * std::abs(value),
                    MLRegime::ExtendedSeries);
}

// Asymptotic expansion, valid for 0 < alpha <= 2:
//   E(z) ~ (1/alpha) sum_m zeta_m^{1-beta} exp(zeta_m) - sum_k z^{-k} / Gamma(beta - alpha k),
// zeta_m = |z|^{1/alpha} exp(i (arg z + 2 pi m)/alpha) over branches with
// -alpha pi < arg z + 2 pi m <= alpha pi.
MLResult asymptotic(const MLParams& p, cplx z) {
    const double r = std::abs(z);
    const double theta = principal_arg(z);
    const double log_r = std::log(r);
    const double big_x = std::pow(r, 1.0 / p.alpha);
    const double log_x = log_r / p.alpha;

    CompensatedSum sum;
    double budget = 0.0;
    const int m_lo = static_cast<int>(std::floor((-p.alpha * kPi - theta) / (2.0 * kPi)));
    const int m_hi = static_cast<int>(std::ceil((p.alpha * kPi - theta) / (2.0 * kPi)));
    for (int m = m_lo; m <= m_hi; ++m) {
        const double phi = theta + 2.0 * kPi * m;
        if (!(phi > -p.alpha * kPi && phi <= p.alpha * kPi)) continue;
        const double ang = phi / p.alpha;
        const double re_zeta = big_x * std::cos(ang);
        const double im_zeta = big_x * std::sin(ang);
        const double log_mag = (1.0 - p.beta) * log_x + re_zeta - std::log(p.alpha);
        const double mag = std::exp(log_mag);
        sum.add(std::polar(mag, (1.0 - p.beta) * ang + im_zeta));
        budget += kEps * mag * (2.0 + std::fabs(log_mag) + big_x);
    }

    // Stopping uses the smooth envelope |1/Gamma(x)| <= Gamma(1 - x) / pi
    // (x < 1), since the terms themselves dip near the poles of Gamma.
    double last_env = kInf;
    double remainder = 0.0;
    bool stopped = false;
    for (int k = 1; k <= kMaxAsymptoticTerms; ++k) {
        const double x = p.beta - p.alpha * k;
        const double env = x < 1.0 ? std::exp(-k * log_r + detail::lgamma(1.0 - x)) / kPi
                                   : std::exp(-k * log_r - detail::lgamma(x));
        if (env > last_env) {
            remainder = last_env;
            stopped = true;
            break;
        }
        last_env = env;
        if (detail::is_nonpositive_integer(x)) continue;
        int sign = 1;
        const double log_mag = -k * log_r + detail::log_abs_rgamma(x, sign);
        const double mag = std::exp(log_mag);
        sum.add(std::polar(-sign * mag, -k * theta));
        budget += kEps * mag * (2.0 + std::fabs(log_mag) + std::fabs(k * theta));
        if (env <= 1e-17 * std::abs(sum.value())) {
            remainder = env;
            stopped = true;
            break;
        }
    }
    if (!stopped && std::isfinite(last_env)) remainder = last_env;
    const cplx value = sum.value();
    return relative(value, remainder + budget, MLRegime::Asymptotic);
}

bool better(const MLResult& a, const MLResult& b) { return a.error < b.error; }

}  // namespace

const char* to_string(MLRegime regime) {
    switch (regime) {
        case MLRegime::Zero: return "zero";
        case MLRegime::Series: return "series";
        case MLRegime::ExtendedSeries: return "extended-series";
        case MLRegime::Asymptotic: return "asymptotic";
    }
    return "unknown";
}

void MLParams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        std::ostringstream os;
        os << "mittag_leffler: need alpha > 0 and beta > 0, got alpha=" << alpha << " beta=" << beta;
        throw OrderError(os.str());
    }
}

MLResult mittag_leffler_eval(MLParams p, cplx z) {
    p.validate();
    if (z == cplx(0.0, 0.0)) return {cplx(rgamma(p.beta), 0.0), 0.0, MLRegime::Zero};
    const double big_x = std::pow(std::abs(z), 1.0 / p.alpha);
    const bool series_ok = big_x <= kSeriesMaxX;
    const bool asymptotic_ok = big_x >= kAsymptoticMinX && p.alpha <= 2.0;

    MLResult best{cplx(std::numeric_limits<double>::quiet_NaN(), 0.0), kInf, MLRegime::Series};
    auto consider = [&](const MLResult& candidate) {
        if (better(candidate, best)) best = candidate;
        return best.error <= kGoodEnough;
    };
    auto attempts = [&] {
        if (asymptotic_ok && big_x > 20.0) {
            if (consider(asymptotic(p, z))) return;
            if (series_ok && consider(series_double(p, z))) return;
        } else {
            if (series_ok && consider(series_double(p, z))) return;
            if (asymptotic_ok && consider(asymptotic(p, z))) return;
        }
        if (series_ok) consider(series_extended(p, z));
    };
    attempts();
    // Real arguments have real values; drop rounding residue from the phases.
    if (z.imag() == 0.0) best.value = {best.value.real(), 0.0};
    return best;
}

cplx mittag_leffler(MLParams p, cplx z) {
    const MLResult result = mittag_leffler_eval(p, z);
    const double tolerance = std::abs(z) <= kSeriesRadius ? kSeriesTolerance : kAsymptoticTolerance;
    if (!(result.error <= tolerance) && std::isfinite(std::abs(result.value))) {
        std::ostringstream os;
        os.precision(6);
        os << "mittag_leffler: no regime reached tolerance " << tolerance << " for alpha=" << p.alpha
           << " beta=" << p.beta << " z=" << z << "; best relative error " << result.error << " ("
           << to_string(result.regime) << ")";
        throw ConvergenceError(os.str(), result.error);
    }
    return result.value;
}

cplx ml_kernel_w(double alpha, cplx lambda, double v) {
    if (!(v > 0.0)) throw DomainError("ml_kernel: need v > 0");
    const double va = std::pow(v, alpha);
    return (va / v) * mittag_leffler({alpha, alpha}, lambda * va);
}

cplx ml_kernel(const FracOrder& order, cplx lambda, double t, double s) {
    order.validate();
    if (!(s >= order.t0) || !(s < t)) {
        std::ostringstream os;
        os << "ml_kernel: need t0 <= s < t, got t0=" << order.t0 << " s=" << s << " t=" << t;
        throw DomainError(os.str());
    }
    const double rho = order.rho;
    const double v = (std::pow(t, rho) - std::pow(s, rho)) / rho;
    return ml_kernel_w(order.alpha, lambda, v) * std::pow(s, rho - 1.0);
}

}  // namespace ckstab::specfun
