#include <cmath>
#include <numbers>
#include <sstream>

#include "ckstab/errors.hpp"
#include "ckstab/specfun.hpp"

namespace ckstab::specfun {

namespace {
constexpr int kMaxDoublings = 200;
}

BoundConstants tail_constants(double alpha, cplx lambda) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw OrderError("tail_constants: alpha must lie in (0, 1)");
    const double threshold = alpha * std::numbers::pi / 2.0;
    if (!(std::fabs(principal_arg(lambda)) > threshold) || std::abs(lambda) == 0.0) {
        std::ostringstream os;
        os << "tail_constants: |arg(lambda)| = " << std::fabs(principal_arg(lambda))
           << " does not exceed alpha*pi/2 = " << threshold;
        throw SectorError(os.str());
    }

    const double mod = std::abs(lambda);
    // Leading asymptotic term of v^{alpha-1} E_{alpha,alpha}(lambda v^alpha) is
    // -lambda^{-2} v^{-alpha-1} / Gamma(-alpha).
    const double leading = 1.0 / (mod * mod * std::abs(gamma(cplx(-alpha, 0.0))));
    BoundConstants out;
    out.t1 = std::pow(kAsymptoticRadius / mod, 1.0 / alpha);
    out.M = 2.0 * leading;

    double worst = 0.0;
    for (int j = 0; j < kTailSamples; ++j) {
        const double v = out.t1 * std::pow(10.0, 4.0 * j / (kTailSamples - 1));
        worst = std::max(worst, std::abs(ml_kernel_w(alpha, lambda, v)) * std::pow(v, alpha + 1.0));
    }
    int doublings = 0;
    while (worst > out.M) {
        if (++doublings > kMaxDoublings) {
            throw ConvergenceError("tail_constants: tail coefficient did not stabilize", worst);
        }
        out.M *= 2.0;
    }
    return out;
}

}  // namespace ckstab::specfun
