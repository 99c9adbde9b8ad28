#include "ckstab/order.hpp"

#include <sstream>

#include "ckstab/errors.hpp"

namespace ckstab {

void FracOrder::validate() const {
    if (!(alpha > 0.0) || !(rho > 0.0) || !(t0 > 0.0) || !std::isfinite(alpha) || !std::isfinite(rho) ||
        !std::isfinite(t0)) {
        std::ostringstream os;
        os << "fractional order needs alpha > 0, rho > 0, t0 > 0; got alpha=" << alpha << " rho=" << rho
           << " t0=" << t0;
        throw OrderError(os.str());
    }
}

void FracOrder::validate_derivative_order() const {
    validate();
    if (!(alpha < 1.0)) {
        std::ostringstream os;
        os << "alpha must lie in (0, 1), got " << alpha;
        throw OrderError(os.str());
    }
}

}  // namespace ckstab
