#include "confspec/constructions.hpp"
#include "confspec/errors.hpp"

#include <cmath>

namespace confspec::constructions {

double stereographic_factor(const Vec2& x) {
    const double s = 1.0 + x.squaredNorm();
    return 4.0 / (s * s);
}

double cap_epsilon(double R) {
    if (!(R > 0.0) || !std::isfinite(R)) throw ValidationError("cap parameter R must be positive");
    return 2.0 * R / (1.0 + R * R);
}

double cap_metric_factor(const Vec2& x, const CapSpec& spec) {
    const double R = spec.R;
    const double rho = spec.rho_target;
    if (!(R > 0.0) || !(rho > 0.0)) throw ValidationError("cap parameters must be positive");
    const double r2 = x.squaredNorm();
    if (r2 <= rho * rho) {
        const Vec2 y = (R / rho) * x;
        const double f = spec.profile ? spec.profile(y) : 1.0;
        const double s = 1.0 + y.squaredNorm();
        return f * f * (R * R) / (rho * rho) * 4.0 / (s * s);
    }
    const double q = 1.0 + R * R;
    return 4.0 * R * R * rho * rho / (q * q * r2 * r2);
}

}  // namespace confspec::constructions
