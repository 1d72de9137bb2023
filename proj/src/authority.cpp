#include "hmvf/authority.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmvf {

void AllocationParams::validate() const {
    if (!(0.0 <= r_min && r_min < r_mid && r_mid < r_max)) {
        throw std::invalid_argument("AllocationParams: need 0 <= r_min < r_mid < r_max");
    }
    if (!(k1 > 0.0 && k1 <= 0.5)) {
        throw std::invalid_argument("AllocationParams: k1 must be in (0, 0.5]");
    }
    if (k2 <= 0.0) {
        throw std::invalid_argument("AllocationParams: k2 must be > 0");
    }
    if (eta_floor < 0.0 || eta_floor > 1.0) {
        throw std::invalid_argument("AllocationParams: eta_floor must be in [0, 1]");
    }
}

double authority_factor(double reaction_time, const AllocationParams& p) {
    if (reaction_time < 0.0) {
        throw std::invalid_argument("authority_factor: reaction time must be >= 0");
    }
    if (reaction_time < p.r_min) return 0.0;
    if (reaction_time > p.r_max) return 1.0;
    const double eta = p.k1 * (1.0 + std::tanh(p.k2 * (reaction_time - p.r_mid)));
    return std::clamp(eta, 0.0, 1.0);
}

double blend_accel(double a_driver, double h, double eta_c) {
    if (eta_c < 0.0 || eta_c > 1.0) {
        throw std::invalid_argument("blend_accel: eta_c must be in [0, 1]");
    }
    return (1.0 - eta_c) * a_driver + eta_c * h;
}

}  // namespace hmvf
