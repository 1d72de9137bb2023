#pragma once

namespace hmvf {

/// Reaction-time thresholds and shape parameters of the authority curve.
struct AllocationParams {
    double r_min = 0.3;       // below this the driver keeps full authority [s]
    double r_mid = 0.7;       // transition midpoint [s]
    double r_max = 1.4;       // above this the controller takes over [s]
    double k1 = 0.5;          // transition amplitude, in (0, 0.5]
    double k2 = 3.0 / 0.7;    // transition steepness [1/s]; default 3/(r_max - r_mid)
    double eta_floor = 0.4;   // minimum authority for the controller to engage

    void validate() const;
    bool operator==(const AllocationParams&) const = default;
};

/// Authority allocation factor eta_c in [0, 1]:
/// 0 below r_min, 1 above r_max, k1*(1 + tanh(k2*(R - r_mid))) clamped to
/// [0, 1] in between. Non-decreasing in R for valid parameters.
double authority_factor(double reaction_time, const AllocationParams& p);

/// Shared control law: (1 - eta_c) * a_driver + eta_c * h.
double blend_accel(double a_driver, double h, double eta_c);

}  // namespace hmvf
