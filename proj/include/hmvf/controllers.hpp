#pragma once

#include <array>

#include "hmvf/vehicle_model.hpp"

namespace hmvf {

/// sign(x) with sign(0) = 0.
inline double signum(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;
}

/// Boundary-layer saturation: psi/phi inside |psi| <= phi, sign(psi) outside.
double saturate(double psi, double phi);

enum class SwitchMode {
    Sign,       // discontinuous switching
    Saturation  // boundary-layer switching (refined controller)
};

enum class AdaptiveLawMode {
    Basic,    // gains only grow
    Boundary  // gains relax inside the boundary layer, floored
};

/// Gap tracking errors: eps1 = gap - s*, eps2 = d(eps1)/dt evaluated
/// kinematically as (v_lead - v_follow) - ds*/dt.
struct ErrorState {
    double eps1 = 0.0;  // [m]
    double eps2 = 0.0;  // [m/s]
};

/// Fast non-singular terminal sliding-mode layer parameters.
struct FtsmcParams {
    double beta = 0.7;        // surface gain
    double delta = 1.2;       // exponent shape, in (1, 1.5)
    double eps_switch = 1.0;  // |eps2| threshold for the exponent switch, >= 1
    double alpha1 = 1.8;      // reaching gain, >= chi_bound + varsigma
    double alpha2 = 0.8;      // proportional reaching gain, >= 0
    double varsigma = 0.6;    // reaching margin, > 0
    double B1 = 1.0;          // switching-gain floor, >= 1
    double B2 = 1.0;          // switching-gain initial surplus, >= 0
    double a_decay = 0.8;     // switching-gain decay rate [1/s]
    double K_m = 0.4;         // effective-gain lower bound (authority floor)
    double K_M = 1.0;         // effective-gain upper bound
    double chi0 = 1.2;        // uncertainty bound constant term
    double chi1 = 0.02;       // uncertainty bound |eps1| coefficient
    double chi2 = 0.25;       // uncertainty bound |eps2| coefficient

    void validate() const;
    bool operator==(const FtsmcParams&) const = default;
    /// Assumption-style state-dependent bound chi0 + chi1|e1| + chi2|e2|.
    double chi_bound(const ErrorState& es) const;
};

/// Adaptive integral layer parameters.
struct AdaptiveParams {
    double k0 = 0.05;   // xi0 adaptation rate
    double k1 = 0.005;  // xi1 adaptation rate
    double k2 = 0.02;   // xi2 adaptation rate
    double k3 = 1.2;    // proportional surface gain
    double k4 = 0.4;    // fractional surface gain
    double p2 = 0.6;    // fractional exponent, in (0, 1]
    double theta = 1.0; // integral-surface memory decay [1/s]
    double phi = 0.8;   // boundary layer width

    std::array<double, 3> xi_init = {0.10, 0.01, 0.05};   // initial gains
    std::array<double, 3> xi_floor = {0.02, 0.002, 0.01}; // boundary-mode floors
    std::array<double, 3> k_bar = {0.01, 0.001, 0.005};   // recovery rates at the floor

    void validate() const;
    bool operator==(const AdaptiveParams&) const = default;
};

/// Mutable controller memory: ISM integral state, initial-condition memory
/// for the integral surface, adaptive gains, elapsed time.
struct ControllerState {
    double z = 0.0;
    double eps2_0 = 0.0;
    double z_0 = 0.0;
    double t = 0.0;
    std::array<double, 3> xi_hat = {0.0, 0.0, 0.0};
    bool initialized = false;

    void init(double eps2_at_start, const AdaptiveParams& p);
};

/// Commanded-acceleration envelope: accelerations clamp to [-decel_max, accel_max].
struct ActuatorLimits {
    double accel_max = 3.0;  // [m/s^2]
    double decel_max = 6.0;  // positive magnitude [m/s^2]

    double clamp(double a) const;
    bool operator==(const ActuatorLimits&) const = default;
};

ErrorState tracking_errors(const VehiclePair& pair, double s_star, double s_star_rate);

/// Terminal exponent q = delta + (1 - delta) * sign(|eps2| - eps_switch);
/// q = delta exactly at the threshold (sign(0) = 0).
double terminal_exponent(double eps2, double delta, double eps_switch);

/// Fast terminal surface psi_n = eps1 + beta * |eps2|^q * sign(eps2).
double terminal_surface(const ErrorState& es, double beta, double q);

/// Exponentially declining switching gain A(t) = B1 + B2 * exp(-a t).
double switching_gain(double t, const FtsmcParams& p);

/// Terminal sliding-mode control
///   h_n = -(1/K_m) (alpha2 psi_n + A(t) alpha1 sgn(psi_n)
///                   + (1/(beta q)) |eps2|^(2-q) sgn(eps2))
/// with sgn replaced by the boundary-layer saturation in refined mode.
/// Non-singular: 2 - q stays in (0, 1], so the law is finite at eps2 = 0.
double ftsmc_control(const ErrorState& es, double psi_n, double t,
                     const FtsmcParams& p, SwitchMode mode, double phi);

/// Integral sliding surface psi_a = eps2 + z - exp(-theta t)(eps2(0) + z(0)).
/// Zero at t = 0 for any initial condition, which removes the reaching phase.
double integral_surface(const ErrorState& es, const ControllerState& cs, double theta);

/// Memory forcing term Gamma(t) = theta exp(-theta t)(eps2(0) + z(0)).
double gamma_term(const ControllerState& cs, double theta);

/// Adaptive layer control
///   h_a = -(1/K_m) (k3 psi_a + k4 |psi_a|^p2 sgn(psi_a) + |Gamma| sgn(psi_a)
///                   + (xi0 + xi1|eps1| + xi2|eps2|) sgn(psi_a)).
double adaptive_control(double psi_a, const ErrorState& es, double gamma,
                        const ControllerState& cs, const AdaptiveParams& p,
                        double K_m, SwitchMode mode);

/// Euler step of the adaptive gain laws. Basic mode only grows the gains.
/// Boundary mode lets them shrink while |psi_a| < phi and projects each gain
/// onto [floor, inf) after the step; at the floor they recover at k_bar.
void update_adaptive_gains(double psi_a, const ErrorState& es, double dt,
                           ControllerState& cs, const AdaptiveParams& p,
                           AdaptiveLawMode mode);

/// Finite-time settling bound. theta == 0 gives V0^(1-sigma) / (rho (1-sigma));
/// theta > 0 gives (1/(theta (1-sigma))) ln(theta V0^(1-sigma)
///                                          + rho / (theta (1-sigma))).
double settling_time_bound(double V0, double rho, double sigma, double theta);

/// Both layers evaluated on the current state. h_n and h_a are the raw law
/// outputs; h is the realizable command: each layer's slice is clamped to
/// the actuator envelope (the n-layer slice also feeds the ISM integrator,
/// keeping z free of windup, and neither saturated layer can veto the
/// other), then the sum is clamped again.
struct ControlOutput {
    double psi_n = 0.0;
    double psi_a = 0.0;
    double h_n = 0.0;         // raw terminal-layer law
    double h_a = 0.0;         // raw adaptive-layer law
    double h_n_applied = 0.0; // envelope-clamped n-layer slice (drives z)
    double h = 0.0;           // clamped combined command
    bool clamped = false;
};

ControlOutput combined_control(const ErrorState& es, const ControllerState& cs,
                               double t, const FtsmcParams& pf,
                               const AdaptiveParams& pa, SwitchMode mode,
                               const ActuatorLimits& limits);

/// PID baseline on eps1 with clamped integral and backward-difference
/// derivative.
struct PidParams {
    double kp = 2.0;
    double ki = 0.1;
    double kd = 2.9;
    double integral_limit = 10.0;  // |integral of eps1| clamp

    void validate() const;
    bool operator==(const PidParams&) const = default;
};

class PidController {
public:
    PidController() = default;
    explicit PidController(const PidParams& p) : params_(p) {}

    double update(double eps1, double dt);
    void reset();

private:
    PidParams params_;
    double integral_ = 0.0;
    double prev_eps1_ = 0.0;
    bool has_prev_ = false;
};

enum class ControllerKind { Aftsmc, Ftsmc, Pid, None };

/// Closed-loop wrapper around the sliding-mode layers.
///
/// The physical error dynamics carry the control with a negative coefficient
/// (the blend adds eta_c * h to the follower's acceleration, which enters
/// eps2' with a minus). The wrapper therefore evaluates the laws on negated
/// errors, so that its output blends directly and opposes error growth, with
/// effective gain eta_c in [K_m, K_M] once engaged. Surfaces, layer outputs
/// and gains reported here are the controller's working values.
///
/// While the authority factor sits below the engagement floor the command is
/// not applied, so the internal state holds still; each disengaged->engaged
/// transition re-anchors the integral surface (z = 0, eps2(0) = current
/// error rate, local time 0), which restores psi_a = 0 at the moment control
/// resumes. Adaptive gains persist across engagements.
class SharedController {
public:
    SharedController(ControllerKind kind, const FtsmcParams& pf,
                     const AdaptiveParams& pa, const PidParams& pp,
                     SwitchMode switch_mode, AdaptiveLawMode law_mode,
                     const ActuatorLimits& limits);

    /// Evaluate the command for the current physical errors, then advance the
    /// internal state (z, adaptive gains, elapsed time) by dt. Returns zeros
    /// and freezes the state when not engaged.
    ControlOutput step(const ErrorState& physical, double dt, bool engaged);

    const ControllerState& state() const { return state_; }
    ControllerKind kind() const { return kind_; }

private:
    ControllerKind kind_;
    FtsmcParams pf_;
    AdaptiveParams pa_;
    SwitchMode switch_mode_;
    AdaptiveLawMode law_mode_;
    ActuatorLimits limits_;
    ControllerState state_;
    PidController pid_;
    bool was_engaged_ = false;
};

}  // namespace hmvf
