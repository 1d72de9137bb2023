#include "hmvf/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmvf {

namespace {

double sgnfun(double x, SwitchMode mode, double phi) {
    return mode == SwitchMode::Sign ? signum(x) : saturate(x, phi);
}

}  // namespace

double saturate(double psi, double phi) {
    if (phi <= 0.0) {
        throw std::invalid_argument("saturate: phi must be > 0");
    }
    if (std::abs(psi) <= phi) return psi / phi;
    return signum(psi);
}

void FtsmcParams::validate() const {
    if (beta <= 0.0) throw std::invalid_argument("FtsmcParams: beta must be > 0");
    if (!(delta > 1.0 && delta < 1.5)) {
        throw std::invalid_argument("FtsmcParams: delta must be in (1, 1.5)");
    }
    if (eps_switch < 1.0) {
        throw std::invalid_argument("FtsmcParams: eps_switch must be >= 1");
    }
    if (varsigma <= 0.0) throw std::invalid_argument("FtsmcParams: varsigma must be > 0");
    if (alpha2 < 0.0) throw std::invalid_argument("FtsmcParams: alpha2 must be >= 0");
    if (B1 < 1.0) throw std::invalid_argument("FtsmcParams: B1 must be >= 1");
    if (B2 < 0.0) throw std::invalid_argument("FtsmcParams: B2 must be >= 0");
    if (a_decay <= 0.0) throw std::invalid_argument("FtsmcParams: a_decay must be > 0");
    if (!(0.0 < K_m && K_m <= K_M)) {
        throw std::invalid_argument("FtsmcParams: need 0 < K_m <= K_M");
    }
    if (chi0 < 0.0 || chi1 < 0.0 || chi2 < 0.0) {
        throw std::invalid_argument("FtsmcParams: chi coefficients must be >= 0");
    }
    if (alpha1 < chi0 + varsigma) {
        throw std::invalid_argument("FtsmcParams: alpha1 must be >= chi0 + varsigma");
    }
}

double FtsmcParams::chi_bound(const ErrorState& es) const {
    return chi0 + chi1 * std::abs(es.eps1) + chi2 * std::abs(es.eps2);
}

void AdaptiveParams::validate() const {
    if (k0 < 0.0 || k1 < 0.0 || k2 < 0.0 || k3 < 0.0 || k4 < 0.0) {
        throw std::invalid_argument("AdaptiveParams: k0..k4 must be >= 0");
    }
    if (!(p2 > 0.0 && p2 <= 1.0)) {
        throw std::invalid_argument("AdaptiveParams: p2 must be in (0, 1]");
    }
    if (theta <= 0.0) throw std::invalid_argument("AdaptiveParams: theta must be > 0");
    if (phi <= 0.0) throw std::invalid_argument("AdaptiveParams: phi must be > 0");
    for (int i = 0; i < 3; ++i) {
        if (xi_init[i] <= 0.0) {
            throw std::invalid_argument("AdaptiveParams: xi_init must be > 0");
        }
        if (xi_floor[i] <= 0.0 || k_bar[i] <= 0.0) {
            throw std::invalid_argument("AdaptiveParams: floors and k_bar must be > 0");
        }
        if (xi_floor[i] > xi_init[i]) {
            throw std::invalid_argument("AdaptiveParams: floors must not exceed xi_init");
        }
    }
}

void ControllerState::init(double eps2_at_start, const AdaptiveParams& p) {
    z = 0.0;
    z_0 = 0.0;
    eps2_0 = eps2_at_start;
    t = 0.0;
    xi_hat = p.xi_init;
    initialized = true;
}

double ActuatorLimits::clamp(double a) const {
    return std::clamp(a, -decel_max, accel_max);
}

ErrorState tracking_errors(const VehiclePair& pair, double s_star, double s_star_rate) {
    return {pair.gap() - s_star, (pair.v_lead - pair.v_follow) - s_star_rate};
}

double terminal_exponent(double eps2, double delta, double eps_switch) {
    return delta + (1.0 - delta) * signum(std::abs(eps2) - eps_switch);
}

double terminal_surface(const ErrorState& es, double beta, double q) {
    return es.eps1 + beta * std::pow(std::abs(es.eps2), q) * signum(es.eps2);
}

double switching_gain(double t, const FtsmcParams& p) {
    return p.B1 + p.B2 * std::exp(-p.a_decay * t);
}

double ftsmc_control(const ErrorState& es, double psi_n, double t,
                     const FtsmcParams& p, SwitchMode mode, double phi) {
    const double q = terminal_exponent(es.eps2, p.delta, p.eps_switch);
    const double equiv = std::pow(std::abs(es.eps2), 2.0 - q) / (p.beta * q);
    return -(1.0 / p.K_m) * (p.alpha2 * psi_n +
                             switching_gain(t, p) * p.alpha1 * sgnfun(psi_n, mode, phi) +
                             equiv * sgnfun(es.eps2, mode, phi));
}

double integral_surface(const ErrorState& es, const ControllerState& cs, double theta) {
    if (!cs.initialized) {
        throw std::logic_error("integral_surface: controller state not initialized");
    }
    return es.eps2 + cs.z - std::exp(-theta * cs.t) * (cs.eps2_0 + cs.z_0);
}

double gamma_term(const ControllerState& cs, double theta) {
    if (!cs.initialized) {
        throw std::logic_error("gamma_term: controller state not initialized");
    }
    return theta * std::exp(-theta * cs.t) * (cs.eps2_0 + cs.z_0);
}

double adaptive_control(double psi_a, const ErrorState& es, double gamma,
                        const ControllerState& cs, const AdaptiveParams& p,
                        double K_m, SwitchMode mode) {
    const double sw = sgnfun(psi_a, mode, p.phi);
    const double xi_term = cs.xi_hat[0] + cs.xi_hat[1] * std::abs(es.eps1) +
                           cs.xi_hat[2] * std::abs(es.eps2);
    return -(1.0 / K_m) * (p.k3 * psi_a +
                           p.k4 * std::pow(std::abs(psi_a), p.p2) * sw +
                           std::abs(gamma) * sw + xi_term * sw);
}

void update_adaptive_gains(double psi_a, const ErrorState& es, double dt,
                           ControllerState& cs, const AdaptiveParams& p,
                           AdaptiveLawMode mode) {
    if (dt <= 0.0) {
        throw std::invalid_argument("update_adaptive_gains: dt must be > 0");
    }
    const double aps = std::abs(psi_a);
    const std::array<double, 3> factor = {1.0, std::abs(es.eps1), std::abs(es.eps2)};
    const std::array<double, 3> rate_gain = {p.k0, p.k1, p.k2};

    if (mode == AdaptiveLawMode::Basic) {
        for (int i = 0; i < 3; ++i) {
            cs.xi_hat[i] += rate_gain[i] * aps * factor[i] * dt;
        }
        return;
    }

    const double layer_sign = signum(aps - p.phi);
    for (int i = 0; i < 3; ++i) {
        double rate;
        if (cs.xi_hat[i] > p.xi_floor[i]) {
            rate = rate_gain[i] * aps * factor[i] * layer_sign;
        } else {
            rate = p.k_bar[i];
        }
        // project onto [floor, inf): the gain may shrink inside the boundary
        // layer but never through its floor
        cs.xi_hat[i] = std::max(p.xi_floor[i], cs.xi_hat[i] + rate * dt);
    }
}

double settling_time_bound(double V0, double rho, double sigma, double theta) {
    if (rho <= 0.0 || !(sigma > 0.0 && sigma < 1.0) || theta < 0.0 || V0 < 0.0) {
        throw std::invalid_argument("settling_time_bound: invalid parameters");
    }
    const double pow_term = std::pow(V0, 1.0 - sigma);
    if (theta == 0.0) {
        return pow_term / (rho * (1.0 - sigma));
    }
    const double c = theta * (1.0 - sigma);
    return (1.0 / c) * std::log(theta * pow_term + rho / c);
}

ControlOutput combined_control(const ErrorState& es, const ControllerState& cs,
                               double t, const FtsmcParams& pf,
                               const AdaptiveParams& pa, SwitchMode mode,
                               const ActuatorLimits& limits) {
    ControlOutput out;
    const double q = terminal_exponent(es.eps2, pf.delta, pf.eps_switch);
    out.psi_n = terminal_surface(es, pf.beta, q);
    out.h_n = ftsmc_control(es, out.psi_n, t, pf, mode, pa.phi);
    out.psi_a = integral_surface(es, cs, pa.theta);
    const double gamma = gamma_term(cs, pa.theta);
    out.h_a = adaptive_control(out.psi_a, es, gamma, cs, pa, pf.K_m, mode);

    out.h_n_applied = limits.clamp(out.h_n);
    const double h_a_applied = limits.clamp(out.h_a);
    const double sum = h_a_applied + out.h_n_applied;
    out.h = limits.clamp(sum);
    out.clamped = (out.h != sum) || (out.h_n_applied != out.h_n) ||
                  (h_a_applied != out.h_a);
    return out;
}

void PidParams::validate() const {
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd)) {
        throw std::invalid_argument("PidParams: gains must be finite");
    }
    if (integral_limit <= 0.0) {
        throw std::invalid_argument("PidParams: integral_limit must be > 0");
    }
}

double PidController::update(double eps1, double dt) {
    if (dt <= 0.0) {
        throw std::invalid_argument("PidController: dt must be > 0");
    }
    integral_ = std::clamp(integral_ + eps1 * dt, -params_.integral_limit,
                           params_.integral_limit);
    const double deriv = has_prev_ ? (eps1 - prev_eps1_) / dt : 0.0;
    prev_eps1_ = eps1;
    has_prev_ = true;
    return params_.kp * eps1 + params_.ki * integral_ + params_.kd * deriv;
}

void PidController::reset() {
    integral_ = 0.0;
    prev_eps1_ = 0.0;
    has_prev_ = false;
}

SharedController::SharedController(ControllerKind kind, const FtsmcParams& pf,
                                   const AdaptiveParams& pa, const PidParams& pp,
                                   SwitchMode switch_mode, AdaptiveLawMode law_mode,
                                   const ActuatorLimits& limits)
    : kind_(kind), pf_(pf), pa_(pa), switch_mode_(switch_mode),
      law_mode_(law_mode), limits_(limits), pid_(pp) {
    if (kind_ == ControllerKind::Aftsmc || kind_ == ControllerKind::Ftsmc) {
        pf_.validate();
        pa_.validate();
        state_.xi_hat = pa_.xi_init;  // gains exist before first engagement
    }
    if (kind_ == ControllerKind::Pid) pp.validate();
}

ControlOutput SharedController::step(const ErrorState& physical, double dt,
                                     bool engaged) {
    ControlOutput out;
    if (kind_ == ControllerKind::None) return out;

    if (!engaged) {
        was_engaged_ = false;
        return out;  // command not applied; internal state holds still
    }

    if (kind_ == ControllerKind::Pid) {
        if (!was_engaged_) pid_.reset();
        was_engaged_ = true;
        const double u = pid_.update(physical.eps1, dt);
        out.h = limits_.clamp(u);
        out.clamped = (out.h != u);
        return out;
    }

    // Sliding-mode layers run on negated errors (see class comment).
    const ErrorState es{-physical.eps1, -physical.eps2};
    if (!was_engaged_) {
        const auto xi_keep = state_.xi_hat;
        const bool had_gains = state_.initialized;
        state_.init(es.eps2, pa_);
        if (had_gains) state_.xi_hat = xi_keep;  // adaptation survives gaps
    }
    was_engaged_ = true;

    if (kind_ == ControllerKind::Ftsmc) {
        const double q = terminal_exponent(es.eps2, pf_.delta, pf_.eps_switch);
        out.psi_n = terminal_surface(es, pf_.beta, q);
        out.h_n = ftsmc_control(es, out.psi_n, state_.t, pf_, switch_mode_, pa_.phi);
        out.h_n_applied = limits_.clamp(out.h_n);
        out.h = out.h_n_applied;
        out.clamped = (out.h_n_applied != out.h_n);
        state_.t += dt;
        return out;
    }

    out = combined_control(es, state_, state_.t, pf_, pa_, switch_mode_, limits_);
    update_adaptive_gains(out.psi_a, es, dt, state_, pa_, law_mode_);
    state_.z += -out.h_n_applied * dt;
    state_.t += dt;
    return out;
}

}  // namespace hmvf
