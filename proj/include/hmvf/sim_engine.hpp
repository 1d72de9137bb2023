#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hmvf/authority.hpp"
#include "hmvf/controllers.hpp"
#include "hmvf/driver_state.hpp"
#include "hmvf/vehicle_model.hpp"

namespace hmvf {

/// Leading-vehicle speed profile.
///
/// RampWeaving reproduces the two brake/hold/recover cycles of the merge
/// scenario: cruise at 20 m/s, decelerate at 3 m/s^2 to a 2 m/s plateau
/// (the plateau acts as the deceleration floor, which keeps the profile
/// rate-limited), hold, accelerate at 2.5 m/s^2, and repeat starting at 60 s.
/// With cap_at_initial the recovery is capped at the 20 m/s cruise speed;
/// otherwise the final acceleration segment runs uncapped until 92 s.
struct LeadProfile {
    enum class Type { RampWeaving, Constant, Table };

    Type type = Type::RampWeaving;
    bool cap_at_initial = true;
    double constant_speed = 20.0;
    std::vector<std::pair<double, double>> table;  // (t, v), linear interpolation

    double speed(double t) const;
    /// Times where the realized profile's slope changes.
    std::vector<double> breakpoints() const;

    void validate() const;
    bool operator==(const LeadProfile&) const = default;
};

/// Reaction-time source for the driver model.
struct DriverSource {
    enum class Type { ConstantR, ScriptedR, Landmarks };

    Type type = Type::ConstantR;
    double constant_r = 0.2;
    std::vector<std::pair<double, double>> scripted;  // (t, R), linear interpolation
    std::string landmark_csv;
    std::string rule_base_path;  // empty: use the shipped default base
    FuzzyRuleBase rule_base = FuzzyRuleBase::default_base();
    double fps = 30.0;
    std::size_t window = 5;

    void validate() const;
    bool operator==(const DriverSource&) const = default;
};

struct MetricsConfig {
    std::vector<double> events = {20.0, 36.0, 60.0, 76.0};  // disturbance starts [s]
    double band_m = 0.0;     // settling band; 0 means 5% of the per-event peak |eps1|
    double dwell_s = 2.0;    // time |eps1| must stay inside the band
    double steady_start_s = 92.0;  // window for the steady jerk statistic
    double steady_end_s = 100.0;

    void validate() const;
    bool operator==(const MetricsConfig&) const = default;
};

struct ScenarioConfig {
    double duration_s = 100.0;
    double dt_s = 0.01;
    int log_every = 10;            // log every N simulation steps
    double initial_gap_m = 30.0;
    double initial_v_follow = 20.0;
    double initial_v_lead = 20.0;
    double r_max_supported = 5.0;  // sizes the delay history buffer [s]

    LeadProfile lead;
    DriverSource driver;

    ControllerKind controller = ControllerKind::Aftsmc;
    SwitchMode switch_mode = SwitchMode::Saturation;
    AdaptiveLawMode law_mode = AdaptiveLawMode::Boundary;

    IdmParams idm;
    AllocationParams allocation;
    FtsmcParams ftsmc;
    AdaptiveParams adaptive;
    PidParams pid;
    ActuatorLimits actuator;
    MetricsConfig metrics;

    void validate() const;
    bool operator==(const ScenarioConfig&) const = default;
};

/// One logged simulation step. Column order matches the trace CSV.
struct TraceRow {
    double t = 0.0;
    double v_lead = 0.0;
    double v_follow = 0.0;
    double gap = 0.0;
    double s_star = 0.0;
    double reaction_time = 0.0;
    double eta_c = 0.0;
    double a_driver = 0.0;
    double h = 0.0;
    double h_n = 0.0;
    double h_a = 0.0;
    double a_combined = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    double psi_n = 0.0;
    double psi_a = 0.0;
    double xi0 = 0.0;
    double xi1 = 0.0;
    double xi2 = 0.0;
    bool clamped = false;
};

struct Trace {
    std::vector<TraceRow> rows;
    double log_interval = 0.1;
    bool collided = false;
    double collision_time = 0.0;  // valid when collided
};

struct EventSettling {
    double event_time = 0.0;
    bool settled = false;
    double settle_duration = 0.0;  // time from event to the start of the dwell
    double band_used = 0.0;
};

struct Metrics {
    double min_gap = 0.0;
    bool collided = false;
    double collision_time = 0.0;
    std::vector<EventSettling> settling;
    double max_abs_speed_error = 0.0;
    double max_abs_accel_error = 0.0;
    double jerk_std_steady = 0.0;

    bool all_settled() const;
    double mean_settle_duration() const;  // over settled events
};

/// Fixed-step closed loop: reaction time -> authority -> delayed IDM driver
/// -> controller -> blend -> kinematics. Terminates early on collision; the
/// colliding state is appended as a final row (the one row that may fall off
/// the logging cadence) and the collision time recorded.
Trace run_scenario(const ScenarioConfig& cfg);

/// First logged time with gap <= 0, if any.
std::optional<double> detect_collision(const Trace& tr);

Metrics compute_metrics(const Trace& tr, const MetricsConfig& cfg);

/// Max |a_combined - lead acceleration| over rows farther than half_window
/// from every time listed in exclude (lead acceleration by backward
/// difference of the logged lead speed).
double max_accel_error_outside(const Trace& tr, const std::vector<double>& exclude,
                               double half_window);

struct NamedScenario {
    std::string name;
    ScenarioConfig config;
};

struct ComparisonRow {
    std::string name;
    bool ok = false;          // run completed (a collision still counts as a result)
    std::string error;        // set when !ok
    Metrics metrics;          // valid when ok
    std::optional<double> settle_ratio_vs_baseline;  // defined when both settle
};

/// Run every scenario and relate mean settling times to the baseline entry.
/// Per-run failures are recorded in the row instead of aborting the batch.
std::vector<ComparisonRow> batch_compare(const std::vector<NamedScenario>& runs,
                                         std::size_t baseline_index);

}  // namespace hmvf
