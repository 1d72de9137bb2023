#pragma once

#include <cstddef>
#include <vector>

namespace hmvf {

/// Car-following model constants. All positive; dt is the simulation step.
struct IdmParams {
    double v_max = 26.5;      // desired (free-flow) speed [m/s]
    double s0 = 2.3;          // minimum gap [m]
    double T_headway = 0.38;  // time headway [s]
    double a_max = 3.0;       // maximum acceleration [m/s^2]
    double b_comf = 1.3;      // comfortable deceleration, positive magnitude [m/s^2]
    double dt = 0.01;         // simulation step [s]

    void validate() const;
    bool operator==(const IdmParams&) const = default;
};

/// Leader/follower longitudinal state. Point-vehicle convention:
/// gap == x_lead - x_follow, collision iff gap <= 0.
struct VehiclePair {
    double x_lead = 0.0;
    double x_follow = 0.0;
    double v_lead = 0.0;
    double v_follow = 0.0;

    double gap() const { return x_lead - x_follow; }
};

/// One past sample as seen by the delayed driver model.
struct HistoryRecord {
    double v_follow = 0.0;
    double v_lead = 0.0;
    double gap = 0.0;
};

/// Fixed-capacity ring buffer of past (v_follow, v_lead, gap) records.
///
/// lookback(k) returns the record pushed k steps ago; a lookback past the
/// oldest stored record clamps to the oldest one. Seeding the buffer full of
/// the initial condition makes early delayed queries well-defined.
class HistoryBuffer {
public:
    explicit HistoryBuffer(std::size_t capacity);

    void push(const HistoryRecord& rec);
    /// Fill the whole buffer with `rec` (pre-run seeding for t < 0).
    void fill(const HistoryRecord& rec);

    /// Record k steps in the past (k = 0 is the latest push), clamped to the
    /// oldest stored record. Throws if the buffer is empty.
    const HistoryRecord& lookback(std::size_t k) const;

    std::size_t size() const { return count_; }
    std::size_t capacity() const { return buf_.size(); }
    bool empty() const { return count_ == 0; }

private:
    std::vector<HistoryRecord> buf_;
    std::size_t head_ = 0;   // index of the most recent record
    std::size_t count_ = 0;
};

/// Desired gap s* = s0 + v*T + v*dv / (2*sqrt(a_max*b)).  No clamping: a
/// strongly negative approach rate may push s* below s0.
double desired_gap(double v_follow, double delta_v, const IdmParams& p);

/// IDM acceleration a = a_max * (1 - (v/v_max)^4 - (s*/gap)^2).
/// Requires gap > 0; the caller must have stopped the run on collision.
double idm_accel(double v_follow, double gap, double s_star, const IdmParams& p);

/// Gap at which idm_accel is zero when both vehicles hold speed v:
/// desired_gap(v, 0) / sqrt(1 - (v/v_max)^4). Requires v < v_max.
double equilibrium_gap(double v, const IdmParams& p);

/// Reaction time to lookback steps: round(R/dt), half away from zero.
std::size_t delay_index(double reaction_time, double dt);

/// IDM evaluated on the state `reaction_time` seconds in the past.
double idm_rtd_accel(const HistoryBuffer& h, double reaction_time, const IdmParams& p);

/// Explicit-Euler longitudinal update. Follower speed is floored at zero
/// (vehicles do not reverse); positions advance with the pre-step speeds.
VehiclePair step_kinematics(const VehiclePair& pair, double a_follow,
                            double v_lead_next, double dt);

}  // namespace hmvf
