#include "hmvf/vehicle_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmvf {

void IdmParams::validate() const {
    if (v_max <= 0.0 || s0 <= 0.0 || T_headway <= 0.0 || a_max <= 0.0 ||
        b_comf <= 0.0 || dt <= 0.0) {
        throw std::invalid_argument("IdmParams: all fields must be > 0");
    }
    if (dt > 0.1) {
        throw std::invalid_argument("IdmParams: dt must be <= 0.1 s");
    }
}

HistoryBuffer::HistoryBuffer(std::size_t capacity) : buf_(capacity) {
    if (capacity == 0) {
        throw std::invalid_argument("HistoryBuffer: capacity must be > 0");
    }
}

void HistoryBuffer::push(const HistoryRecord& rec) {
    head_ = (head_ + 1) % buf_.size();
    buf_[head_] = rec;
    count_ = std::min(count_ + 1, buf_.size());
}

void HistoryBuffer::fill(const HistoryRecord& rec) {
    std::fill(buf_.begin(), buf_.end(), rec);
    head_ = 0;
    count_ = buf_.size();
}

const HistoryRecord& HistoryBuffer::lookback(std::size_t k) const {
    if (count_ == 0) {
        throw std::domain_error("HistoryBuffer: lookback on empty buffer");
    }
    k = std::min(k, count_ - 1);  // clamp to oldest stored record
    const std::size_t n = buf_.size();
    return buf_[(head_ + n - k % n) % n];
}

double desired_gap(double v_follow, double delta_v, const IdmParams& p) {
    return p.s0 + v_follow * p.T_headway +
           v_follow * delta_v / (2.0 * std::sqrt(p.a_max * p.b_comf));
}

double idm_accel(double v_follow, double gap, double s_star, const IdmParams& p) {
    if (gap <= 0.0) {
        throw std::domain_error("idm_accel: gap <= 0 (collision domain)");
    }
    const double free_term = std::pow(v_follow / p.v_max, 4.0);
    const double interaction = s_star / gap;
    return p.a_max * (1.0 - free_term - interaction * interaction);
}

double equilibrium_gap(double v, const IdmParams& p) {
    if (v < 0.0 || v >= p.v_max) {
        throw std::invalid_argument("equilibrium_gap: need 0 <= v < v_max");
    }
    const double free_term = std::pow(v / p.v_max, 4.0);
    return desired_gap(v, 0.0, p) / std::sqrt(1.0 - free_term);
}

std::size_t delay_index(double reaction_time, double dt) {
    if (reaction_time < 0.0 || dt <= 0.0) {
        throw std::invalid_argument("delay_index: need R >= 0 and dt > 0");
    }
    // Round half away from zero. The 1e-9 nudge keeps ratios like 0.25/0.1,
    // which land just below x.5 in binary, on the intended side.
    const double ratio = reaction_time / dt;
    return static_cast<std::size_t>(std::floor(ratio + 0.5 + 1e-9));
}

double idm_rtd_accel(const HistoryBuffer& h, double reaction_time, const IdmParams& p) {
    const std::size_t k = delay_index(reaction_time, p.dt);
    const HistoryRecord& rec = h.lookback(k);
    const double delta_v = rec.v_follow - rec.v_lead;
    const double s_star = desired_gap(rec.v_follow, delta_v, p);
    return idm_accel(rec.v_follow, rec.gap, s_star, p);
}

VehiclePair step_kinematics(const VehiclePair& pair, double a_follow,
                            double v_lead_next, double dt) {
    if (dt <= 0.0) {
        throw std::invalid_argument("step_kinematics: dt must be > 0");
    }
    VehiclePair next;
    next.x_follow = pair.x_follow + pair.v_follow * dt;
    next.x_lead = pair.x_lead + pair.v_lead * dt;
    next.v_follow = std::max(0.0, pair.v_follow + a_follow * dt);
    next.v_lead = v_lead_next;
    return next;
}

}  // namespace hmvf
