#include "hmvf/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmvf {

namespace {

double interp_table(const std::vector<std::pair<double, double>>& pts, double t) {
    if (pts.empty()) {
        throw std::invalid_argument("interpolation table is empty");
    }
    if (t <= pts.front().first) return pts.front().second;
    if (t >= pts.back().first) return pts.back().second;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (t <= pts[i].first) {
            const auto& [t0, v0] = pts[i - 1];
            const auto& [t1, v1] = pts[i];
            const double w = (t - t0) / (t1 - t0);
            return v0 + w * (v1 - v0);
        }
    }
    return pts.back().second;
}

// Reaction time as a function of simulation time.
class ReactionTimeSource {
public:
    explicit ReactionTimeSource(const DriverSource& src) : src_(src) {
        if (src_.type == DriverSource::Type::Landmarks) {
            const auto frames = load_landmark_csv(src_.landmark_csv);
            per_frame_ = reaction_time_trace(frames, src_.rule_base, src_.window);
        }
    }

    double at(double t) const {
        switch (src_.type) {
            case DriverSource::Type::ConstantR:
                return src_.constant_r;
            case DriverSource::Type::ScriptedR:
                return interp_table(src_.scripted, t);
            case DriverSource::Type::Landmarks: {
                // hold per-frame estimates over their frame interval
                const auto idx = static_cast<std::size_t>(
                    std::clamp(std::floor(t * src_.fps), 0.0,
                               static_cast<double>(per_frame_.size() - 1)));
                return per_frame_[idx];
            }
        }
        return src_.constant_r;
    }

private:
    const DriverSource& src_;
    std::vector<double> per_frame_;
};

bool row_finite(const TraceRow& r) {
    const double vals[] = {r.t, r.v_lead, r.v_follow, r.gap, r.s_star,
                           r.reaction_time, r.eta_c, r.a_driver, r.h, r.h_n,
                           r.h_a, r.a_combined, r.eps1, r.eps2, r.psi_n,
                           r.psi_a, r.xi0, r.xi1, r.xi2};
    for (double v : vals) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace

double LeadProfile::speed(double t) const {
    switch (type) {
        case Type::Constant:
            return std::max(0.0, constant_speed);
        case Type::Table:
            return std::max(0.0, interp_table(table, t));
        case Type::RampWeaving:
            break;
    }
    const double v_cruise = 20.0;
    const double v_plateau = 2.0;
    const double decel = 3.0;
    const double accel = 2.5;
    const double v42 = v_plateau + accel * 6.0;  // first recovery tops out at 17

    double v;
    if (t < 20.0) {
        v = v_cruise;
    } else if (t < 36.0) {
        v = std::max(v_plateau, v_cruise - decel * (t - 20.0));
    } else if (t < 42.0) {
        v = v_plateau + accel * (t - 36.0);
    } else if (t < 60.0) {
        v = v42;
    } else if (t < 76.0) {
        v = std::max(v_plateau, v42 - decel * (t - 60.0));
    } else if (t < 92.0) {
        v = v_plateau + accel * (t - 76.0);
    } else {
        v = v_plateau + accel * 16.0;  // value reached at 92 s, held
    }
    if (cap_at_initial) v = std::min(v, v_cruise);
    return std::max(0.0, v);
}

std::vector<double> LeadProfile::breakpoints() const {
    switch (type) {
        case Type::Constant:
            return {};
        case Type::Table: {
            std::vector<double> out;
            for (const auto& [t, _] : table) out.push_back(t);
            return out;
        }
        case Type::RampWeaving:
            break;
    }
    const double plateau_hit_2 = 60.0 + (17.0 - 2.0) / 3.0;  // 65 s
    std::vector<double> bp = {20.0, 26.0, 36.0, 42.0, 60.0, plateau_hit_2, 76.0};
    if (cap_at_initial) {
        bp.push_back(76.0 + (20.0 - 2.0) / 2.5);  // cap reached at 83.2 s
    }
    bp.push_back(92.0);
    return bp;
}

void LeadProfile::validate() const {
    if (type == Type::Constant && constant_speed < 0.0) {
        throw std::invalid_argument("LeadProfile: constant speed must be >= 0");
    }
    if (type == Type::Table) {
        if (table.empty()) {
            throw std::invalid_argument("LeadProfile: table profile needs points");
        }
        for (std::size_t i = 1; i < table.size(); ++i) {
            if (table[i].first <= table[i - 1].first) {
                throw std::invalid_argument("LeadProfile: table times must increase");
            }
        }
    }
}

void DriverSource::validate() const {
    switch (type) {
        case Type::ConstantR:
            if (constant_r < 0.0) {
                throw std::invalid_argument("DriverSource: reaction time must be >= 0");
            }
            break;
        case Type::ScriptedR:
            if (scripted.empty()) {
                throw std::invalid_argument("DriverSource: scripted profile needs points");
            }
            for (std::size_t i = 0; i < scripted.size(); ++i) {
                if (scripted[i].second < 0.0) {
                    throw std::invalid_argument("DriverSource: reaction times must be >= 0");
                }
                if (i > 0 && scripted[i].first <= scripted[i - 1].first) {
                    throw std::invalid_argument("DriverSource: scripted times must increase");
                }
            }
            break;
        case Type::Landmarks:
            if (landmark_csv.empty()) {
                throw std::invalid_argument("DriverSource: landmark_csv path required");
            }
            if (fps <= 0.0) throw std::invalid_argument("DriverSource: fps must be > 0");
            if (window < 1) throw std::invalid_argument("DriverSource: window must be >= 1");
            rule_base.validate();
            break;
    }
}

void MetricsConfig::validate() const {
    if (band_m < 0.0) throw std::invalid_argument("MetricsConfig: band must be >= 0");
    if (dwell_s <= 0.0) throw std::invalid_argument("MetricsConfig: dwell must be > 0");
    if (steady_end_s <= steady_start_s) {
        throw std::invalid_argument("MetricsConfig: steady window must be non-empty");
    }
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i] <= events[i - 1]) {
            throw std::invalid_argument("MetricsConfig: event times must increase");
        }
    }
}

void ScenarioConfig::validate() const {
    if (duration_s <= 0.0) throw std::invalid_argument("ScenarioConfig: duration must be > 0");
    if (dt_s <= 0.0) throw std::invalid_argument("ScenarioConfig: dt must be > 0");
    if (log_every < 1) throw std::invalid_argument("ScenarioConfig: log_every must be >= 1");
    if (initial_gap_m <= 0.0) {
        throw std::invalid_argument("ScenarioConfig: initial gap must be > 0");
    }
    if (initial_v_follow < 0.0 || initial_v_lead < 0.0) {
        throw std::invalid_argument("ScenarioConfig: initial speeds must be >= 0");
    }
    if (r_max_supported < 0.0) {
        throw std::invalid_argument("ScenarioConfig: r_max_supported must be >= 0");
    }
    if (actuator.accel_max <= 0.0 || actuator.decel_max <= 0.0) {
        throw std::invalid_argument("ScenarioConfig: actuator limits must be > 0");
    }
    if (dt_s != idm.dt) {
        throw std::invalid_argument("ScenarioConfig: idm.dt must equal the scenario dt");
    }
    lead.validate();
    driver.validate();
    idm.validate();
    allocation.validate();
    if (controller == ControllerKind::Aftsmc || controller == ControllerKind::Ftsmc) {
        ftsmc.validate();
        adaptive.validate();
    }
    if (controller == ControllerKind::Pid) pid.validate();
    metrics.validate();
}

Trace run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();

    const double dt = cfg.dt_s;
    const long n_steps = std::lround(cfg.duration_s / dt);
    const ReactionTimeSource reaction(cfg.driver);

    VehiclePair pair;
    pair.x_follow = 0.0;
    pair.x_lead = cfg.initial_gap_m;
    pair.v_follow = cfg.initial_v_follow;
    pair.v_lead = cfg.lead.speed(0.0);

    const std::size_t capacity =
        static_cast<std::size_t>(std::ceil(cfg.r_max_supported / dt)) + 1;
    HistoryBuffer history(capacity);
    history.fill({pair.v_follow, pair.v_lead, pair.gap()});

    SharedController controller(cfg.controller, cfg.ftsmc, cfg.adaptive, cfg.pid,
                                cfg.switch_mode, cfg.law_mode, cfg.actuator);

    Trace tr;
    tr.log_interval = dt * cfg.log_every;
    tr.rows.reserve(static_cast<std::size_t>(n_steps / cfg.log_every) + 2);

    double s_star_prev = 0.0;
    for (long i = 0; i <= n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;

        const double reaction_time = reaction.at(t);
        const double eta = authority_factor(reaction_time, cfg.allocation);
        const bool engaged = cfg.controller != ControllerKind::None &&
                             eta >= cfg.allocation.eta_floor;

        const double a_driver = idm_rtd_accel(history, reaction_time, cfg.idm);

        // Control reference: the steady-state desired gap at the lead's
        // speed (the preset safe following distance). Anchoring it to the
        // lead keeps the commanded acceleration out of eps2 (a reference on
        // the follower's own speed feeds back within one step), and its
        // gentle slope T*a_lead keeps reference kinks small.
        const double s_star = desired_gap(pair.v_lead, 0.0, cfg.idm);
        const double s_star_rate = (i == 0) ? 0.0 : (s_star - s_star_prev) / dt;
        s_star_prev = s_star;
        const ErrorState es = tracking_errors(pair, s_star, s_star_rate);

        const ControlOutput ctl = controller.step(es, dt, engaged);

        // the driver commands the same actuators: its share is enveloped too
        const double a_driver_applied = cfg.actuator.clamp(a_driver);
        const double a_blend =
            engaged ? blend_accel(a_driver_applied, ctl.h, eta) : a_driver_applied;
        const double a_combined = cfg.actuator.clamp(a_blend);
        const bool clamped = ctl.clamped || (a_combined != a_blend) ||
                             (a_driver_applied != a_driver);

        TraceRow row;
        row.t = t;
        row.v_lead = pair.v_lead;
        row.v_follow = pair.v_follow;
        row.gap = pair.gap();
        row.s_star = s_star;
        row.reaction_time = reaction_time;
        row.eta_c = eta;
        row.a_driver = a_driver;
        row.h = ctl.h;
        row.h_n = ctl.h_n;
        row.h_a = ctl.h_a;
        row.a_combined = a_combined;
        row.eps1 = es.eps1;
        row.eps2 = es.eps2;
        row.psi_n = ctl.psi_n;
        row.psi_a = ctl.psi_a;
        row.xi0 = controller.state().xi_hat[0];
        row.xi1 = controller.state().xi_hat[1];
        row.xi2 = controller.state().xi_hat[2];
        row.clamped = clamped;

        if (!row_finite(row)) {
            throw std::runtime_error("run_scenario: non-finite value at step " +
                                     std::to_string(i));
        }
        if (i % cfg.log_every == 0) tr.rows.push_back(row);
        if (i == n_steps) break;

        const double v_lead_next = cfg.lead.speed(static_cast<double>(i + 1) * dt);
        pair = step_kinematics(pair, a_combined, v_lead_next, dt);
        history.push({pair.v_follow, pair.v_lead, pair.gap()});

        if (pair.gap() <= 0.0) {
            // terminal row: post-collision state with the commands in effect
            TraceRow last = row;
            last.t = static_cast<double>(i + 1) * dt;
            last.v_lead = pair.v_lead;
            last.v_follow = pair.v_follow;
            last.gap = pair.gap();
            if ((i + 1) % cfg.log_every == 0 || tr.rows.empty() ||
                tr.rows.back().t < last.t) {
                tr.rows.push_back(last);
            }
            tr.collided = true;
            tr.collision_time = last.t;
            break;
        }
    }
    return tr;
}

std::optional<double> detect_collision(const Trace& tr) {
    for (const TraceRow& r : tr.rows) {
        if (r.gap <= 0.0) return r.t;
    }
    return std::nullopt;
}

bool Metrics::all_settled() const {
    if (settling.empty()) return true;
    return std::all_of(settling.begin(), settling.end(),
                       [](const EventSettling& e) { return e.settled; });
}

double Metrics::mean_settle_duration() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const EventSettling& e : settling) {
        if (e.settled) {
            sum += e.settle_duration;
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

Metrics compute_metrics(const Trace& tr, const MetricsConfig& cfg) {
    cfg.validate();
    if (tr.rows.empty()) {
        throw std::invalid_argument("compute_metrics: empty trace");
    }
    Metrics m;
    m.collided = tr.collided;
    m.collision_time = tr.collision_time;

    m.min_gap = tr.rows.front().gap;
    for (const TraceRow& r : tr.rows) m.min_gap = std::min(m.min_gap, r.gap);

    for (std::size_t i = 0; i < tr.rows.size(); ++i) {
        const TraceRow& r = tr.rows[i];
        m.max_abs_speed_error =
            std::max(m.max_abs_speed_error, std::abs(r.v_follow - r.v_lead));
        if (i > 0) {
            const double dt_row = r.t - tr.rows[i - 1].t;
            const double a_lead = (r.v_lead - tr.rows[i - 1].v_lead) / dt_row;
            m.max_abs_accel_error =
                std::max(m.max_abs_accel_error, std::abs(r.a_combined - a_lead));
        }
    }

    const double t_end = tr.rows.back().t;
    for (std::size_t e = 0; e < cfg.events.size(); ++e) {
        const double event = cfg.events[e];
        EventSettling es;
        es.event_time = event;

        const double window_end =
            (e + 1 < cfg.events.size()) ? cfg.events[e + 1] : t_end;
        double peak = 0.0;
        for (const TraceRow& r : tr.rows) {
            if (r.t >= event && r.t < window_end) {
                peak = std::max(peak, std::abs(r.eps1));
            }
        }
        es.band_used = cfg.band_m > 0.0 ? cfg.band_m : 0.05 * peak;

        // first tau >= event with |eps1| inside the band for a full dwell
        for (std::size_t i = 0; i < tr.rows.size() && !es.settled; ++i) {
            const double tau = tr.rows[i].t;
            if (tau < event) continue;
            if (tau + cfg.dwell_s > t_end) break;
            bool ok = true;
            for (std::size_t j = i; j < tr.rows.size(); ++j) {
                if (tr.rows[j].t > tau + cfg.dwell_s) break;
                if (std::abs(tr.rows[j].eps1) > es.band_used) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                es.settled = true;
                es.settle_duration = tau - event;
            }
        }
        m.settling.push_back(es);
    }

    // population std of the backward-difference jerk over the steady window
    std::vector<double> jerks;
    for (std::size_t i = 1; i < tr.rows.size(); ++i) {
        const double t0 = tr.rows[i - 1].t;
        const double t1 = tr.rows[i].t;
        if (t0 >= cfg.steady_start_s && t1 <= cfg.steady_end_s) {
            jerks.push_back((tr.rows[i].a_combined - tr.rows[i - 1].a_combined) /
                            (t1 - t0));
        }
    }
    if (!jerks.empty()) {
        double mean = 0.0;
        for (double j : jerks) mean += j;
        mean /= static_cast<double>(jerks.size());
        double var = 0.0;
        for (double j : jerks) var += (j - mean) * (j - mean);
        m.jerk_std_steady = std::sqrt(var / static_cast<double>(jerks.size()));
    }
    return m;
}

double max_accel_error_outside(const Trace& tr, const std::vector<double>& exclude,
                               double half_window) {
    double worst = 0.0;
    for (std::size_t i = 1; i < tr.rows.size(); ++i) {
        const TraceRow& r = tr.rows[i];
        bool excluded = false;
        for (double c : exclude) {
            if (std::abs(r.t - c) <= half_window) {
                excluded = true;
                break;
            }
        }
        if (excluded) continue;
        const double dt_row = r.t - tr.rows[i - 1].t;
        const double a_lead = (r.v_lead - tr.rows[i - 1].v_lead) / dt_row;
        worst = std::max(worst, std::abs(r.a_combined - a_lead));
    }
    return worst;
}

std::vector<ComparisonRow> batch_compare(const std::vector<NamedScenario>& runs,
                                         std::size_t baseline_index) {
    if (runs.empty()) {
        throw std::invalid_argument("batch_compare: need at least one scenario");
    }
    if (baseline_index >= runs.size()) {
        throw std::invalid_argument("batch_compare: baseline index out of range");
    }

    std::vector<ComparisonRow> rows(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        rows[i].name = runs[i].name;
        try {
            const Trace tr = run_scenario(runs[i].config);
            rows[i].metrics = compute_metrics(tr, runs[i].config.metrics);
            rows[i].ok = true;
        } catch (const std::exception& ex) {
            rows[i].ok = false;
            rows[i].error = ex.what();
        }
    }

    const ComparisonRow& base = rows[baseline_index];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == baseline_index || !rows[i].ok || !base.ok) continue;
        if (rows[i].metrics.all_settled() && base.metrics.all_settled() &&
            base.metrics.mean_settle_duration() > 0.0) {
            rows[i].settle_ratio_vs_baseline =
                rows[i].metrics.mean_settle_duration() /
                base.metrics.mean_settle_duration();
        }
    }
    return rows;
}

}  // namespace hmvf
