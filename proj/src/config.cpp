#include "hmvf/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hmvf {

namespace {

using nlohmann::json;

/// Tracks which keys of a JSON object were consumed; leftovers are errors.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_ + ": expected an object");
        }
    }

    bool has(const char* key) { return j_.contains(key); }

    const json& req(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) {
            throw ConfigError(path_ + ": missing required key '" + key + "'");
        }
        used_.insert(key);
        return *it;
    }

    const json* opt(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        used_.insert(key);
        return &*it;
    }

    double num(const char* key) { return as_num(req(key), key); }
    double num_or(const char* key, double def) {
        const json* v = opt(key);
        return v ? as_num(*v, key) : def;
    }
    int integer(const char* key) {
        const json& v = req(key);
        if (!v.is_number_integer()) {
            throw ConfigError(path_ + "." + key + ": expected an integer");
        }
        return v.get<int>();
    }
    int integer_or(const char* key, int def) {
        return opt(key) ? integer(key) : def;
    }
    bool boolean_or(const char* key, bool def) {
        const json* v = opt(key);
        if (!v) return def;
        if (!v->is_boolean()) {
            throw ConfigError(path_ + "." + key + ": expected a boolean");
        }
        return v->get<bool>();
    }
    std::string str(const char* key) {
        const json& v = req(key);
        if (!v.is_string()) {
            throw ConfigError(path_ + "." + key + ": expected a string");
        }
        return v.get<std::string>();
    }
    std::string str_or(const char* key, const std::string& def) {
        return opt(key) ? str(key) : def;
    }

    std::string child_path(const char* key) const { return path_ + "." + key; }

    void done() {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) {
                throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
            }
        }
    }

private:
    double as_num(const json& v, const char* key) const {
        if (!v.is_number()) {
            throw ConfigError(path_ + "." + key + ": expected a number");
        }
        return v.get<double>();
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::vector<std::pair<double, double>> parse_points(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of [t, value] pairs");
    std::vector<std::pair<double, double>> out;
    for (const json& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            throw ConfigError(path + ": each point must be a [t, value] pair");
        }
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

json points_to_json(const std::vector<std::pair<double, double>>& pts) {
    json arr = json::array();
    for (const auto& [t, v] : pts) arr.push_back(json::array({t, v}));
    return arr;
}

std::array<double, 3> parse_triple(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) {
        throw ConfigError(path + ": expected an array of 3 numbers");
    }
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) throw ConfigError(path + ": expected numbers");
        out[i] = j[i].get<double>();
    }
    return out;
}

GaussianSet parse_gaussian(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError(path + ": expected [center, sigma]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

ControllerKind parse_controller(const std::string& s, const std::string& path) {
    if (s == "aftsmc") return ControllerKind::Aftsmc;
    if (s == "ftsmc") return ControllerKind::Ftsmc;
    if (s == "pid") return ControllerKind::Pid;
    if (s == "none") return ControllerKind::None;
    throw ConfigError(path + ": controller must be aftsmc|ftsmc|pid|none");
}

const char* controller_name(ControllerKind k) {
    switch (k) {
        case ControllerKind::Aftsmc: return "aftsmc";
        case ControllerKind::Ftsmc: return "ftsmc";
        case ControllerKind::Pid: return "pid";
        case ControllerKind::None: return "none";
    }
    return "none";
}

std::string resolve(const std::string& base_dir, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path fp(p);
    if (fp.is_absolute() || base_dir.empty()) return p;
    return (std::filesystem::path(base_dir) / fp).string();
}

FuzzyRuleBase parse_rule_base_json(const json& root, const std::string& path_label) {
    Obj top(root, path_label);
    const int version = top.integer("schema_version");
    if (version != 1) {
        throw ConfigError(path_label + ": unsupported schema_version");
    }
    const json& rules = top.req("rules");
    if (!rules.is_array()) throw ConfigError(path_label + ".rules: expected an array");
    FuzzyRuleBase rb;
    std::size_t idx = 0;
    for (const json& jr : rules) {
        const std::string rp = path_label + ".rules[" + std::to_string(idx++) + "]";
        Obj o(jr, rp);
        FuzzyRule r;
        r.efv = parse_gaussian(o.req("efv"), rp + ".efv");
        r.mfv = parse_gaussian(o.req("mfv"), rp + ".mfv");
        r.entropy = parse_gaussian(o.req("entropy"), rp + ".entropy");
        r.consequent_s = o.num("consequent_s");
        o.done();
        rb.rules.push_back(r);
    }
    top.done();
    rb.validate();
    return rb;
}

json rule_base_to_json(const FuzzyRuleBase& rb) {
    json out;
    out["schema_version"] = 1;
    json rules = json::array();
    for (const FuzzyRule& r : rb.rules) {
        json jr;
        jr["efv"] = json::array({r.efv.center, r.efv.sigma});
        jr["mfv"] = json::array({r.mfv.center, r.mfv.sigma});
        jr["entropy"] = json::array({r.entropy.center, r.entropy.sigma});
        jr["consequent_s"] = r.consequent_s;
        rules.push_back(jr);
    }
    out["rules"] = rules;
    return out;
}

ScenarioConfig parse_scenario(const json& root, const std::string& base_dir) {
    ScenarioConfig cfg;
    Obj top(root, "config");
    const int version = top.integer("schema_version");
    if (version != 1) {
        throw ConfigError("config: unsupported schema_version (expected 1)");
    }

    {
        Obj sc(top.req("scenario"), "config.scenario");
        cfg.duration_s = sc.num_or("duration_s", cfg.duration_s);
        cfg.dt_s = sc.num_or("dt_s", cfg.dt_s);
        cfg.log_every = sc.integer_or("log_every", cfg.log_every);
        cfg.initial_gap_m = sc.num_or("initial_gap_m", cfg.initial_gap_m);
        cfg.initial_v_follow = sc.num_or("initial_v_follow", cfg.initial_v_follow);
        cfg.initial_v_lead = sc.num_or("initial_v_lead", cfg.initial_v_lead);
        cfg.r_max_supported = sc.num_or("r_max_supported", cfg.r_max_supported);
        cfg.controller =
            parse_controller(sc.str_or("controller", "aftsmc"), "config.scenario.controller");
        const std::string sw = sc.str_or("switch_mode", "sat");
        if (sw == "sat") {
            cfg.switch_mode = SwitchMode::Saturation;
        } else if (sw == "sign") {
            cfg.switch_mode = SwitchMode::Sign;
        } else {
            throw ConfigError("config.scenario.switch_mode: must be sat|sign");
        }
        const std::string law = sc.str_or("adaptive_law", "boundary");
        if (law == "boundary") {
            cfg.law_mode = AdaptiveLawMode::Boundary;
        } else if (law == "basic") {
            cfg.law_mode = AdaptiveLawMode::Basic;
        } else {
            throw ConfigError("config.scenario.adaptive_law: must be basic|boundary");
        }

        if (const json* lead = sc.opt("lead_profile")) {
            Obj lp(*lead, "config.scenario.lead_profile");
            const std::string type = lp.str("type");
            if (type == "ramp_weaving") {
                cfg.lead.type = LeadProfile::Type::RampWeaving;
                cfg.lead.cap_at_initial = lp.boolean_or("cap_at_initial", true);
            } else if (type == "constant") {
                cfg.lead.type = LeadProfile::Type::Constant;
                cfg.lead.constant_speed = lp.num("speed");
            } else if (type == "table") {
                cfg.lead.type = LeadProfile::Type::Table;
                cfg.lead.table =
                    parse_points(lp.req("points"), "config.scenario.lead_profile.points");
            } else {
                throw ConfigError(
                    "config.scenario.lead_profile.type: must be ramp_weaving|constant|table");
            }
            lp.done();
        }

        if (const json* drv = sc.opt("driver")) {
            Obj d(*drv, "config.scenario.driver");
            const std::string type = d.str("type");
            if (type == "constant") {
                cfg.driver.type = DriverSource::Type::ConstantR;
                cfg.driver.constant_r = d.num("reaction_time_s");
            } else if (type == "scripted") {
                cfg.driver.type = DriverSource::Type::ScriptedR;
                cfg.driver.scripted =
                    parse_points(d.req("points"), "config.scenario.driver.points");
            } else if (type == "landmarks") {
                cfg.driver.type = DriverSource::Type::Landmarks;
                cfg.driver.landmark_csv = resolve(base_dir, d.str("landmark_csv"));
                cfg.driver.rule_base_path = d.str_or("rule_base", "");
                cfg.driver.fps = d.num_or("fps", cfg.driver.fps);
                cfg.driver.window =
                    static_cast<std::size_t>(d.integer_or("window", 5));
                if (!cfg.driver.rule_base_path.empty()) {
                    cfg.driver.rule_base =
                        load_rule_base(resolve(base_dir, cfg.driver.rule_base_path));
                }
            } else {
                throw ConfigError(
                    "config.scenario.driver.type: must be constant|scripted|landmarks");
            }
            d.done();
        }
        sc.done();
    }

    if (const json* j = top.opt("idm")) {
        Obj o(*j, "config.idm");
        cfg.idm.v_max = o.num_or("v_max", cfg.idm.v_max);
        cfg.idm.s0 = o.num_or("s0", cfg.idm.s0);
        cfg.idm.T_headway = o.num_or("T_headway", cfg.idm.T_headway);
        cfg.idm.a_max = o.num_or("a_max", cfg.idm.a_max);
        cfg.idm.b_comf = o.num_or("b_comf", cfg.idm.b_comf);
        o.done();
    }
    cfg.idm.dt = cfg.dt_s;

    if (const json* j = top.opt("allocation")) {
        Obj o(*j, "config.allocation");
        cfg.allocation.r_min = o.num_or("r_min", cfg.allocation.r_min);
        cfg.allocation.r_mid = o.num_or("r_mid", cfg.allocation.r_mid);
        cfg.allocation.r_max = o.num_or("r_max", cfg.allocation.r_max);
        cfg.allocation.k1 = o.num_or("k1", cfg.allocation.k1);
        cfg.allocation.k2 =
            o.num_or("k2", 3.0 / (cfg.allocation.r_max - cfg.allocation.r_mid));
        cfg.allocation.eta_floor = o.num_or("eta_floor", cfg.allocation.eta_floor);
        o.done();
    }

    if (const json* j = top.opt("ftsmc")) {
        Obj o(*j, "config.ftsmc");
        cfg.ftsmc.beta = o.num_or("beta", cfg.ftsmc.beta);
        cfg.ftsmc.delta = o.num_or("delta", cfg.ftsmc.delta);
        cfg.ftsmc.eps_switch = o.num_or("eps_switch", cfg.ftsmc.eps_switch);
        cfg.ftsmc.alpha1 = o.num_or("alpha1", cfg.ftsmc.alpha1);
        cfg.ftsmc.alpha2 = o.num_or("alpha2", cfg.ftsmc.alpha2);
        cfg.ftsmc.varsigma = o.num_or("varsigma", cfg.ftsmc.varsigma);
        cfg.ftsmc.B1 = o.num_or("B1", cfg.ftsmc.B1);
        cfg.ftsmc.B2 = o.num_or("B2", cfg.ftsmc.B2);
        cfg.ftsmc.a_decay = o.num_or("a_decay", cfg.ftsmc.a_decay);
        cfg.ftsmc.K_m = o.num_or("K_m", cfg.ftsmc.K_m);
        cfg.ftsmc.K_M = o.num_or("K_M", cfg.ftsmc.K_M);
        cfg.ftsmc.chi0 = o.num_or("chi0", cfg.ftsmc.chi0);
        cfg.ftsmc.chi1 = o.num_or("chi1", cfg.ftsmc.chi1);
        cfg.ftsmc.chi2 = o.num_or("chi2", cfg.ftsmc.chi2);
        o.done();
    }

    if (const json* j = top.opt("adaptive")) {
        Obj o(*j, "config.adaptive");
        cfg.adaptive.k0 = o.num_or("k0", cfg.adaptive.k0);
        cfg.adaptive.k1 = o.num_or("k1", cfg.adaptive.k1);
        cfg.adaptive.k2 = o.num_or("k2", cfg.adaptive.k2);
        cfg.adaptive.k3 = o.num_or("k3", cfg.adaptive.k3);
        cfg.adaptive.k4 = o.num_or("k4", cfg.adaptive.k4);
        cfg.adaptive.p2 = o.num_or("p2", cfg.adaptive.p2);
        cfg.adaptive.theta = o.num_or("theta", cfg.adaptive.theta);
        cfg.adaptive.phi = o.num_or("phi", cfg.adaptive.phi);
        if (const json* v = o.opt("xi_init")) {
            cfg.adaptive.xi_init = parse_triple(*v, "config.adaptive.xi_init");
        }
        if (const json* v = o.opt("xi_floor")) {
            cfg.adaptive.xi_floor = parse_triple(*v, "config.adaptive.xi_floor");
        }
        if (const json* v = o.opt("k_bar")) {
            cfg.adaptive.k_bar = parse_triple(*v, "config.adaptive.k_bar");
        }
        o.done();
    }

    if (const json* j = top.opt("pid")) {
        Obj o(*j, "config.pid");
        cfg.pid.kp = o.num_or("kp", cfg.pid.kp);
        cfg.pid.ki = o.num_or("ki", cfg.pid.ki);
        cfg.pid.kd = o.num_or("kd", cfg.pid.kd);
        cfg.pid.integral_limit = o.num_or("integral_limit", cfg.pid.integral_limit);
        o.done();
    }

    if (const json* j = top.opt("actuator")) {
        Obj o(*j, "config.actuator");
        cfg.actuator.accel_max = o.num_or("accel_max", cfg.actuator.accel_max);
        cfg.actuator.decel_max = o.num_or("decel_max", cfg.actuator.decel_max);
        o.done();
    }

    if (const json* j = top.opt("metrics")) {
        Obj o(*j, "config.metrics");
        if (const json* v = o.opt("events")) {
            if (!v->is_array()) throw ConfigError("config.metrics.events: expected an array");
            cfg.metrics.events.clear();
            for (const json& e : *v) {
                if (!e.is_number()) {
                    throw ConfigError("config.metrics.events: expected numbers");
                }
                cfg.metrics.events.push_back(e.get<double>());
            }
        }
        cfg.metrics.band_m = o.num_or("band_m", cfg.metrics.band_m);
        cfg.metrics.dwell_s = o.num_or("dwell_s", cfg.metrics.dwell_s);
        cfg.metrics.steady_start_s = o.num_or("steady_start_s", cfg.metrics.steady_start_s);
        cfg.metrics.steady_end_s = o.num_or("steady_end_s", cfg.metrics.steady_end_s);
        o.done();
    }

    top.done();

    try {
        cfg.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }
    return cfg;
}

json scenario_to_json(const ScenarioConfig& cfg) {
    json sc;
    sc["duration_s"] = cfg.duration_s;
    sc["dt_s"] = cfg.dt_s;
    sc["log_every"] = cfg.log_every;
    sc["initial_gap_m"] = cfg.initial_gap_m;
    sc["initial_v_follow"] = cfg.initial_v_follow;
    sc["initial_v_lead"] = cfg.initial_v_lead;
    sc["r_max_supported"] = cfg.r_max_supported;
    sc["controller"] = controller_name(cfg.controller);
    sc["switch_mode"] = cfg.switch_mode == SwitchMode::Saturation ? "sat" : "sign";
    sc["adaptive_law"] =
        cfg.law_mode == AdaptiveLawMode::Boundary ? "boundary" : "basic";

    json lead;
    switch (cfg.lead.type) {
        case LeadProfile::Type::RampWeaving:
            lead["type"] = "ramp_weaving";
            lead["cap_at_initial"] = cfg.lead.cap_at_initial;
            break;
        case LeadProfile::Type::Constant:
            lead["type"] = "constant";
            lead["speed"] = cfg.lead.constant_speed;
            break;
        case LeadProfile::Type::Table:
            lead["type"] = "table";
            lead["points"] = points_to_json(cfg.lead.table);
            break;
    }
    sc["lead_profile"] = lead;

    json drv;
    switch (cfg.driver.type) {
        case DriverSource::Type::ConstantR:
            drv["type"] = "constant";
            drv["reaction_time_s"] = cfg.driver.constant_r;
            break;
        case DriverSource::Type::ScriptedR:
            drv["type"] = "scripted";
            drv["points"] = points_to_json(cfg.driver.scripted);
            break;
        case DriverSource::Type::Landmarks:
            drv["type"] = "landmarks";
            drv["landmark_csv"] = cfg.driver.landmark_csv;
            if (!cfg.driver.rule_base_path.empty()) {
                drv["rule_base"] = cfg.driver.rule_base_path;
            }
            drv["fps"] = cfg.driver.fps;
            drv["window"] = static_cast<int>(cfg.driver.window);
            break;
    }
    sc["driver"] = drv;

    json root;
    root["schema_version"] = 1;
    root["scenario"] = sc;

    root["idm"] = {{"v_max", cfg.idm.v_max},
                   {"s0", cfg.idm.s0},
                   {"T_headway", cfg.idm.T_headway},
                   {"a_max", cfg.idm.a_max},
                   {"b_comf", cfg.idm.b_comf}};
    root["allocation"] = {{"r_min", cfg.allocation.r_min},
                          {"r_mid", cfg.allocation.r_mid},
                          {"r_max", cfg.allocation.r_max},
                          {"k1", cfg.allocation.k1},
                          {"k2", cfg.allocation.k2},
                          {"eta_floor", cfg.allocation.eta_floor}};
    root["ftsmc"] = {{"beta", cfg.ftsmc.beta},
                     {"delta", cfg.ftsmc.delta},
                     {"eps_switch", cfg.ftsmc.eps_switch},
                     {"alpha1", cfg.ftsmc.alpha1},
                     {"alpha2", cfg.ftsmc.alpha2},
                     {"varsigma", cfg.ftsmc.varsigma},
                     {"B1", cfg.ftsmc.B1},
                     {"B2", cfg.ftsmc.B2},
                     {"a_decay", cfg.ftsmc.a_decay},
                     {"K_m", cfg.ftsmc.K_m},
                     {"K_M", cfg.ftsmc.K_M},
                     {"chi0", cfg.ftsmc.chi0},
                     {"chi1", cfg.ftsmc.chi1},
                     {"chi2", cfg.ftsmc.chi2}};
    root["adaptive"] = {{"k0", cfg.adaptive.k0},
                        {"k1", cfg.adaptive.k1},
                        {"k2", cfg.adaptive.k2},
                        {"k3", cfg.adaptive.k3},
                        {"k4", cfg.adaptive.k4},
                        {"p2", cfg.adaptive.p2},
                        {"theta", cfg.adaptive.theta},
                        {"phi", cfg.adaptive.phi},
                        {"xi_init", cfg.adaptive.xi_init},
                        {"xi_floor", cfg.adaptive.xi_floor},
                        {"k_bar", cfg.adaptive.k_bar}};
    root["pid"] = {{"kp", cfg.pid.kp},
                   {"ki", cfg.pid.ki},
                   {"kd", cfg.pid.kd},
                   {"integral_limit", cfg.pid.integral_limit}};
    root["actuator"] = {{"accel_max", cfg.actuator.accel_max},
                        {"decel_max", cfg.actuator.decel_max}};
    root["metrics"] = {{"events", cfg.metrics.events},
                       {"band_m", cfg.metrics.band_m},
                       {"dwell_s", cfg.metrics.dwell_s},
                       {"steady_start_s", cfg.metrics.steady_start_s},
                       {"steady_end_s", cfg.metrics.steady_end_s}};
    return root;
}

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ConfigError("config parse error in " + path + ": " + ex.what());
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& ex) {
        throw ConfigError(std::string("config parse error: ") + ex.what());
    }
    RunConfig cfg;
    cfg.scenario = parse_scenario(root, base_dir);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    const json root = parse_json_file(path);
    RunConfig cfg;
    cfg.scenario =
        parse_scenario(root, std::filesystem::path(path).parent_path().string());
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    return scenario_to_json(cfg.scenario).dump(2) + "\n";
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open for writing: " + path);
    }
    out << run_config_to_json(cfg);
}

FuzzyRuleBase load_rule_base(const std::string& path) {
    return parse_rule_base_json(parse_json_file(path), "rules");
}

void save_rule_base(const FuzzyRuleBase& rb, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open for writing: " + path);
    }
    out << rule_base_to_json(rb).dump(2) << "\n";
}

std::size_t CompareConfig::baseline_index() const {
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (runs[i].name == baseline) return i;
    }
    throw ConfigError("compare config: baseline '" + baseline + "' is not a run name");
}

CompareConfig load_compare_config(const std::string& path) {
    const json root = parse_json_file(path);
    const std::string base_dir = std::filesystem::path(path).parent_path().string();

    Obj top(root, "compare");
    CompareConfig cfg;
    cfg.schema_version = top.integer("schema_version");
    if (cfg.schema_version != 1) {
        throw ConfigError("compare: unsupported schema_version");
    }
    const json& runs = top.req("runs");
    if (!runs.is_array() || runs.empty()) {
        throw ConfigError("compare.runs: expected a non-empty array");
    }
    std::size_t idx = 0;
    for (const json& jr : runs) {
        const std::string rp = "compare.runs[" + std::to_string(idx++) + "]";
        Obj o(jr, rp);
        NamedScenario ns;
        ns.name = o.str("name");
        ns.config = parse_scenario(o.req("config"), base_dir);
        o.done();
        for (const NamedScenario& prev : cfg.runs) {
            if (prev.name == ns.name) {
                throw ConfigError(rp + ": duplicate run name '" + ns.name + "'");
            }
        }
        cfg.runs.push_back(std::move(ns));
    }
    cfg.baseline = top.str_or("baseline", cfg.runs.front().name);
    top.done();
    cfg.baseline_index();  // existence check
    return cfg;
}

}  // namespace hmvf
