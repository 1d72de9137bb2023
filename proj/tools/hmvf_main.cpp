#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmvf/config.hpp"
#include "hmvf/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json metrics_to_json(const hmvf::Metrics& m) {
    json j;
    j["min_gap"] = m.min_gap;
    j["collided"] = m.collided;
    if (m.collided) j["collision_time"] = m.collision_time;
    j["max_abs_speed_error"] = m.max_abs_speed_error;
    j["max_abs_accel_error"] = m.max_abs_accel_error;
    j["jerk_std_steady"] = m.jerk_std_steady;
    json events = json::array();
    for (const hmvf::EventSettling& e : m.settling) {
        json je;
        je["event_time"] = e.event_time;
        je["settled"] = e.settled;
        if (e.settled) je["settle_duration"] = e.settle_duration;
        je["band_m"] = e.band_used;
        events.push_back(je);
    }
    j["settling"] = events;
    return j;
}

std::string settling_summary(const hmvf::Metrics& m) {
    std::string out;
    for (std::size_t i = 0; i < m.settling.size(); ++i) {
        if (i > 0) out += ';';
        out += m.settling[i].settled
                   ? hmvf::format_double(m.settling[i].settle_duration)
                   : std::string("unsettled");
    }
    return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const hmvf::RunConfig cfg = hmvf::load_run_config(config_path);
    const hmvf::Trace trace = hmvf::run_scenario(cfg.scenario);
    const hmvf::Metrics metrics =
        hmvf::compute_metrics(trace, cfg.scenario.metrics);

    fs::create_directories(out_dir);
    hmvf::write_trace_csv(trace, (fs::path(out_dir) / "trace.csv").string());
    std::ofstream ms(fs::path(out_dir) / "metrics.json");
    if (!ms) throw std::runtime_error("cannot write metrics.json");
    ms << metrics_to_json(metrics).dump(2) << "\n";

    if (trace.collided) {
        std::cerr << "collision at t=" << hmvf::format_double(trace.collision_time)
                  << " s\n";
        return 2;
    }
    return 0;
}

int cmd_features(const std::string& landmarks_path, const std::string& rules_path,
                 const std::string& out_path) {
    hmvf::FuzzyRuleBase rb = rules_path.empty()
                                 ? hmvf::FuzzyRuleBase::default_base()
                                 : hmvf::load_rule_base(rules_path);
    const auto frames = hmvf::load_landmark_csv(landmarks_path);
    const auto feats = hmvf::feature_trace(frames);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << "frame,efv,mfv,entropy,R\n";
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const double r = hmvf::infer_reaction_time(feats[i], rb);
        out << frames[i].frame_index << ',' << hmvf::format_double(feats[i].efv)
            << ',' << hmvf::format_double(feats[i].mfv) << ','
            << hmvf::format_double(feats[i].entropy) << ','
            << hmvf::format_double(r) << '\n';
    }
    return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir) {
    const hmvf::CompareConfig cfg = hmvf::load_compare_config(config_path);
    const auto rows = hmvf::batch_compare(cfg.runs, cfg.baseline_index());

    fs::create_directories(out_dir);
    bool any_ok = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ok) continue;
        any_ok = true;
        // re-run for the trace file; runs are deterministic
        const hmvf::Trace tr = hmvf::run_scenario(cfg.runs[i].config);
        hmvf::write_trace_csv(
            tr, (fs::path(out_dir) / ("trace_" + rows[i].name + ".csv")).string());
    }

    std::ofstream out(fs::path(out_dir) / "comparison.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write comparison.csv");
    out << "name,status,collision_time,min_gap,max_abs_speed_error,"
           "max_abs_accel_error,jerk_std_steady,settling_times,"
           "mean_settle_duration,settle_ratio_vs_baseline\n";
    for (const hmvf::ComparisonRow& r : rows) {
        out << r.name << ',';
        if (!r.ok) {
            std::string msg = r.error;
            for (char& c : msg) {
                if (c == ',' || c == '\n') c = ' ';
            }
            out << "error: " << msg << ",,,,,,,,\n";
            continue;
        }
        out << (r.metrics.collided ? "collided" : "ok") << ',';
        if (r.metrics.collided) out << hmvf::format_double(r.metrics.collision_time);
        out << ',' << hmvf::format_double(r.metrics.min_gap) << ','
            << hmvf::format_double(r.metrics.max_abs_speed_error) << ','
            << hmvf::format_double(r.metrics.max_abs_accel_error) << ','
            << hmvf::format_double(r.metrics.jerk_std_steady) << ','
            << settling_summary(r.metrics) << ','
            << hmvf::format_double(r.metrics.mean_settle_duration()) << ',';
        if (r.settle_ratio_vs_baseline) {
            out << hmvf::format_double(*r.settle_ratio_vs_baseline);
        }
        out << '\n';
    }
    return any_ok ? 0 : 1;
}

int cmd_plotdata(const std::string& trace_path, const std::string& column,
                 const std::string& out_path) {
    const hmvf::Trace tr = hmvf::read_trace_csv(trace_path);
    bool known = false;
    for (const std::string& c : hmvf::trace_columns()) {
        if (c == column) {
            known = true;
            break;
        }
    }
    if (!known) {
        std::cerr << "unknown column '" << column << "'; valid columns:";
        for (const std::string& c : hmvf::trace_columns()) std::cerr << ' ' << c;
        std::cerr << "\n";
        return 1;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << "t," << column << '\n';
    for (const hmvf::TraceRow& row : tr.rows) {
        out << hmvf::format_double(row.t) << ','
            << hmvf::format_double(hmvf::trace_column_value(row, column)) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-machine shared vehicle-following simulation lab"};
    app.require_subcommand(1);

    std::string config_path, out_path, landmarks_path, rules_path, trace_path, column;

    CLI::App* sim = app.add_subcommand("simulate", "Run one scenario (trace + metrics)");
    sim->add_option("--config", config_path, "Run config JSON")->required();
    sim->add_option("--out", out_path, "Output directory")->required();

    CLI::App* feat = app.add_subcommand(
        "features", "Facial features and reaction times from a landmark CSV");
    feat->add_option("landmarks", landmarks_path, "Landmark CSV (frame,point,x,y)")
        ->required();
    feat->add_option("--rules", rules_path, "Fuzzy rule base JSON (default: shipped base)");
    feat->add_option("--out", out_path, "Output CSV path")->required();

    CLI::App* cmp = app.add_subcommand("compare", "Run a multi-controller comparison");
    cmp->add_option("--config", config_path, "Compare config JSON")->required();
    cmp->add_option("--out", out_path, "Output directory")->required();

    CLI::App* plot = app.add_subcommand("plotdata", "Project one trace column to (t, value)");
    plot->add_option("trace", trace_path, "Trace CSV produced by simulate")->required();
    plot->add_option("--column", column, "Trace column name")->required();
    plot->add_option("--out", out_path, "Output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // exit codes are 0|1|2
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_path);
        if (feat->parsed()) return cmd_features(landmarks_path, rules_path, out_path);
        if (cmp->parsed()) return cmd_compare(config_path, out_path);
        if (plot->parsed()) return cmd_plotdata(trace_path, column, out_path);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
