#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hmvf/sim_engine.hpp"

namespace hmvf {

/// Raised for malformed, unknown-key or out-of-range configuration input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Top-level run configuration document. Unknown keys are rejected; saving
/// writes every key, so load -> save -> load reproduces the configuration.
struct RunConfig {
    int schema_version = 1;
    ScenarioConfig scenario;

    bool operator==(const RunConfig&) const = default;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);

/// base_dir resolves relative paths referenced by the document (landmark
/// files, rule bases).
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir);
std::string run_config_to_json(const RunConfig& cfg);

FuzzyRuleBase load_rule_base(const std::string& path);
void save_rule_base(const FuzzyRuleBase& rb, const std::string& path);

/// Multi-run comparison document: named run configs plus the baseline name
/// used for settling-time ratios.
struct CompareConfig {
    int schema_version = 1;
    std::string baseline;
    std::vector<NamedScenario> runs;

    std::size_t baseline_index() const;
};

CompareConfig load_compare_config(const std::string& path);

}  // namespace hmvf
