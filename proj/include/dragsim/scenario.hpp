#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dragsim {

// Physical constants and cost weights of the simulated HetNet.
// BS indexing convention used throughout: MBSs occupy indices
// [0, n_mbs), SBSs occupy [n_mbs, n_mbs + n_sbs). Mode vectors index
// SBSs only, so mode j belongs to BS (n_mbs + j).
struct ScenarioConfig {
    int n_mbs = 1;
    int n_sbs = 10;
    double sbs_const_power = 160.0;   // W, idle draw of an active SBS
    double sbs_load_power = 216.0;    // W at full load
    double mbs_load_power = 1080.0;   // W at full load
    double mbs_const_power = 780.0;   // W, always-on MBS base draw
    double sbs_sleep_power = 0.0;     // W drawn by a sleeping SBS
    double beta_d = 50.0;             // delay penalty weight
    double beta_s = 100.0;            // cost per SBS activation
    double gamma = 0.9;               // MDP discount
    int slots_per_day = 48;
    double capacity_ratio = 10.0;     // MBS capacity / SBS capacity
    double load_cap = 0.99;           // utilization ceiling, keeps delay finite
    double mbs_radius_m = 1000.0;
    double sbs_radius_m = 100.0;
    double sbs_min_dist_m = 200.0;

    int total_bs() const { return n_mbs + n_sbs; }

    // Throws ConfigError when an invariant is violated.
    void validate() const;
};

// Parses a flat `key = value` scenario file ('#' starts a comment).
// Keys are exactly the ScenarioConfig field names. Unknown keys,
// unparsable values and invariant violations raise ConfigError with
// the offending line number.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<string>");

}  // namespace dragsim
