#include "dragsim/scenario.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dragsim/errors.hpp"

namespace dragsim {

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("scenario: " + msg); };
    if (n_mbs < 1) fail("n_mbs must be >= 1");
    if (n_sbs < 1) fail("n_sbs must be >= 1");
    if (sbs_const_power < 0 || sbs_load_power < 0 || mbs_load_power < 0 ||
        mbs_const_power < 0 || sbs_sleep_power < 0)
        fail("powers must be >= 0");
    if (beta_d < 0 || beta_s < 0) fail("penalty weights must be >= 0");
    if (gamma < 0.0 || gamma > 1.0) fail("gamma must lie in [0,1]");
    if (slots_per_day < 1) fail("slots_per_day must be >= 1");
    if (capacity_ratio <= 0.0) fail("capacity_ratio must be > 0");
    if (load_cap <= 0.0 || load_cap >= 1.0) fail("load_cap must lie in (0,1)");
    if (mbs_radius_m <= 0 || sbs_radius_m <= 0) fail("radii must be > 0");
    if (sbs_min_dist_m < 0) fail("sbs_min_dist_m must be >= 0");
    if (sbs_min_dist_m > 2.0 * mbs_radius_m) fail("sbs_min_dist_m must be <= 2*mbs_radius_m");
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

using Setter = std::function<void(ScenarioConfig&, double)>;

const std::map<std::string, Setter>& field_table() {
    static const std::map<std::string, Setter> table = {
        {"n_mbs", [](ScenarioConfig& c, double v) { c.n_mbs = static_cast<int>(v); }},
        {"n_sbs", [](ScenarioConfig& c, double v) { c.n_sbs = static_cast<int>(v); }},
        {"sbs_const_power", [](ScenarioConfig& c, double v) { c.sbs_const_power = v; }},
        {"sbs_load_power", [](ScenarioConfig& c, double v) { c.sbs_load_power = v; }},
        {"mbs_load_power", [](ScenarioConfig& c, double v) { c.mbs_load_power = v; }},
        {"mbs_const_power", [](ScenarioConfig& c, double v) { c.mbs_const_power = v; }},
        {"sbs_sleep_power", [](ScenarioConfig& c, double v) { c.sbs_sleep_power = v; }},
        {"beta_d", [](ScenarioConfig& c, double v) { c.beta_d = v; }},
        {"beta_s", [](ScenarioConfig& c, double v) { c.beta_s = v; }},
        {"gamma", [](ScenarioConfig& c, double v) { c.gamma = v; }},
        {"slots_per_day", [](ScenarioConfig& c, double v) { c.slots_per_day = static_cast<int>(v); }},
        {"capacity_ratio", [](ScenarioConfig& c, double v) { c.capacity_ratio = v; }},
        {"load_cap", [](ScenarioConfig& c, double v) { c.load_cap = v; }},
        {"mbs_radius_m", [](ScenarioConfig& c, double v) { c.mbs_radius_m = v; }},
        {"sbs_radius_m", [](ScenarioConfig& c, double v) { c.sbs_radius_m = v; }},
        {"sbs_min_dist_m", [](ScenarioConfig& c, double v) { c.sbs_min_dist_m = v; }},
    };
    return table;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        auto where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = field_table().find(key);
        if (it == field_table().end())
            throw ConfigError(where + ": unknown scenario key '" + key + "'");
        try {
            size_t pos = 0;
            double v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            it->second(cfg, v);
        } catch (const std::exception&) {
            throw ConfigError(where + ": cannot parse value '" + value + "' for key '" + key + "'");
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str(), path);
}

}  // namespace dragsim
