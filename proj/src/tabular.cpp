#include "dragsim/tabular.hpp"

#include <algorithm>
#include <cmath>

#include "dragsim/errors.hpp"

namespace dragsim {

int quantize_bin(double lam, double lam_hi, int bins) {
    if (bins <= 0) throw ConfigError("quantize: bins must be positive");
    if (lam_hi <= 0.0 || lam <= 0.0) return 0;
    if (lam >= lam_hi) return bins - 1;
    return static_cast<int>(bins * lam / lam_hi);
}

std::uint64_t quantize_key(const ArrivalVector& arrivals, double lam_hi, int bins) {
    std::uint64_t key = 0;
    std::uint64_t place = 1;
    for (double v : arrivals) {
        key += place * static_cast<std::uint64_t>(quantize_bin(v, lam_hi, bins));
        place *= static_cast<std::uint64_t>(bins);
    }
    return key;
}

int boltzmann_select(const std::vector<double>& values, double temperature, Rng& rng) {
    if (values.empty()) throw ConfigError("boltzmann_select: no actions");
    if (temperature <= 0.0) throw ConfigError("boltzmann_select: temperature must be positive");
    const double lo = *std::min_element(values.begin(), values.end());
    std::vector<double> w(values.size());
    double total = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        w[i] = std::exp(-(values[i] - lo) / temperature);
        total += w[i];
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    for (size_t i = 0; i < values.size(); ++i) {
        r -= w[i];
        if (r <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(values.size() - 1);
}

TabularQ::TabularQ(int n_actions, double alpha, double gamma)
    : n_actions_(n_actions), alpha_(alpha), gamma_(gamma) {
    if (n_actions <= 0) throw ConfigError("TabularQ: n_actions must be positive");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("TabularQ: alpha must be in [0, 1]");
    if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("TabularQ: gamma must be in [0, 1)");
}

double TabularQ::q(std::uint64_t state, int action) const {
    auto si = table_.find(state);
    if (si == table_.end()) return 0.0;
    auto ai = si->second.find(action);
    return ai == si->second.end() ? 0.0 : ai->second;
}

double TabularQ::min_q(std::uint64_t state) const {
    auto si = table_.find(state);
    if (si == table_.end()) return 0.0;
    double m = si->second.size() < static_cast<size_t>(n_actions_)
                   ? 0.0  // some action is still unvisited and reads as 0
                   : si->second.begin()->second;
    for (const auto& [a, v] : si->second) m = std::min(m, v);
    return m;
}

void TabularQ::update(std::uint64_t state, int action, double cost,
                      std::uint64_t next_state) {
    double& entry = table_[state][action];
    entry += alpha_ * (cost + gamma_ * min_q(next_state) - entry);
}

std::vector<double> TabularQ::dense_values(std::uint64_t state) const {
    std::vector<double> out(static_cast<size_t>(n_actions_), 0.0);
    auto si = table_.find(state);
    if (si != table_.end())
        for (const auto& [a, v] : si->second) out[static_cast<size_t>(a)] = v;
    return out;
}

size_t TabularQ::visited_pairs() const {
    size_t n = 0;
    for (const auto& [s, row] : table_) n += row.size();
    return n;
}

TabularAC::TabularAC(int n_actions, double alpha_value, double alpha_pref, double gamma)
    : n_actions_(n_actions), alpha_v_(alpha_value), alpha_p_(alpha_pref), gamma_(gamma) {
    if (n_actions <= 0) throw ConfigError("TabularAC: n_actions must be positive");
    if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("TabularAC: gamma must be in [0, 1)");
}

double TabularAC::value(std::uint64_t state) const {
    auto it = values_.find(state);
    return it == values_.end() ? 0.0 : it->second;
}

double TabularAC::preference(std::uint64_t state, int action) const {
    auto si = prefs_.find(state);
    if (si == prefs_.end()) return 0.0;
    auto ai = si->second.find(action);
    return ai == si->second.end() ? 0.0 : ai->second;
}

std::vector<double> TabularAC::dense_preferences(std::uint64_t state) const {
    std::vector<double> out(static_cast<size_t>(n_actions_), 0.0);
    auto si = prefs_.find(state);
    if (si != prefs_.end())
        for (const auto& [a, v] : si->second) out[static_cast<size_t>(a)] = v;
    return out;
}

void TabularAC::update(std::uint64_t state, int action, double cost,
                       std::uint64_t next_state) {
    const double td = cost + gamma_ * value(next_state) - value(state);
    values_[state] += alpha_v_ * td;
    // negative TD-error means the action beat the state's estimate:
    // lower its preference score so the cost-oriented Boltzmann favors it
    prefs_[state][action] += alpha_p_ * td;
}

size_t TabularAC::visited_pairs() const {
    size_t n = 0;
    for (const auto& [s, row] : prefs_) n += row.size();
    return n;
}

}  // namespace dragsim
