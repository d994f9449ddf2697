#include "dragsim/cost.hpp"

#include <algorithm>
#include <cmath>

#include "dragsim/errors.hpp"

namespace dragsim {

ModeVector all_on_modes(int n_sbs) { return ModeVector(n_sbs, 1); }
ModeVector all_off_modes(int n_sbs) { return ModeVector(n_sbs, 0); }

LoadResult compute_load(const ArrivalVector& arrivals, const ModeVector& modes,
                        const Topology& topo, const ScenarioConfig& cfg) {
    const int n_mbs = cfg.n_mbs;
    const int n_sbs = cfg.n_sbs;
    if (static_cast<int>(arrivals.size()) != cfg.total_bs())
        throw DimensionMismatch("compute_load: arrivals length != n_mbs + n_sbs");
    if (static_cast<int>(modes.size()) != n_sbs)
        throw DimensionMismatch("compute_load: modes length != n_sbs");
    if (static_cast<int>(topo.sbs_parent.size()) != n_sbs)
        throw DimensionMismatch("compute_load: topology does not match scenario");

    LoadResult r;
    r.rho.assign(cfg.total_bs(), 0.0);
    r.offered.assign(cfg.total_bs(), 0.0);

    // MBS own traffic first, then SBS contributions.
    for (int m = 0; m < n_mbs; ++m) r.offered[m] = arrivals[m];
    for (int i = 0; i < n_sbs; ++i) {
        int b = n_mbs + i;
        if (modes[i]) {
            r.offered[b] = arrivals[b];
            r.rho[b] = std::min(arrivals[b], cfg.load_cap);
        } else {
            r.offered[topo.sbs_parent[i]] += arrivals[b];
        }
    }
    for (int m = 0; m < n_mbs; ++m)
        r.rho[m] = std::min(r.offered[m] / cfg.capacity_ratio, cfg.load_cap);
    return r;
}

double energy(const std::vector<double>& loads, const ModeVector& modes,
              const ScenarioConfig& cfg) {
    double e = 0.0;
    for (int m = 0; m < cfg.n_mbs; ++m)
        e += cfg.mbs_const_power + loads[m] * cfg.mbs_load_power;
    for (int i = 0; i < cfg.n_sbs; ++i) {
        if (modes[i])
            e += cfg.sbs_const_power + loads[cfg.n_mbs + i] * cfg.sbs_load_power;
        else
            e += cfg.sbs_sleep_power;
    }
    return e;
}

double delay_cost(const std::vector<double>& loads, const ScenarioConfig& cfg) {
    double d = 0.0;
    for (double rho : loads) d += rho / (1.0 - rho);
    return cfg.beta_d * d;
}

double switching_cost(const ModeVector& prev, const ModeVector& next,
                      const ScenarioConfig& cfg) {
    if (prev.size() != next.size())
        throw DimensionMismatch("switching_cost: mode vectors differ in length");
    int activations = 0;
    for (size_t i = 0; i < prev.size(); ++i)
        if (next[i] > prev[i]) ++activations;
    return cfg.beta_s * activations;
}

CostBreakdown slot_cost(const ArrivalVector& arrivals, const ModeVector& prev,
                        const ModeVector& next, const Topology& topo,
                        const ScenarioConfig& cfg) {
    LoadResult loads = compute_load(arrivals, next, topo, cfg);
    CostBreakdown c;
    c.energy = energy(loads.rho, next, cfg);
    c.delay_cost = delay_cost(loads.rho, cfg);
    c.switching_cost = switching_cost(prev, next, cfg);
    c.total = c.energy + c.delay_cost + c.switching_cost;
    return c;
}

double reference_cost(const Topology& topo, const ScenarioConfig& cfg,
                      double mbs_own_scale) {
    std::vector<double> base = build_base_pattern(cfg.slots_per_day);
    ModeVector on = all_on_modes(cfg.n_sbs);
    double total = 0.0;
    for (double level : base) {
        ArrivalVector lambda(cfg.total_bs(), level);
        for (int m = 0; m < cfg.n_mbs; ++m) lambda[m] = mbs_own_scale * level;
        LoadResult loads = compute_load(lambda, on, topo, cfg);
        total += energy(loads.rho, on, cfg) + delay_cost(loads.rho, cfg);
    }
    return total / static_cast<double>(base.size());
}

}  // namespace dragsim
