#include "dragsim/environment.hpp"

#include "dragsim/errors.hpp"

namespace dragsim {

HetNetEnv::HetNetEnv(const ScenarioConfig& cfg, const TrafficConfig& tcfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed) {
    cfg_.validate();
    topo_ = generate_topology(cfg_, rng_);
    traffic_ = make_traffic_model(tcfg, cfg_.n_mbs, cfg_.n_sbs, rng_, cfg_.slots_per_day);
    prev_modes_ = all_on_modes(cfg_.n_sbs);
    last_arrivals_.assign(cfg_.total_bs(), 0.0);
}

const ArrivalVector& HetNetEnv::peek_arrivals() {
    if (!pending_) pending_ = sample_arrivals(traffic_, slot_, rng_);
    return *pending_;
}

StepResult HetNetEnv::step(const ModeVector& action) {
    if (static_cast<int>(action.size()) != cfg_.n_sbs)
        throw DimensionMismatch("step: action length != n_sbs");
    peek_arrivals();

    StepResult r;
    r.slot = slot_;
    r.arrivals = *pending_;
    LoadResult loads = compute_load(r.arrivals, action, topo_, cfg_);
    r.loads = loads.rho;
    r.cost.energy = energy(loads.rho, action, cfg_);
    r.cost.delay_cost = delay_cost(loads.rho, cfg_);
    r.cost.switching_cost = switching_cost(prev_modes_, action, cfg_);
    r.cost.total = r.cost.energy + r.cost.delay_cost + r.cost.switching_cost;

    last_arrivals_ = r.arrivals;
    prev_modes_ = action;
    pending_.reset();
    ++slot_;
    return r;
}

void HetNetEnv::shift_pattern() { pattern_shift(traffic_, rng_); }

}  // namespace dragsim
