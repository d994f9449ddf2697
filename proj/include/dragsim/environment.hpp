#pragma once

#include <optional>

#include "dragsim/cost.hpp"
#include "dragsim/rng.hpp"
#include "dragsim/topology.hpp"
#include "dragsim/traffic.hpp"

namespace dragsim {

struct StepResult {
    long slot = 0;
    CostBreakdown cost;
    ArrivalVector arrivals;     // true arrivals revealed for the slot
    std::vector<double> loads;  // realized per-BS loads
};

// Discrete-time HetNet simulator. One instance per run; all randomness
// comes from the seed handed to the constructor, so identical seeds and
// action sequences replay bit-identically. Arrivals for a slot are
// sampled once, on the first of peek_arrivals()/step() for that slot;
// peeking exists for the noncausal exhaustive-search baseline and does
// not perturb the random stream seen by causal policies.
class HetNetEnv {
public:
    HetNetEnv(const ScenarioConfig& cfg, const TrafficConfig& tcfg, std::uint64_t seed);

    const ScenarioConfig& config() const { return cfg_; }
    const Topology& topology() const { return topo_; }
    const TrafficModel& traffic() const { return traffic_; }
    long slot() const { return slot_; }

    // Modes executed in the previous slot (all-on before the first step).
    const ModeVector& previous_modes() const { return prev_modes_; }

    // Arrivals revealed at the end of the previous slot; zeros before
    // the first step.
    const ArrivalVector& last_arrivals() const { return last_arrivals_; }

    // This slot's arrivals, sampled lazily.
    const ArrivalVector& peek_arrivals();

    StepResult step(const ModeVector& action);

    // Redraws per-SBS scales and shifts (slowly-varying-pattern runs).
    void shift_pattern();

private:
    ScenarioConfig cfg_;
    Topology topo_;
    TrafficModel traffic_;
    Rng rng_;
    ModeVector prev_modes_;
    ArrivalVector last_arrivals_;
    std::optional<ArrivalVector> pending_;
    long slot_ = 0;
};

}  // namespace dragsim
