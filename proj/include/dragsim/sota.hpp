#pragma once

#include "dragsim/cost.hpp"

namespace dragsim {

// Noncausal exhaustive lower bound: the mode vector minimizing
// energy + delay for the true arrivals of the slot. Switching cost is
// ignored by design. Ties break toward fewer active cells, then
// lexicographically. Throws TooLarge when 2^{n_sbs} enumeration is
// unreasonable (n_sbs > 20).
ModeVector sota_action(const ArrivalVector& arrivals, const Topology& topo,
                       const ScenarioConfig& cfg);

// The criterion SOTA minimizes, reusable as a test oracle.
double energy_delay_cost(const ArrivalVector& arrivals, const ModeVector& modes,
                         const Topology& topo, const ScenarioConfig& cfg);

}  // namespace dragsim
