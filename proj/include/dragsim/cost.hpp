#pragma once

#include <cstdint>
#include <vector>

#include "dragsim/scenario.hpp"
#include "dragsim/topology.hpp"
#include "dragsim/traffic.hpp"

namespace dragsim {

// Per-SBS on/off decision, length n_sbs. Entry j controls BS (n_mbs + j).
using ModeVector = std::vector<std::uint8_t>;

ModeVector all_on_modes(int n_sbs);
ModeVector all_off_modes(int n_sbs);

struct CostBreakdown {
    double energy = 0.0;          // W
    double delay_cost = 0.0;      // beta_d * sum rho/(1-rho)
    double switching_cost = 0.0;  // beta_s per activation
    double total = 0.0;
};

struct LoadResult {
    std::vector<double> rho;      // per BS, capped at load_cap
    std::vector<double> offered;  // per BS, pre-cap, in own capacity units
};

// Linear capacity model: an active SBS carries its own arrivals, a
// sleeping SBS offloads them in full to its parent MBS; the MBS divides
// its offered traffic by capacity_ratio. Loads are capped at load_cap.
LoadResult compute_load(const ArrivalVector& arrivals, const ModeVector& modes,
                        const Topology& topo, const ScenarioConfig& cfg);

double energy(const std::vector<double>& loads, const ModeVector& modes,
              const ScenarioConfig& cfg);

double delay_cost(const std::vector<double>& loads, const ScenarioConfig& cfg);

double switching_cost(const ModeVector& prev, const ModeVector& next,
                      const ScenarioConfig& cfg);

CostBreakdown slot_cost(const ArrivalVector& arrivals, const ModeVector& prev,
                        const ModeVector& next, const Topology& topo,
                        const ScenarioConfig& cfg);

// All-on reference slot cost: the day-averaged cost of keeping every BS
// active on the noise-free base pattern (unit SBS scale, zero shift).
// Used as the scale constant that maps raw costs into the unit range the
// learners train on; the peak-hour saturation cost would dwarf typical
// slots and flatten per-action differences. Switching is excluded.
double reference_cost(const Topology& topo, const ScenarioConfig& cfg,
                      double mbs_own_scale = 1.0);

}  // namespace dragsim
