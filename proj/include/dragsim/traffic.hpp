#pragma once

#include <vector>

#include "dragsim/rng.hpp"
#include "dragsim/scenario.hpp"

namespace dragsim {

// Arrival rates per BS, in units of SBS capacity. Length n_mbs + n_sbs,
// MBS entries first.
using ArrivalVector = std::vector<double>;

struct TrafficConfig {
    double scale_min = 0.6;
    double scale_max = 1.0;
    int shift_min = -8;  // slots
    int shift_max = 8;
    double mbs_own_scale = 1.0;  // macro-user traffic, in SBS-capacity units
    double ou_theta = 0.05;
    double ou_sigma = 0.03;
};

// Synthetic double-peak daily profile in [0.1, 1.0] (fraction of SBS
// capacity): a midday bump, a higher evening peak and an early-morning
// trough, affinely normalized so the sampled minimum is exactly 0.1 and
// the maximum exactly 1.0 (max/min ratio 10).
double default_base_pattern(int slot, int slots_per_day = 48);
std::vector<double> build_base_pattern(int slots_per_day = 48);

// Per-SBS scaled and shifted copies of the base daily pattern with
// mean-reverting (Ornstein-Uhlenbeck) multiplicative noise. OU states
// advance once per sampled slot: n <- n + theta*(0 - n) + sigma*N(0,1).
struct TrafficModel {
    TrafficConfig cfg;
    int n_mbs = 1;
    int n_sbs = 0;
    std::vector<double> base_pattern;  // one value per slot of the day
    std::vector<double> sbs_scale;     // in [scale_min, scale_max]
    std::vector<int> sbs_shift;        // in [shift_min, shift_max]
    std::vector<double> ou_state;      // one per BS, MBS entries first

    int total_bs() const { return n_mbs + n_sbs; }
};

TrafficModel make_traffic_model(const TrafficConfig& cfg, int n_mbs, int n_sbs, Rng& rng,
                                int slots_per_day = 48);

// Advances every OU state by one step and returns the slot's arrivals:
//   SBS i:  max(0, scale_i * base[(slot + shift_i) mod S] * (1 + n_i))
//   MBS m:  max(0, mbs_own_scale * base[slot mod S] * (1 + n_m))
ArrivalVector sample_arrivals(TrafficModel& model, long slot, Rng& rng);

// Redraws every SBS scale and shift; base pattern and OU parameters are
// untouched. Used by the slowly-varying-pattern experiments.
void pattern_shift(TrafficModel& model, Rng& rng);

}  // namespace dragsim
