#include "dragsim/sota.hpp"

#include <algorithm>

#include "dragsim/errors.hpp"

namespace dragsim {

double energy_delay_cost(const ArrivalVector& arrivals, const ModeVector& modes,
                         const Topology& topo, const ScenarioConfig& cfg) {
    const LoadResult lr = compute_load(arrivals, modes, topo, cfg);
    return energy(lr.rho, modes, cfg) + delay_cost(lr.rho, cfg);
}

ModeVector sota_action(const ArrivalVector& arrivals, const Topology& topo,
                       const ScenarioConfig& cfg) {
    const int n_sbs = cfg.n_sbs;
    if (n_sbs > 20)
        throw TooLarge("exhaustive search over 2^" + std::to_string(n_sbs) +
                       " actions is not tractable (limit 20 small cells)");

    ModeVector best;
    double best_val = 0.0;
    int best_active = 0;
    ModeVector cand(static_cast<size_t>(n_sbs));
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_sbs); ++mask) {
        int act_n = 0;
        for (int j = 0; j < n_sbs; ++j) {
            cand[static_cast<size_t>(j)] = (mask >> j) & 1 ? 1 : 0;
            act_n += cand[static_cast<size_t>(j)];
        }
        const double val = energy_delay_cost(arrivals, cand, topo, cfg);
        bool better = false;
        if (best.empty()) {
            better = true;
        } else if (val != best_val) {
            better = val < best_val;
        } else if (act_n != best_active) {
            better = act_n < best_active;
        } else {
            better = std::lexicographical_compare(cand.begin(), cand.end(), best.begin(),
                                                  best.end());
        }
        if (better) {
            best = cand;
            best_val = val;
            best_active = act_n;
        }
    }
    return best;
}

}  // namespace dragsim
