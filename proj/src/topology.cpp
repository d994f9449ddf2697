#include "dragsim/topology.hpp"

#include <cmath>

#include "dragsim/errors.hpp"

namespace dragsim {

double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

Topology generate_topology(const ScenarioConfig& cfg, Rng& rng, int max_tries_per_sbs) {
    Topology topo;
    // MBSs on a line, spaced one diameter apart so discs do not overlap.
    for (int m = 0; m < cfg.n_mbs; ++m)
        topo.mbs_positions.push_back({2.0 * cfg.mbs_radius_m * m, 0.0});

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long long budget = static_cast<long long>(max_tries_per_sbs) * cfg.n_sbs;
    for (int i = 0; i < cfg.n_sbs; ++i) {
        int parent = i % cfg.n_mbs;
        const Point& center = topo.mbs_positions[parent];
        bool placed = false;
        while (budget > 0) {
            --budget;
            double r = cfg.mbs_radius_m * std::sqrt(unit(rng));
            double phi = 2.0 * M_PI * unit(rng);
            Point p{center.x + r * std::cos(phi), center.y + r * std::sin(phi)};
            bool ok = true;
            for (const auto& q : topo.sbs_positions) {
                if (distance(p, q) < cfg.sbs_min_dist_m) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                topo.sbs_positions.push_back(p);
                topo.sbs_parent.push_back(parent);
                placed = true;
                break;
            }
        }
        if (!placed)
            throw PlacementFailed("could not place SBS " + std::to_string(i) + " of " +
                                  std::to_string(cfg.n_sbs) + " with min distance " +
                                  std::to_string(cfg.sbs_min_dist_m) + " m");
    }
    return topo;
}

}  // namespace dragsim
