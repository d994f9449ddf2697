#pragma once

#include <vector>

#include "dragsim/rng.hpp"
#include "dragsim/scenario.hpp"

namespace dragsim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Topology {
    std::vector<Point> mbs_positions;
    std::vector<Point> sbs_positions;
    std::vector<int> sbs_parent;  // covering MBS per SBS
};

// Hard-core placement: SBSs are dropped uniformly inside their parent
// MBS disc, rejecting candidates closer than sbs_min_dist_m to any
// already placed SBS. Throws PlacementFailed once the retry budget is
// exhausted (the request is too dense for the disc).
Topology generate_topology(const ScenarioConfig& cfg, Rng& rng, int max_tries_per_sbs = 2000);

}  // namespace dragsim
