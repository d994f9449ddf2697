#pragma once

#include <algorithm>
#include <cstdint>

namespace dragsim {

// Linear decay from upper to lower over the first horizon_slots slots,
// flat at lower afterwards. Used for exploration noise, the estimator
// pick rate and every learning rate.
struct LinearSchedule {
    double upper = 1.0;
    double lower = 0.0;
    std::int64_t horizon_slots = 10000;

    double value(std::int64_t t) const {
        if (t <= 0) return upper;
        const std::int64_t c = std::min(t, horizon_slots);
        return upper - (upper - lower) * static_cast<double>(c) /
                           static_cast<double>(horizon_slots);
    }
};

}  // namespace dragsim
