#include "dragsim/traffic.hpp"

#include <algorithm>
#include <cmath>

#include "dragsim/errors.hpp"

namespace dragsim {

namespace {

// Raw (unnormalized) profile over the day: circular Gaussian bumps at
// 12:30 and 21:00. u is the fraction of the day in [0,1).
double raw_profile(double u) {
    auto bump = [u](double center, double width) {
        double d = std::fabs(u - center);
        d = std::min(d, 1.0 - d);
        return std::exp(-0.5 * (d / width) * (d / width));
    };
    return 0.85 * bump(12.5 / 24.0, 2.6 / 24.0) + 1.0 * bump(21.0 / 24.0, 1.8 / 24.0);
}

}  // namespace

std::vector<double> build_base_pattern(int slots_per_day) {
    if (slots_per_day < 2) throw ConfigError("slots_per_day must be >= 2 for the base pattern");
    std::vector<double> raw(slots_per_day);
    for (int k = 0; k < slots_per_day; ++k)
        raw[k] = raw_profile(static_cast<double>(k) / slots_per_day);
    auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
    std::vector<double> out(slots_per_day);
    for (int k = 0; k < slots_per_day; ++k)
        out[k] = 0.1 + 0.9 * (raw[k] - *mn) / (*mx - *mn);
    return out;
}

double default_base_pattern(int slot, int slots_per_day) {
    if (slot < 0 || slot >= slots_per_day)
        throw DimensionMismatch("base pattern slot out of range");
    static thread_local std::vector<double> cached;
    static thread_local int cached_slots = -1;
    if (cached_slots != slots_per_day) {
        cached = build_base_pattern(slots_per_day);
        cached_slots = slots_per_day;
    }
    return cached[slot];
}

TrafficModel make_traffic_model(const TrafficConfig& cfg, int n_mbs, int n_sbs, Rng& rng,
                                int slots_per_day) {
    TrafficModel m;
    m.cfg = cfg;
    m.n_mbs = n_mbs;
    m.n_sbs = n_sbs;
    m.base_pattern = build_base_pattern(slots_per_day);
    m.sbs_scale.resize(n_sbs);
    m.sbs_shift.resize(n_sbs);
    m.ou_state.assign(n_mbs + n_sbs, 0.0);
    pattern_shift(m, rng);
    return m;
}

ArrivalVector sample_arrivals(TrafficModel& model, long slot, Rng& rng) {
    const int S = static_cast<int>(model.base_pattern.size());
    std::normal_distribution<double> gauss(0.0, 1.0);
    ArrivalVector lambda(model.total_bs());
    for (int b = 0; b < model.total_bs(); ++b) {
        double& n = model.ou_state[b];
        n += model.cfg.ou_theta * (0.0 - n) + model.cfg.ou_sigma * gauss(rng);
        double level;
        if (b < model.n_mbs) {
            level = model.cfg.mbs_own_scale * model.base_pattern[slot % S];
        } else {
            int i = b - model.n_mbs;
            long shifted = slot + model.sbs_shift[i];
            int idx = static_cast<int>(((shifted % S) + S) % S);
            level = model.sbs_scale[i] * model.base_pattern[idx];
        }
        lambda[b] = std::max(0.0, level * (1.0 + n));
    }
    return lambda;
}

void pattern_shift(TrafficModel& model, Rng& rng) {
    std::uniform_real_distribution<double> scale(model.cfg.scale_min, model.cfg.scale_max);
    std::uniform_int_distribution<int> shift(model.cfg.shift_min, model.cfg.shift_max);
    for (int i = 0; i < model.n_sbs; ++i) {
        model.sbs_scale[i] = scale(rng);
        model.sbs_shift[i] = shift(rng);
    }
}

}  // namespace dragsim
