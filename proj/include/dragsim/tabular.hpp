#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dragsim/rng.hpp"
#include "dragsim/schedule.hpp"
#include "dragsim/traffic.hpp"

namespace dragsim {

// Equal-width quantization over [0, lam_hi) into `bins` levels, top bin
// absorbing everything at or above lam_hi. lam_hi <= 0 maps all to 0.
int quantize_bin(double lam, double lam_hi, int bins = 5);

// Per-entry bins composed base-`bins` into one table key (entry i
// contributes bin_i * bins^i).
std::uint64_t quantize_key(const ArrivalVector& arrivals, double lam_hi, int bins = 5);

// Samples index i with probability proportional to exp(-values[i]/temperature):
// low values (costs) are preferred.
int boltzmann_select(const std::vector<double>& values, double temperature, Rng& rng);

// Sparse cost-oriented Q table over quantized arrival states; unvisited
// entries read as 0.
class TabularQ {
public:
    TabularQ(int n_actions, double alpha, double gamma);

    double q(std::uint64_t state, int action) const;
    double min_q(std::uint64_t state) const;  // over all actions, unvisited = 0
    void update(std::uint64_t state, int action, double cost, std::uint64_t next_state);

    // All n_actions values for a state, unvisited filled with 0.
    std::vector<double> dense_values(std::uint64_t state) const;

    int n_actions() const { return n_actions_; }
    size_t visited_pairs() const;
    size_t visited_states() const { return table_.size(); }

private:
    int n_actions_;
    double alpha_;
    double gamma_;
    std::unordered_map<std::uint64_t, std::unordered_map<int, double>> table_;
};

// Tabular actor-critic: per-state action preferences driven by the
// TD-error of a learned state-value table. Boltzmann over preferences
// with the same cost orientation as TabularQ.
class TabularAC {
public:
    TabularAC(int n_actions, double alpha_value, double alpha_pref, double gamma);

    double value(std::uint64_t state) const;
    double preference(std::uint64_t state, int action) const;
    std::vector<double> dense_preferences(std::uint64_t state) const;
    void update(std::uint64_t state, int action, double cost, std::uint64_t next_state);

    int n_actions() const { return n_actions_; }
    size_t visited_pairs() const;
    size_t visited_states() const { return prefs_.size(); }

private:
    int n_actions_;
    double alpha_v_;
    double alpha_p_;
    double gamma_;
    std::unordered_map<std::uint64_t, double> values_;
    std::unordered_map<std::uint64_t, std::unordered_map<int, double>> prefs_;
};

// Tracks the quantization ceiling: 1.25x the largest arrival seen while
// warming, frozen once freeze() is called (after day 10 in the runs).
class QuantizerRange {
public:
    void observe(const ArrivalVector& arrivals) {
        if (frozen_) return;
        for (double v : arrivals)
            if (v > max_seen_) max_seen_ = v;
    }
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    double lam_hi() const { return 1.25 * max_seen_; }

private:
    double max_seen_ = 0.0;
    bool frozen_ = false;
};

}  // namespace dragsim
