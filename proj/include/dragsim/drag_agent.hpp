#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dragsim/cost.hpp"
#include "dragsim/environment.hpp"
#include "dragsim/history.hpp"
#include "dragsim/mlp.hpp"
#include "dragsim/replay.hpp"
#include "dragsim/rng.hpp"
#include "dragsim/schedule.hpp"

namespace dragsim {

// Decision state: predicted arrivals for the coming slot plus the mode
// vector executed in the previous one.
struct State {
    ArrivalVector predicted;  // length B
    ModeVector prev_modes;    // length B_s
};

struct Experience {
    State s;
    ModeVector action;
    double cost = 0.0;  // raw slot cost
    State s_next;
};

struct ArSample {
    std::vector<double> history;  // flattened h*B window
    ArrivalVector arrivals;       // realized next arrivals
};

struct CostSample {
    ArrivalVector arrivals;  // revealed true arrivals of the slot
    ModeVector prev_modes;
    ModeVector modes;
    double cost = 0.0;  // raw slot cost
};

struct DragConfig {
    int history_len = 4;
    int batch_size = 64;
    int train_steps_per_slot = 5;
    int refine_distance = 1;
    bool refine_enabled = true;
    double tau = 1e-4;
    double gamma = 0.9;
    size_t replay_capacity = 6000;
    // Arrival-rate units for the predictor head: targets are divided by
    // this before training and predictions multiplied back. Headroom
    // above 1 costs early accuracy, so it stays at the traffic's own
    // scale by default.
    double arrival_scale = 1.0;
    // Hidden widths are width_scale * [200, 100]; width_scale = 1 is
    // the full-size network, the default is a runtime trim.
    double width_scale = 0.15;
    LinearSchedule noise_sigma{0.5, 0.05, 10000};
    LinearSchedule refine_epsilon{3.0, 0.1, 10000};
    LinearSchedule lr_actor{5e-3, 8e-4, 10000};
    LinearSchedule lr_critic{2e-3, 2e-4, 10000};
    LinearSchedule lr_arp{2e-3, 2e-4, 10000};
    LinearSchedule lr_cen{2e-3, 2e-4, 10000};
};

struct AgentNetworks {
    Mlp arp;
    Mlp cen;
    Mlp actor;
    Mlp critic;
    Mlp actor_target;
    Mlp critic_target;
};

struct SlotLog {
    long slot = 0;
    ModeVector action;
    bool used_cen = false;  // which estimator picked the action
    CostBreakdown cost;
    ArrivalVector arrivals;
    ArrivalVector predicted;
    std::vector<double> loads;
};

// All binary vectors within Hamming distance dist of v, v itself first,
// then by increasing distance with flipped index sets in lexicographic
// order.
std::vector<ModeVector> neighborhood(const ModeVector& v, int dist);

// DDPG controller with arrival prediction and neighborhood refinement.
// cost_scale maps raw slot costs into the unit range the sigmoid-headed
// estimator and the critic train on; pass the all-on reference cost.
class DragAgent {
public:
    DragAgent(int n_bs, int n_sbs, double cost_scale, const DragConfig& cfg,
              std::uint64_t seed);

    int n_bs() const { return n_bs_; }
    int n_sbs() const { return n_sbs_; }
    long slot() const { return slot_; }
    double cost_scale() const { return cost_scale_; }
    const DragConfig& config() const { return cfg_; }
    AgentNetworks& networks() { return nets_; }
    const AgentNetworks& networks() const { return nets_; }

    // --- decision pipeline ---
    ArrivalVector predict_ar(const std::vector<double>& flat_history) const;
    std::vector<double> act(const State& s) const;  // deterministic, in (0,1)^{B_s}
    ModeVector proto_action(const std::vector<double>& continuous, double sigma);
    double estimate_cost(const ArrivalVector& arrivals, const ModeVector& prev,
                         const ModeVector& candidate) const;  // raw-cost units
    double critic_value(const State& s, const ModeVector& action) const;

    struct Refinement {
        ModeVector action;
        bool used_cen = false;
    };
    // Draws the estimator branch (estimate rate epsilon, else critic) and
    // returns the branch minimizer over the Hamming ball around proto.
    // Ties break toward fewer active cells, then lexicographically.
    Refinement refine_action(const ModeVector& proto, const State& s, double epsilon);

    // --- training, one gradient step each ---
    // Losses are means over the minibatch of the squared error (summed
    // over components for the predictor, whose target is a vector).
    // Throw InsufficientSamples when the replay is short.
    void train_arp(double lr);
    void train_cen(double lr);
    void train_actor_critic(double lr_critic, double lr_actor);

    // Batch-level pieces, exposed so tests can drive them directly.
    void train_arp_batch(const std::vector<const ArSample*>& batch, double lr);
    void train_cen_batch(const std::vector<const CostSample*>& batch, double lr);
    std::vector<double> critic_targets(const std::vector<const Experience*>& batch) const;
    void train_critic_batch(const std::vector<const Experience*>& batch,
                            const std::vector<double>& targets, double lr);
    void train_actor_batch(const std::vector<const State*>& states, double lr);
    void update_targets();  // one soft-update step on both target nets

    // --- full per-slot cycle ---
    SlotLog run_slot(HetNetEnv& env);

    size_t replay_size_ac() const { return ac_mem_.size(); }
    size_t replay_size_arp() const { return arp_mem_.size(); }
    size_t replay_size_cen() const { return cen_mem_.size(); }
    const ArHistory& history() const { return history_; }
    const ModeVector& prev_modes() const { return prev_modes_; }

    // Snapshot of networks and decision-loop state (slot counter,
    // history window, previous modes, rng). Replay contents are not
    // persisted.
    void save_checkpoint(std::ostream& out) const;
    void save_checkpoint_file(const std::string& path) const;
    static DragAgent load_checkpoint(std::istream& in, const DragConfig& cfg);
    static DragAgent load_checkpoint_file(const std::string& path, const DragConfig& cfg);

private:
    std::vector<double> state_features(const State& s) const;
    std::vector<double> cost_features(const ArrivalVector& arrivals, const ModeVector& prev,
                                      const ModeVector& cand) const;

    int n_bs_;
    int n_sbs_;
    double cost_scale_;
    DragConfig cfg_;
    AgentNetworks nets_;
    Rng rng_;
    long slot_ = 0;
    ModeVector prev_modes_;
    ArHistory history_;
    std::optional<ArrivalVector> next_prediction_;
    ReplayMemory<Experience> ac_mem_;
    ReplayMemory<ArSample> arp_mem_;
    ReplayMemory<CostSample> cen_mem_;
};

}  // namespace dragsim
