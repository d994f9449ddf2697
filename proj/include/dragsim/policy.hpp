#pragma once

#include <memory>
#include <optional>
#include <string>

#include "dragsim/drag_agent.hpp"
#include "dragsim/environment.hpp"
#include "dragsim/schedule.hpp"

namespace dragsim {

enum class AgentKind { drag, ql, tact_style, sota, all_on, all_off };

std::optional<AgentKind> parse_agent_kind(const std::string& name);
std::string to_string(AgentKind kind);

// Mapping between mode vectors and tabular action indices (bit j of the
// index is small cell j's state).
ModeVector index_to_modes(int index, int n_sbs);
int modes_to_index(const ModeVector& modes);

struct PolicyOptions {
    DragConfig drag;
    double ql_alpha = 0.1;
    double ac_alpha_value = 0.1;
    double ac_alpha_pref = 0.1;
    LinearSchedule temperature{1.0, 0.05, 10000};
    int quantize_bins = 5;
    int quantize_freeze_day = 10;
};

// One controller driving one environment, slot by slot. Learning
// policies train inside run_slot; static ones just act.
class Policy {
public:
    virtual ~Policy() = default;
    virtual SlotLog run_slot(HetNetEnv& env) = 0;
    virtual AgentKind kind() const = 0;

    // Fraction of conceivable state-action pairs touched so far;
    // negative for non-tabular policies.
    virtual double visited_fraction() const { return -1.0; }

    // Non-null for the DDPG policy (checkpointing).
    virtual DragAgent* drag_agent() { return nullptr; }
};

// The learning policies normalize costs by the environment's all-on
// reference cost; gamma comes from the scenario.
std::unique_ptr<Policy> make_policy(AgentKind kind, HetNetEnv& env,
                                    const PolicyOptions& opt, std::uint64_t seed);

}  // namespace dragsim
