#include "dragsim/policy.hpp"

#include <cmath>

#include "dragsim/errors.hpp"
#include "dragsim/sota.hpp"
#include "dragsim/tabular.hpp"

namespace dragsim {

std::optional<AgentKind> parse_agent_kind(const std::string& name) {
    if (name == "drag") return AgentKind::drag;
    if (name == "ql") return AgentKind::ql;
    if (name == "tact_style") return AgentKind::tact_style;
    if (name == "sota") return AgentKind::sota;
    if (name == "all_on") return AgentKind::all_on;
    if (name == "all_off") return AgentKind::all_off;
    return std::nullopt;
}

std::string to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::drag: return "drag";
        case AgentKind::ql: return "ql";
        case AgentKind::tact_style: return "tact_style";
        case AgentKind::sota: return "sota";
        case AgentKind::all_on: return "all_on";
        case AgentKind::all_off: return "all_off";
    }
    return "?";
}

ModeVector index_to_modes(int index, int n_sbs) {
    if (n_sbs < 0 || n_sbs > 30) throw TooLarge("action index space limited to 30 cells");
    if (index < 0 || index >= (1 << n_sbs)) throw ConfigError("action index out of range");
    ModeVector m(static_cast<size_t>(n_sbs));
    for (int j = 0; j < n_sbs; ++j) m[static_cast<size_t>(j)] = (index >> j) & 1 ? 1 : 0;
    return m;
}

int modes_to_index(const ModeVector& modes) {
    if (modes.size() > 30) throw TooLarge("action index space limited to 30 cells");
    int idx = 0;
    for (size_t j = 0; j < modes.size(); ++j)
        if (modes[j]) idx |= 1 << j;
    return idx;
}

namespace {

SlotLog make_log(const StepResult& sr, const ModeVector& action) {
    SlotLog log;
    log.slot = sr.slot;
    log.action = action;
    log.cost = sr.cost;
    log.arrivals = sr.arrivals;
    log.loads = sr.loads;
    return log;
}

class StaticPolicy final : public Policy {
public:
    StaticPolicy(AgentKind kind, int n_sbs)
        : kind_(kind),
          action_(kind == AgentKind::all_on ? all_on_modes(n_sbs) : all_off_modes(n_sbs)) {}

    SlotLog run_slot(HetNetEnv& env) override {
        return make_log(env.step(action_), action_);
    }
    AgentKind kind() const override { return kind_; }

private:
    AgentKind kind_;
    ModeVector action_;
};

class SotaPolicy final : public Policy {
public:
    SlotLog run_slot(HetNetEnv& env) override {
        const ModeVector action =
            sota_action(env.peek_arrivals(), env.topology(), env.config());
        return make_log(env.step(action), action);
    }
    AgentKind kind() const override { return AgentKind::sota; }
};

class DragPolicy final : public Policy {
public:
    DragPolicy(const HetNetEnv& env, const PolicyOptions& opt, std::uint64_t seed,
               double cost_scale)
        : agent_(make_agent(env, opt, seed, cost_scale)) {}

    SlotLog run_slot(HetNetEnv& env) override { return agent_.run_slot(env); }
    AgentKind kind() const override { return AgentKind::drag; }
    DragAgent* drag_agent() override { return &agent_; }

private:
    static DragAgent make_agent(const HetNetEnv& env, const PolicyOptions& opt,
                                std::uint64_t seed, double cost_scale) {
        DragConfig cfg = opt.drag;
        cfg.gamma = env.config().gamma;
        return DragAgent(env.config().total_bs(), env.config().n_sbs, cost_scale, cfg,
                         seed);
    }

    DragAgent agent_;
};

// Shared scaffolding for the two tabular policies: quantized previous
// arrivals as state, Boltzmann selection, cost normalization, ceiling
// frozen after the warm-up days.
class TabularPolicyBase : public Policy {
public:
    TabularPolicyBase(const HetNetEnv& env, const PolicyOptions& opt, std::uint64_t seed,
                      double cost_scale)
        : n_sbs_(env.config().n_sbs),
          n_bs_(env.config().total_bs()),
          bins_(opt.quantize_bins),
          freeze_slot_(static_cast<long>(opt.quantize_freeze_day) *
                       env.config().slots_per_day),
          cost_scale_(cost_scale),
          temp_(opt.temperature),
          rng_(split_seed(seed)) {}

    SlotLog run_slot(HetNetEnv& env) override {
        const long t = env.slot();
        const double temp = temp_.value(t);
        const std::uint64_t s = quantize_key(env.last_arrivals(), range_.lam_hi(), bins_);
        const int a = boltzmann_select(action_values(s), temp, rng_);
        const ModeVector action = index_to_modes(a, n_sbs_);

        StepResult sr = env.step(action);

        range_.observe(sr.arrivals);
        if (!range_.frozen() && sr.slot + 1 >= freeze_slot_) range_.freeze();
        const std::uint64_t s_next = quantize_key(sr.arrivals, range_.lam_hi(), bins_);
        learn(s, a, sr.cost.total / cost_scale_, s_next);
        return make_log(sr, action);
    }

    double visited_fraction() const override {
        const double n_states = std::pow(static_cast<double>(bins_), n_bs_);
        const double n_actions = std::pow(2.0, n_sbs_);
        return static_cast<double>(pairs()) / (n_states * n_actions);
    }

protected:
    virtual std::vector<double> action_values(std::uint64_t state) const = 0;
    virtual void learn(std::uint64_t s, int a, double cost, std::uint64_t s_next) = 0;
    virtual size_t pairs() const = 0;

    int n_sbs_;
    int n_bs_;
    int bins_;
    long freeze_slot_;
    double cost_scale_;
    LinearSchedule temp_;
    Rng rng_;
    QuantizerRange range_;
};

class QlPolicy final : public TabularPolicyBase {
public:
    QlPolicy(const HetNetEnv& env, const PolicyOptions& opt, std::uint64_t seed,
             double cost_scale)
        : TabularPolicyBase(env, opt, seed, cost_scale),
          table_(1 << env.config().n_sbs, opt.ql_alpha, env.config().gamma) {}

    AgentKind kind() const override { return AgentKind::ql; }

private:
    std::vector<double> action_values(std::uint64_t state) const override {
        return table_.dense_values(state);
    }
    void learn(std::uint64_t s, int a, double cost, std::uint64_t s_next) override {
        table_.update(s, a, cost, s_next);
    }
    size_t pairs() const override { return table_.visited_pairs(); }

    TabularQ table_;
};

class TactPolicy final : public TabularPolicyBase {
public:
    TactPolicy(const HetNetEnv& env, const PolicyOptions& opt, std::uint64_t seed,
               double cost_scale)
        : TabularPolicyBase(env, opt, seed, cost_scale),
          table_(1 << env.config().n_sbs, opt.ac_alpha_value, opt.ac_alpha_pref,
                 env.config().gamma) {}

    AgentKind kind() const override { return AgentKind::tact_style; }

private:
    std::vector<double> action_values(std::uint64_t state) const override {
        return table_.dense_preferences(state);
    }
    void learn(std::uint64_t s, int a, double cost, std::uint64_t s_next) override {
        table_.update(s, a, cost, s_next);
    }
    size_t pairs() const override { return table_.visited_pairs(); }

    TabularAC table_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(AgentKind kind, HetNetEnv& env,
                                    const PolicyOptions& opt, std::uint64_t seed) {
    const double cost_scale = reference_cost(env.topology(), env.config(),
                                             env.traffic().cfg.mbs_own_scale);
    switch (kind) {
        case AgentKind::drag:
            return std::make_unique<DragPolicy>(env, opt, seed, cost_scale);
        case AgentKind::ql:
            return std::make_unique<QlPolicy>(env, opt, seed, cost_scale);
        case AgentKind::tact_style:
            return std::make_unique<TactPolicy>(env, opt, seed, cost_scale);
        case AgentKind::sota:
            return std::make_unique<SotaPolicy>();
        case AgentKind::all_on:
            return std::make_unique<StaticPolicy>(AgentKind::all_on, env.config().n_sbs);
        case AgentKind::all_off:
            return std::make_unique<StaticPolicy>(AgentKind::all_off, env.config().n_sbs);
    }
    throw ConfigError("unknown agent kind");
}

}  // namespace dragsim
