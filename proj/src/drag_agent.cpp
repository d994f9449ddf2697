#include "dragsim/drag_agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dragsim/errors.hpp"
#include "dragsim/matrix.hpp"

namespace dragsim {

namespace {

int scaled_width(double scale, int full) {
    int w = static_cast<int>(std::lround(scale * full));
    return std::max(w, 2);
}

int active_count(const ModeVector& v) {
    int n = 0;
    for (auto b : v) n += b ? 1 : 0;
    return n;
}

void check_cfg(const DragConfig& cfg) {
    if (cfg.history_len <= 0) throw ConfigError("history_len must be positive");
    if (cfg.batch_size < 2) throw ConfigError("batch_size must be at least 2");
    if (cfg.train_steps_per_slot < 0) throw ConfigError("train_steps_per_slot must be >= 0");
    if (cfg.refine_distance < 0) throw ConfigError("refine_distance must be >= 0");
    if (cfg.tau <= 0.0 || cfg.tau > 1.0) throw ConfigError("tau must be in (0, 1]");
    if (cfg.gamma < 0.0 || cfg.gamma >= 1.0) throw ConfigError("gamma must be in [0, 1)");
    if (cfg.replay_capacity == 0) throw ConfigError("replay_capacity must be positive");
    if (cfg.arrival_scale <= 0.0) throw ConfigError("arrival_scale must be positive");
    if (cfg.width_scale <= 0.0) throw ConfigError("width_scale must be positive");
}

}  // namespace

std::vector<ModeVector> neighborhood(const ModeVector& v, int dist) {
    if (dist < 0) throw ConfigError("neighborhood distance must be >= 0");
    const int n = static_cast<int>(v.size());
    std::vector<ModeVector> out;
    out.push_back(v);
    // flipped index subsets of size d, in lexicographic order
    for (int d = 1; d <= std::min(dist, n); ++d) {
        std::vector<int> idx(d);
        for (int i = 0; i < d; ++i) idx[i] = i;
        while (true) {
            ModeVector cand = v;
            for (int i : idx) cand[i] = cand[i] ? 0 : 1;
            out.push_back(std::move(cand));
            int k = d - 1;
            while (k >= 0 && idx[k] == n - d + k) --k;
            if (k < 0) break;
            ++idx[k];
            for (int j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return out;
}

DragAgent::DragAgent(int n_bs, int n_sbs, double cost_scale, const DragConfig& cfg,
                     std::uint64_t seed)
    : n_bs_(n_bs),
      n_sbs_(n_sbs),
      cost_scale_(cost_scale),
      cfg_(cfg),
      rng_(split_seed(seed)),
      prev_modes_(all_on_modes(n_sbs)),
      history_(cfg.history_len, n_bs),
      ac_mem_(cfg.replay_capacity),
      arp_mem_(cfg.replay_capacity),
      cen_mem_(cfg.replay_capacity) {
    if (n_bs <= 0 || n_sbs <= 0 || n_sbs >= n_bs)
        throw ConfigError("agent needs at least one macro and one small cell");
    if (cost_scale <= 0.0) throw ConfigError("cost_scale must be positive");
    check_cfg(cfg);

    const int h1 = scaled_width(cfg.width_scale, 200);
    const int h2 = scaled_width(cfg.width_scale, 100);
    using A = Activation;
    // Supervised regressors keep the fan-in head init so their output
    // layers start at a useful magnitude; actor and critic heads start
    // near zero for a calm early policy and value surface.
    nets_.arp = make_mlp(cfg.history_len * n_bs,
                         {{h1, A::tanh_fn, true}, {h2, A::tanh_fn, true}, {n_bs, A::sigmoid}},
                         rng_);
    nets_.cen = make_mlp(n_bs + 2 * n_sbs,
                         {{h1, A::tanh_fn, true}, {h2, A::tanh_fn, true}, {1, A::sigmoid}},
                         rng_);
    nets_.actor = make_mlp(
        n_bs + n_sbs,
        {{h1, A::softplus, true}, {h2, A::relu, true}, {n_sbs, A::shifted_tanh}}, rng_, 3e-3);
    // Bias the output pre-activations to -1: fresh outputs stay high
    // (~0.88, biased toward keeping cells on) but sit on the responsive
    // part of the shifted tanh instead of its flat saturated tail.
    for (double& b : nets_.actor.layers.back().bias) b = -1.0;
    nets_.critic = make_mlp(n_bs + 2 * n_sbs,
                            {{h1, A::softplus, true}, {h2, A::relu, true}, {1, A::linear}},
                            rng_, 3e-3);
    nets_.actor_target = nets_.actor;
    nets_.critic_target = nets_.critic;
}

std::vector<double> DragAgent::state_features(const State& s) const {
    if (static_cast<int>(s.predicted.size()) != n_bs_ ||
        static_cast<int>(s.prev_modes.size()) != n_sbs_)
        throw DimensionMismatch("state shape does not match agent dimensions");
    std::vector<double> f;
    f.reserve(static_cast<size_t>(n_bs_) + n_sbs_);
    f.insert(f.end(), s.predicted.begin(), s.predicted.end());
    for (auto b : s.prev_modes) f.push_back(b ? 1.0 : 0.0);
    return f;
}

std::vector<double> DragAgent::cost_features(const ArrivalVector& arrivals,
                                             const ModeVector& prev,
                                             const ModeVector& cand) const {
    if (static_cast<int>(arrivals.size()) != n_bs_ ||
        static_cast<int>(prev.size()) != n_sbs_ || static_cast<int>(cand.size()) != n_sbs_)
        throw DimensionMismatch("cost-feature shapes do not match agent dimensions");
    std::vector<double> f;
    f.reserve(static_cast<size_t>(n_bs_) + 2 * n_sbs_);
    f.insert(f.end(), arrivals.begin(), arrivals.end());
    for (auto b : prev) f.push_back(b ? 1.0 : 0.0);
    for (auto b : cand) f.push_back(b ? 1.0 : 0.0);
    return f;
}

ArrivalVector DragAgent::predict_ar(const std::vector<double>& flat_history) const {
    if (static_cast<int>(flat_history.size()) != cfg_.history_len * n_bs_)
        throw DimensionMismatch("history window size does not match predictor input");
    ArrivalVector out = eval_single(nets_.arp, flat_history);
    for (double& v : out) v *= cfg_.arrival_scale;
    return out;
}

std::vector<double> DragAgent::act(const State& s) const {
    return eval_single(nets_.actor, state_features(s));
}

ModeVector DragAgent::proto_action(const std::vector<double>& continuous, double sigma) {
    ModeVector out(continuous.size());
    std::normal_distribution<double> noise(0.0, 1.0);
    for (size_t j = 0; j < continuous.size(); ++j) {
        double x = continuous[j];
        if (sigma > 0.0) x += sigma * noise(rng_);
        x = std::clamp(x, 0.0, 1.0);
        out[j] = x >= 0.5 ? 1 : 0;
    }
    return out;
}

double DragAgent::estimate_cost(const ArrivalVector& arrivals, const ModeVector& prev,
                                const ModeVector& candidate) const {
    return eval_single(nets_.cen, cost_features(arrivals, prev, candidate))[0] * cost_scale_;
}

double DragAgent::critic_value(const State& s, const ModeVector& action) const {
    return eval_single(nets_.critic, cost_features(s.predicted, s.prev_modes, action))[0];
}

DragAgent::Refinement DragAgent::refine_action(const ModeVector& proto, const State& s,
                                               double epsilon) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool use_cen = u(rng_) <= epsilon;
    const auto candidates = neighborhood(proto, cfg_.refine_distance);

    Refinement best;
    best.used_cen = use_cen;
    double best_val = 0.0;
    int best_active = 0;
    bool first = true;
    for (const auto& cand : candidates) {
        const double val = use_cen ? estimate_cost(s.predicted, s.prev_modes, cand)
                                   : critic_value(s, cand);
        const int act_n = active_count(cand);
        bool better = false;
        if (first) {
            better = true;
        } else if (val != best_val) {
            better = val < best_val;
        } else if (act_n != best_active) {
            better = act_n < best_active;
        } else {
            better = std::lexicographical_compare(cand.begin(), cand.end(),
                                                  best.action.begin(), best.action.end());
        }
        if (better) {
            best.action = cand;
            best_val = val;
            best_active = act_n;
            first = false;
        }
    }
    return best;
}

void DragAgent::train_arp(double lr) {
    train_arp_batch(arp_mem_.sample(cfg_.batch_size, rng_), lr);
}

void DragAgent::train_arp_batch(const std::vector<const ArSample*>& batch, double lr) {
    const int n = static_cast<int>(batch.size());
    const int in_dim = cfg_.history_len * n_bs_;
    Matrix x(n, in_dim);
    Matrix target(n, n_bs_);
    for (int i = 0; i < n; ++i) {
        std::copy(batch[i]->history.begin(), batch[i]->history.end(), x.row(i));
        for (int j = 0; j < n_bs_; ++j)
            target.at(i, j) = batch[i]->arrivals[j] / cfg_.arrival_scale;
    }
    auto cache = forward(nets_.arp, x, Mode::train);
    const Matrix& out = cache.output();
    Matrix up(n, n_bs_);
    const double scale = 2.0 / static_cast<double>(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n_bs_; ++j)
            up.at(i, j) = scale * (out.at(i, j) - target.at(i, j));
    sgd_step(nets_.arp, backward(nets_.arp, cache, up).grads, lr);
}

void DragAgent::train_cen(double lr) {
    train_cen_batch(cen_mem_.sample(cfg_.batch_size, rng_), lr);
}

void DragAgent::train_cen_batch(const std::vector<const CostSample*>& batch, double lr) {
    const int n = static_cast<int>(batch.size());
    Matrix x(n, n_bs_ + 2 * n_sbs_);
    std::vector<double> target(n);
    for (int i = 0; i < n; ++i) {
        auto f = cost_features(batch[i]->arrivals, batch[i]->prev_modes, batch[i]->modes);
        std::copy(f.begin(), f.end(), x.row(i));
        target[i] = batch[i]->cost / cost_scale_;
    }
    auto cache = forward(nets_.cen, x, Mode::train);
    const Matrix& out = cache.output();
    Matrix up(n, 1);
    for (int i = 0; i < n; ++i) up.at(i, 0) = 2.0 / n * (out.at(i, 0) - target[i]);
    sgd_step(nets_.cen, backward(nets_.cen, cache, up).grads, lr);
}

std::vector<double> DragAgent::critic_targets(
    const std::vector<const Experience*>& batch) const {
    const int n = static_cast<int>(batch.size());
    Matrix s_next(n, n_bs_ + n_sbs_);
    for (int i = 0; i < n; ++i) {
        auto f = state_features(batch[i]->s_next);
        std::copy(f.begin(), f.end(), s_next.row(i));
    }
    Matrix a_next = eval_batch(nets_.actor_target, s_next);
    Matrix qin(n, n_bs_ + 2 * n_sbs_);
    for (int i = 0; i < n; ++i) {
        const auto& sn = batch[i]->s_next;
        int c = 0;
        for (double v : sn.predicted) qin.at(i, c++) = v;
        for (auto b : sn.prev_modes) qin.at(i, c++) = b ? 1.0 : 0.0;
        for (int j = 0; j < n_sbs_; ++j) qin.at(i, c++) = a_next.at(i, j);
    }
    Matrix q_next = eval_batch(nets_.critic_target, qin);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i)
        y[i] = batch[i]->cost / cost_scale_ + cfg_.gamma * q_next.at(i, 0);
    return y;
}

void DragAgent::train_critic_batch(const std::vector<const Experience*>& batch,
                                   const std::vector<double>& targets, double lr) {
    const int n = static_cast<int>(batch.size());
    if (targets.size() != batch.size())
        throw DimensionMismatch("critic targets do not match batch size");
    Matrix x(n, n_bs_ + 2 * n_sbs_);
    for (int i = 0; i < n; ++i) {
        auto f = cost_features(batch[i]->s.predicted, batch[i]->s.prev_modes,
                               batch[i]->action);
        std::copy(f.begin(), f.end(), x.row(i));
    }
    auto cache = forward(nets_.critic, x, Mode::train);
    const Matrix& out = cache.output();
    Matrix up(n, 1);
    for (int i = 0; i < n; ++i) up.at(i, 0) = 2.0 / n * (out.at(i, 0) - targets[i]);
    sgd_step(nets_.critic, backward(nets_.critic, cache, up).grads, lr);
}

void DragAgent::train_actor_batch(const std::vector<const State*>& states, double lr) {
    const int n = static_cast<int>(states.size());
    Matrix sf(n, n_bs_ + n_sbs_);
    for (int i = 0; i < n; ++i) {
        auto f = state_features(*states[i]);
        std::copy(f.begin(), f.end(), sf.row(i));
    }
    auto a_cache = forward(nets_.actor, sf, Mode::train);
    const Matrix& v = a_cache.output();  // n x n_sbs, in (0,1)

    Matrix qin(n, n_bs_ + 2 * n_sbs_);
    for (int i = 0; i < n; ++i) {
        int c = 0;
        for (double lam : states[i]->predicted) qin.at(i, c++) = lam;
        for (auto b : states[i]->prev_modes) qin.at(i, c++) = b ? 1.0 : 0.0;
        for (int j = 0; j < n_sbs_; ++j) qin.at(i, c++) = v.at(i, j);
    }
    // The critic is only queried here, not trained, so it runs in eval
    // mode; gradients still flow through its frozen statistics.
    auto q_cache = forward(nets_.critic, qin, Mode::eval);
    Matrix q_up(n, 1);
    for (int i = 0; i < n; ++i) q_up.at(i, 0) = 1.0 / n;
    Matrix dqin = backward(nets_.critic, q_cache, q_up).input_grad;

    // dQ/dv, inverted near the action bounds, then pushed back through
    // the actor as the direction v should move (critic estimates cost,
    // so we descend).
    Matrix up(n, n_sbs_);
    for (int i = 0; i < n; ++i) {
        std::vector<double> push(n_sbs_), action(n_sbs_);
        for (int j = 0; j < n_sbs_; ++j) {
            push[j] = -dqin.at(i, n_bs_ + n_sbs_ + j);
            action[j] = v.at(i, j);
        }
        auto adjusted = grad_inverse(push, action);
        for (int j = 0; j < n_sbs_; ++j) up.at(i, j) = -adjusted[j];
    }
    sgd_step(nets_.actor, backward(nets_.actor, a_cache, up).grads, lr);
}

void DragAgent::train_actor_critic(double lr_critic, double lr_actor) {
    const auto batch = ac_mem_.sample(cfg_.batch_size, rng_);
    const auto y = critic_targets(batch);
    train_critic_batch(batch, y, lr_critic);
    std::vector<const State*> states;
    states.reserve(batch.size());
    for (const auto* e : batch) states.push_back(&e->s);
    train_actor_batch(states, lr_actor);
}

void DragAgent::update_targets() {
    soft_update(nets_.actor_target, nets_.actor, cfg_.tau);
    soft_update(nets_.critic_target, nets_.critic, cfg_.tau);
}

SlotLog DragAgent::run_slot(HetNetEnv& env) {
    const long t = slot_;
    const double sigma = cfg_.noise_sigma.value(t);
    const double epsilon = cfg_.refine_epsilon.value(t);

    // decide
    const std::vector<double> window = history_.flatten();
    ArrivalVector predicted = next_prediction_ ? *next_prediction_ : predict_ar(window);
    State s{predicted, prev_modes_};
    const std::vector<double> continuous = act(s);
    ModeVector proto = proto_action(continuous, sigma);
    Refinement chosen{proto, false};
    if (cfg_.refine_enabled) chosen = refine_action(proto, s, epsilon);

    // execute
    StepResult sr = env.step(chosen.action);

    // learn from what was known before this slot
    const size_t n = static_cast<size_t>(cfg_.batch_size);
    for (int k = 0; k < cfg_.train_steps_per_slot; ++k) {
        if (arp_mem_.size() >= n) train_arp(cfg_.lr_arp.value(t));
        if (cen_mem_.size() >= n) train_cen(cfg_.lr_cen.value(t));
        if (ac_mem_.size() >= n) {
            train_actor_critic(cfg_.lr_critic.value(t), cfg_.lr_actor.value(t));
            update_targets();
        }
    }

    // observe and store
    arp_mem_.push({window, sr.arrivals});
    cen_mem_.push({sr.arrivals, prev_modes_, chosen.action, sr.cost.total});
    history_.push(sr.arrivals);
    ArrivalVector next_pred = predict_ar(history_.flatten());
    State s_next{next_pred, chosen.action};
    ac_mem_.push({s, chosen.action, sr.cost.total, s_next});
    next_prediction_ = std::move(next_pred);
    prev_modes_ = chosen.action;
    ++slot_;

    SlotLog log;
    log.slot = sr.slot;
    log.action = chosen.action;
    log.used_cen = chosen.used_cen;
    log.cost = sr.cost;
    log.arrivals = sr.arrivals;
    log.predicted = std::move(predicted);
    log.loads = sr.loads;
    return log;
}

namespace {

constexpr char kAgentMagic[4] = {'D', 'R', 'A', 'G'};

void write_i64(std::ostream& out, std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::int64_t read_i64(std::istream& in) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_vec(std::ostream& out, const std::vector<double>& v) {
    write_i64(out, static_cast<std::int64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_vec(std::istream& in) {
    const std::int64_t n = read_i64(in);
    if (n < 0 || n > (1 << 28)) throw std::runtime_error("checkpoint: implausible vector");
    std::vector<double> v(static_cast<size_t>(n));
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    return v;
}

}  // namespace

void DragAgent::save_checkpoint(std::ostream& out) const {
    out.write(kAgentMagic, sizeof kAgentMagic);
    write_i64(out, n_bs_);
    write_i64(out, n_sbs_);
    write_i64(out, slot_);
    out.write(reinterpret_cast<const char*>(&cost_scale_), sizeof cost_scale_);
    save_mlp(nets_.arp, out);
    save_mlp(nets_.cen, out);
    save_mlp(nets_.actor, out);
    save_mlp(nets_.critic, out);
    save_mlp(nets_.actor_target, out);
    save_mlp(nets_.critic_target, out);
    std::vector<double> modes(prev_modes_.begin(), prev_modes_.end());
    write_vec(out, modes);
    write_vec(out, history_.flatten());
    write_vec(out, next_prediction_ ? *next_prediction_ : std::vector<double>{});
    std::ostringstream rs;
    rs << rng_;
    const std::string rstr = rs.str();
    write_i64(out, static_cast<std::int64_t>(rstr.size()));
    out.write(rstr.data(), static_cast<std::streamsize>(rstr.size()));
    if (!out) throw std::runtime_error("checkpoint write failed");
}

DragAgent DragAgent::load_checkpoint(std::istream& in, const DragConfig& cfg) {
    char magic[4];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kAgentMagic, sizeof kAgentMagic) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const int n_bs = static_cast<int>(read_i64(in));
    const int n_sbs = static_cast<int>(read_i64(in));
    const long slot = static_cast<long>(read_i64(in));
    double cost_scale = 0.0;
    in.read(reinterpret_cast<char*>(&cost_scale), sizeof cost_scale);

    DragAgent agent(n_bs, n_sbs, cost_scale, cfg, 0);
    agent.slot_ = slot;
    agent.nets_.arp = load_mlp(in);
    agent.nets_.cen = load_mlp(in);
    agent.nets_.actor = load_mlp(in);
    agent.nets_.critic = load_mlp(in);
    agent.nets_.actor_target = load_mlp(in);
    agent.nets_.critic_target = load_mlp(in);

    const auto modes = read_vec(in);
    if (static_cast<int>(modes.size()) != n_sbs)
        throw std::runtime_error("checkpoint: mode vector size mismatch");
    for (int j = 0; j < n_sbs; ++j) agent.prev_modes_[j] = modes[j] != 0.0 ? 1 : 0;

    const auto hist = read_vec(in);
    if (static_cast<int>(hist.size()) != cfg.history_len * n_bs)
        throw std::runtime_error("checkpoint: history size mismatch");
    for (int i = 0; i < cfg.history_len; ++i) {
        ArrivalVector row(hist.begin() + static_cast<long>(i) * n_bs,
                          hist.begin() + static_cast<long>(i + 1) * n_bs);
        agent.history_.push(row);
    }

    const auto pred = read_vec(in);
    if (pred.empty())
        agent.next_prediction_.reset();
    else if (static_cast<int>(pred.size()) == n_bs)
        agent.next_prediction_ = pred;
    else
        throw std::runtime_error("checkpoint: prediction size mismatch");

    const std::int64_t rlen = read_i64(in);
    if (rlen <= 0 || rlen > (1 << 20)) throw std::runtime_error("checkpoint: bad rng state");
    std::string rstr(static_cast<size_t>(rlen), '\0');
    in.read(rstr.data(), rlen);
    if (!in) throw std::runtime_error("checkpoint: truncated");
    std::istringstream rs(rstr);
    rs >> agent.rng_;
    return agent;
}

void DragAgent::save_checkpoint_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path);
    save_checkpoint(out);
}

DragAgent DragAgent::load_checkpoint_file(const std::string& path, const DragConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    return load_checkpoint(in, cfg);
}

}  // namespace dragsim
