#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dragsim/matrix.hpp"
#include "dragsim/rng.hpp"

namespace dragsim {

enum class Activation : std::uint8_t {
    linear,
    relu,
    tanh_fn,
    sigmoid,
    softplus,
    shifted_tanh,  // (tanh(x+2)+1)/2, maps all reals into (0,1), biased high at 0
};

double activate(Activation a, double x);
double activate_grad(Activation a, double x);  // derivative at pre-activation x

struct BatchNorm {
    std::vector<double> scale;         // gamma
    std::vector<double> offset;        // beta
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.99;
};

struct Layer {
    Matrix weight;             // out x in
    std::vector<double> bias;  // out
    Activation act = Activation::linear;
    std::optional<BatchNorm> bn;

    int in_dim() const { return weight.cols; }
    int out_dim() const { return weight.rows; }
};

// Plain dense network. The single parameter container behind the
// predictor, cost estimator, actor, critic and their targets.
struct Mlp {
    std::vector<Layer> layers;

    int input_dim() const { return layers.front().in_dim(); }
    int output_dim() const { return layers.back().out_dim(); }
    size_t parameter_count() const;
};

struct LayerSpec {
    int size = 0;
    Activation act = Activation::linear;
    bool batchnorm = false;
};

// Hidden layers: uniform +-1/sqrt(fan_in). The final layer follows the
// same rule unless head_bound > 0, which pins it to uniform +-head_bound
// (the near-zero start actor/critic heads want).
Mlp make_mlp(int input_dim, const std::vector<LayerSpec>& layers, Rng& rng,
             double head_bound = 0.0);

enum class Mode : std::uint8_t { train, eval };

struct LayerCache {
    Matrix preact;   // value fed into the activation (post-BN when present)
    Matrix xhat;     // normalized pre-activation (BN layers only)
    std::vector<double> inv_std;  // per feature (BN layers only)
};

struct ForwardCache {
    Mode mode = Mode::eval;
    std::vector<Matrix> act_out;  // act_out[0] = input, act_out[l+1] = layer l output
    std::vector<LayerCache> layers;
    const Matrix& output() const { return act_out.back(); }
};

// Train mode normalizes with batch statistics and updates the running
// ones; eval mode uses the running statistics and leaves the network
// untouched. Train mode needs at least two rows when any layer carries
// batch norm.
ForwardCache forward(Mlp& net, const Matrix& batch, Mode mode);

// Eval-mode forward without mutating anything; convenience for
// decision-time queries.
std::vector<double> eval_single(const Mlp& net, const std::vector<double>& input);
Matrix eval_batch(const Mlp& net, const Matrix& batch);

struct LayerGrads {
    Matrix weight;
    std::vector<double> bias;
    std::vector<double> bn_scale;
    std::vector<double> bn_offset;
};

struct Gradients {
    std::vector<LayerGrads> layers;
};

struct BackwardResult {
    Gradients grads;
    Matrix input_grad;
};

// upstream is dLoss/dOutput for the batch the cache was built from.
// Works for caches from either mode (eval-mode backprop treats batch
// norm as the fixed affine map it is at decision time).
BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Matrix& upstream);

// theta <- theta - lr * grad for weights, biases and BN scale/offset.
// Running statistics are not parameters and are left alone.
void sgd_step(Mlp& net, const Gradients& grads, double lr);

// target <- tau * online + (1 - tau) * target for all parameters;
// running statistics are copied from the online network.
void soft_update(Mlp& target, const Mlp& online, double tau);

// Damps a bounded quantity's update near its bounds: components pushing
// toward hi scale by (hi - a), toward lo by (a - lo). `push` is the
// direction the quantity is about to move.
std::vector<double> grad_inverse(const std::vector<double>& push,
                                 const std::vector<double>& action,
                                 double lo = 0.0, double hi = 1.0);

// Versioned binary snapshot; loading restores the network bit-exactly.
void save_mlp(const Mlp& net, std::ostream& out);
Mlp load_mlp(std::istream& in);
void save_mlp_file(const Mlp& net, const std::string& path);
Mlp load_mlp_file(const std::string& path);

}  // namespace dragsim
