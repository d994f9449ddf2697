#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "dragsim/errors.hpp"
#include "dragsim/mlp.hpp"
#include "dragsim/rng.hpp"
#include "dragsim/schedule.hpp"

using namespace dragsim;

namespace {

Mlp small_net(bool with_bn, Rng& rng) {
    using A = Activation;
    return make_mlp(3, {{5, A::softplus, with_bn}, {4, A::relu, with_bn}, {2, A::shifted_tanh}},
                    rng);
}

Matrix random_batch(int n, int d, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix x(n, d);
    for (double& v : x.data) v = u(rng);
    return x;
}

// Scalar probe loss L = sum(out * direction) so dL/dout is a constant
// matrix and finite differences are cheap.
double probe_loss(Mlp net, const Matrix& x, const Matrix& dir, Mode mode) {
    auto cache = forward(net, x, mode);
    const Matrix& out = cache.output();
    double l = 0.0;
    for (size_t i = 0; i < out.data.size(); ++i) l += out.data[i] * dir.data[i];
    return l;
}

struct ParamRef {
    double* p;
};

std::vector<ParamRef> all_params(Mlp& net) {
    std::vector<ParamRef> out;
    for (auto& layer : net.layers) {
        for (double& w : layer.weight.data) out.push_back({&w});
        for (double& b : layer.bias) out.push_back({&b});
        if (layer.bn) {
            for (double& s : layer.bn->scale) out.push_back({&s});
            for (double& o : layer.bn->offset) out.push_back({&o});
        }
    }
    return out;
}

std::vector<double> flat_grads(const Gradients& g) {
    std::vector<double> out;
    for (const auto& lg : g.layers) {
        out.insert(out.end(), lg.weight.data.begin(), lg.weight.data.end());
        out.insert(out.end(), lg.bias.begin(), lg.bias.end());
        out.insert(out.end(), lg.bn_scale.begin(), lg.bn_scale.end());
        out.insert(out.end(), lg.bn_offset.begin(), lg.bn_offset.end());
    }
    return out;
}

void check_gradients(Mlp& net, const Matrix& x, Mode mode) {
    Rng rng(123);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto cache = forward(net, x, mode);
    Matrix dir(cache.output().rows, cache.output().cols);
    for (double& v : dir.data) v = u(rng);

    auto result = backward(net, cache, dir);
    std::vector<double> analytic = flat_grads(result.grads);
    auto params = all_params(net);
    REQUIRE(analytic.size() == params.size());

    const double eps = 1e-5;
    for (size_t i = 0; i < params.size(); ++i) {
        double saved = *params[i].p;
        *params[i].p = saved + eps;
        double up = probe_loss(net, x, dir, mode);
        *params[i].p = saved - eps;
        double down = probe_loss(net, x, dir, mode);
        *params[i].p = saved;
        double numeric = (up - down) / (2 * eps);
        double denom = std::max({std::fabs(numeric), std::fabs(analytic[i]), 1e-6});
        CHECK(std::fabs(numeric - analytic[i]) / denom < 1e-4);
    }

    // input gradient too
    Matrix xv = x;
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) {
            double saved = xv.at(r, c);
            xv.at(r, c) = saved + eps;
            double up = probe_loss(net, xv, dir, mode);
            xv.at(r, c) = saved - eps;
            double down = probe_loss(net, xv, dir, mode);
            xv.at(r, c) = saved;
            double numeric = (up - down) / (2 * eps);
            double analytic_in = result.input_grad.at(r, c);
            double denom = std::max({std::fabs(numeric), std::fabs(analytic_in), 1e-6});
            CHECK(std::fabs(numeric - analytic_in) / denom < 1e-4);
        }
}

}  // namespace

TEST_CASE("activation values match their closed forms") {
    CHECK(activate(Activation::shifted_tanh, -2.0) == doctest::Approx(0.5));
    CHECK(activate(Activation::shifted_tanh, 0.0) ==
          doctest::Approx((std::tanh(2.0) + 1.0) / 2.0));
    CHECK(activate(Activation::shifted_tanh, 0.0) > 0.9);
    CHECK(activate(Activation::softplus, 0.0) == doctest::Approx(std::log(2.0)));
    CHECK(activate(Activation::relu, -1.0) == 0.0);
    CHECK(activate(Activation::relu, 2.5) == 2.5);
    CHECK(activate(Activation::sigmoid, 0.0) == doctest::Approx(0.5));
    CHECK(activate(Activation::tanh_fn, 0.7) == doctest::Approx(std::tanh(0.7)));
    CHECK(activate(Activation::linear, -3.1) == -3.1);
}

TEST_CASE("shifted output head keeps actions inside the unit interval") {
    // strictly inside over the preactivation range the nets can reach
    for (double x : {-15.0, -2.0, 0.0, 3.0, 12.0}) {
        double y = activate(Activation::shifted_tanh, x);
        CHECK(y > 0.0);
        CHECK(y < 1.0);
    }
    // double-precision tanh saturates far out; never past the bounds
    for (double x : {-1e6, -50.0, 50.0, 1e6}) {
        double y = activate(Activation::shifted_tanh, x);
        CHECK(y >= 0.0);
        CHECK(y <= 1.0);
    }
}

TEST_CASE("activation derivatives match numeric differentiation") {
    const double eps = 1e-6;
    for (auto a : {Activation::linear, Activation::sigmoid, Activation::tanh_fn,
                   Activation::softplus, Activation::shifted_tanh}) {
        for (double x : {-1.7, -0.3, 0.4, 2.2}) {
            double numeric = (activate(a, x + eps) - activate(a, x - eps)) / (2 * eps);
            CHECK(activate_grad(a, x) == doctest::Approx(numeric).epsilon(1e-5));
        }
    }
    CHECK(activate_grad(Activation::relu, 1.0) == 1.0);
    CHECK(activate_grad(Activation::relu, -1.0) == 0.0);
}

TEST_CASE("identity linear layer reproduces its input") {
    Mlp net;
    Layer l;
    l.weight = Matrix(2, 2);
    l.weight.at(0, 0) = 1.0;
    l.weight.at(1, 1) = 1.0;
    l.bias = {0.0, 0.0};
    l.act = Activation::linear;
    net.layers.push_back(l);

    Matrix x(3, 2);
    double v = 0.5;
    for (double& e : x.data) e = (v += 0.25);
    Matrix y = eval_batch(net, x);
    for (size_t i = 0; i < x.data.size(); ++i) CHECK(y.data[i] == x.data[i]);
}

TEST_CASE("analytic gradients agree with finite differences") {
    Rng rng(77);
    SUBCASE("plain net, eval mode") {
        Mlp net = small_net(false, rng);
        Matrix x = random_batch(6, 3, rng);
        check_gradients(net, x, Mode::eval);
    }
    SUBCASE("batch-norm net, train mode") {
        Mlp net = small_net(true, rng);
        Matrix x = random_batch(6, 3, rng);
        check_gradients(net, x, Mode::train);
    }
    SUBCASE("batch-norm net, frozen statistics") {
        Mlp net = small_net(true, rng);
        // move the running stats off their initial values first
        Matrix warm = random_batch(16, 3, rng);
        forward(net, warm, Mode::train);
        Matrix x = random_batch(6, 3, rng);
        check_gradients(net, x, Mode::eval);
    }
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
    Rng rng(5);
    Mlp net = small_net(true, rng);
    Matrix x = random_batch(4, 3, rng);
    auto cache = forward(net, x, Mode::train);
    Matrix up(cache.output().rows, cache.output().cols);
    auto result = backward(net, cache, up);
    for (double g : flat_grads(result.grads)) CHECK(g == 0.0);
    for (double g : result.input_grad.data) CHECK(g == 0.0);
}

TEST_CASE("linear layer input gradient is W transpose times upstream") {
    Mlp net;
    Layer l;
    l.weight = Matrix(2, 2);
    l.weight.at(0, 0) = 2.0;
    l.weight.at(0, 1) = -1.0;
    l.weight.at(1, 0) = 0.5;
    l.weight.at(1, 1) = 3.0;
    l.bias = {0.0, 0.0};
    net.layers.push_back(l);

    Matrix x(1, 2);
    x.at(0, 0) = 0.3;
    x.at(0, 1) = -0.7;
    auto cache = forward(net, x, Mode::eval);
    Matrix up(1, 2);
    up.at(0, 0) = 1.0;
    up.at(0, 1) = 2.0;
    auto result = backward(net, cache, up);
    // dL/dx = up * W (row vector times out-by-in matrix)
    CHECK(result.input_grad.at(0, 0) == doctest::Approx(1.0 * 2.0 + 2.0 * 0.5));
    CHECK(result.input_grad.at(0, 1) == doctest::Approx(1.0 * -1.0 + 2.0 * 3.0));
}

TEST_CASE("train-mode batch norm standardizes each feature") {
    Rng rng(9);
    Mlp net = make_mlp(3, {{4, Activation::linear, true}}, rng);
    auto& bn = *net.layers[0].bn;
    for (double& s : bn.scale) s = 2.0;
    for (double& o : bn.offset) o = 0.5;

    Matrix x = random_batch(64, 3, rng);
    auto cache = forward(net, x, Mode::train);
    const Matrix& pre = cache.layers[0].preact;
    for (int f = 0; f < 4; ++f) {
        double mean = 0.0;
        for (int r = 0; r < pre.rows; ++r) mean += pre.at(r, f);
        mean /= pre.rows;
        double var = 0.0;
        for (int r = 0; r < pre.rows; ++r) {
            double d = pre.at(r, f) - mean;
            var += d * d;
        }
        var /= pre.rows;
        CHECK(std::fabs(mean - 0.5) < 1e-6);
        CHECK(std::fabs(std::sqrt(var) - 2.0) < 1e-6);
    }
}

TEST_CASE("train mode with batch norm rejects single-row batches") {
    Rng rng(15);
    Mlp net = small_net(true, rng);
    Matrix x = random_batch(1, 3, rng);
    CHECK_THROWS_AS(forward(net, x, Mode::train), DimensionMismatch);
}

TEST_CASE("eval mode is pure and repeatable") {
    Rng rng(25);
    Mlp net = small_net(true, rng);
    Matrix warm = random_batch(8, 3, rng);
    forward(net, warm, Mode::train);
    std::vector<double> stats_before = net.layers[0].bn->running_mean;

    Matrix x = random_batch(5, 3, rng);
    Matrix y1 = eval_batch(net, x);
    Matrix y2 = eval_batch(net, x);
    for (size_t i = 0; i < y1.data.size(); ++i) CHECK(y1.data[i] == y2.data[i]);
    for (size_t i = 0; i < stats_before.size(); ++i)
        CHECK(net.layers[0].bn->running_mean[i] == stats_before[i]);

    std::vector<double> single = eval_single(net, {0.1, -0.2, 0.4});
    Matrix row = eval_batch(net, row_matrix({0.1, -0.2, 0.4}));
    for (size_t i = 0; i < single.size(); ++i)
        CHECK(single[i] == row.at(0, static_cast<int>(i)));
}

TEST_CASE("stale caches are rejected") {
    Rng rng(33);
    Mlp net = small_net(true, rng);
    Matrix x = random_batch(4, 3, rng);
    auto cache = forward(net, x, Mode::train);
    Matrix bad(3, 2);  // wrong upstream shape
    CHECK_THROWS_AS(backward(net, cache, bad), StaleCache);
}

TEST_CASE("gradient step moves parameters by minus lr times gradient") {
    SUBCASE("lr zero is a no-op") {
        Rng rng(51);
        Mlp net = small_net(true, rng);
        Mlp before = net;
        Matrix x = random_batch(4, 3, rng);
        auto cache = forward(net, x, Mode::train);
        Matrix up(cache.output().rows, cache.output().cols);
        for (double& v : up.data) v = 1.0;
        sgd_step(net, backward(net, cache, up).grads, 0.0);
        for (size_t l = 0; l < net.layers.size(); ++l) {
            for (size_t i = 0; i < net.layers[l].weight.data.size(); ++i)
                CHECK(net.layers[l].weight.data[i] == before.layers[l].weight.data[i]);
            for (size_t i = 0; i < net.layers[l].bias.size(); ++i)
                CHECK(net.layers[l].bias[i] == before.layers[l].bias[i]);
        }
    }
    SUBCASE("scalar weight arithmetic") {
        Mlp net;
        Layer l;
        l.weight = Matrix(1, 1);
        l.weight.at(0, 0) = 1.0;
        l.bias = {0.0};
        net.layers.push_back(l);
        Gradients g;
        g.layers.resize(1);
        g.layers[0].weight = Matrix(1, 1);
        g.layers[0].weight.at(0, 0) = 2.0;
        g.layers[0].bias = {0.0};
        sgd_step(net, g, 0.1);
        CHECK(net.layers[0].weight.at(0, 0) == doctest::Approx(0.8));
    }
    SUBCASE("two steps compose additively for a linear model") {
        Rng rng(53);
        Mlp a = make_mlp(2, {{2, Activation::linear, false}}, rng);
        Mlp b = a;
        Matrix x = random_batch(3, 2, rng);
        Matrix up(3, 2);
        for (double& v : up.data) v = 0.7;
        // gradients of a linear layer depend on the input only
        auto g1 = backward(a, forward(a, x, Mode::eval), up).grads;
        Matrix x2 = random_batch(3, 2, rng);
        auto g2 = backward(a, forward(a, x2, Mode::eval), up).grads;
        sgd_step(a, g1, 0.05);
        sgd_step(a, g2, 0.05);
        Gradients sum = g1;
        for (size_t i = 0; i < sum.layers[0].weight.data.size(); ++i)
            sum.layers[0].weight.data[i] += g2.layers[0].weight.data[i];
        for (size_t i = 0; i < sum.layers[0].bias.size(); ++i)
            sum.layers[0].bias[i] += g2.layers[0].bias[i];
        sgd_step(b, sum, 0.05);
        for (size_t i = 0; i < a.layers[0].weight.data.size(); ++i)
            CHECK(a.layers[0].weight.data[i] == doctest::Approx(b.layers[0].weight.data[i]));
    }
}

TEST_CASE("soft update blends parameters and copies statistics") {
    Rng rng(61);
    Mlp online = small_net(true, rng);
    Mlp target = small_net(true, rng);
    Matrix warm = random_batch(8, 3, rng);
    forward(online, warm, Mode::train);

    SUBCASE("tau one copies the online net") {
        soft_update(target, online, 1.0);
        for (size_t l = 0; l < online.layers.size(); ++l)
            for (size_t i = 0; i < online.layers[l].weight.data.size(); ++i)
                CHECK(target.layers[l].weight.data[i] == online.layers[l].weight.data[i]);
    }
    SUBCASE("tau zero keeps parameters but refreshes statistics") {
        Mlp before = target;
        soft_update(target, online, 0.0);
        for (size_t l = 0; l < before.layers.size(); ++l) {
            for (size_t i = 0; i < before.layers[l].weight.data.size(); ++i)
                CHECK(target.layers[l].weight.data[i] == before.layers[l].weight.data[i]);
            if (before.layers[l].bn)
                for (size_t i = 0; i < before.layers[l].bn->running_mean.size(); ++i)
                    CHECK(target.layers[l].bn->running_mean[i] ==
                          online.layers[l].bn->running_mean[i]);
        }
    }
    SUBCASE("scalar blend arithmetic") {
        Mlp one, zero;
        Layer l;
        l.weight = Matrix(1, 1);
        l.bias = {0.0};
        one.layers.push_back(l);
        zero.layers.push_back(l);
        one.layers[0].weight.at(0, 0) = 1.0;
        zero.layers[0].weight.at(0, 0) = 0.0;
        soft_update(zero, one, 1e-4);
        CHECK(zero.layers[0].weight.at(0, 0) == doctest::Approx(1e-4));
    }
    SUBCASE("repeated updates shrink the gap geometrically") {
        Mlp one, tracker;
        Layer l;
        l.weight = Matrix(1, 1);
        l.bias = {0.0};
        one.layers.push_back(l);
        tracker.layers.push_back(l);
        one.layers[0].weight.at(0, 0) = 1.0;
        tracker.layers[0].weight.at(0, 0) = 0.0;
        const double tau = 0.01;
        double gap = 1.0;
        for (int i = 0; i < 20; ++i) {
            soft_update(tracker, one, tau);
            double now = 1.0 - tracker.layers[0].weight.at(0, 0);
            CHECK(now == doctest::Approx(gap * (1 - tau)));
            gap = now;
        }
    }
}

TEST_CASE("bounded-action gradient damping") {
    SUBCASE("upward push dies at the upper bound") {
        auto adj = grad_inverse({1.0}, {1.0});
        CHECK(adj[0] == doctest::Approx(0.0));
    }
    SUBCASE("downward push dies at the lower bound") {
        auto adj = grad_inverse({-1.0}, {0.0});
        CHECK(adj[0] == doctest::Approx(0.0));
    }
    SUBCASE("midpoint halves either direction") {
        auto adj = grad_inverse({1.0, -1.0}, {0.5, 0.5});
        CHECK(adj[0] == doctest::Approx(0.5));
        CHECK(adj[1] == doctest::Approx(-0.5));
    }
    SUBCASE("signs are preserved away from bounds") {
        auto adj = grad_inverse({0.4, -0.4}, {0.25, 0.25});
        CHECK(adj[0] > 0.0);
        CHECK(adj[1] < 0.0);
    }
}

TEST_CASE("decay schedules interpolate and then hold") {
    LinearSchedule s{0.5, 0.05, 10000};
    CHECK(s.value(0) == doctest::Approx(0.5));
    CHECK(s.value(5000) == doctest::Approx(0.275));
    CHECK(s.value(10000) == doctest::Approx(0.05));
    CHECK(s.value(25000) == doctest::Approx(0.05));
    double last = s.value(0);
    for (long t = 0; t <= 12000; t += 500) {
        CHECK(s.value(t) <= last + 1e-12);
        last = s.value(t);
    }
}

TEST_CASE("snapshots round-trip bit-exactly") {
    Rng rng(71);
    Mlp net = small_net(true, rng);
    Matrix warm = random_batch(8, 3, rng);
    forward(net, warm, Mode::train);

    SUBCASE("stream round trip") {
        std::stringstream buf;
        save_mlp(net, buf);
        Mlp back = load_mlp(buf);
        REQUIRE(back.layers.size() == net.layers.size());
        for (size_t l = 0; l < net.layers.size(); ++l) {
            for (size_t i = 0; i < net.layers[l].weight.data.size(); ++i)
                CHECK(back.layers[l].weight.data[i] == net.layers[l].weight.data[i]);
            for (size_t i = 0; i < net.layers[l].bias.size(); ++i)
                CHECK(back.layers[l].bias[i] == net.layers[l].bias[i]);
            CHECK(back.layers[l].act == net.layers[l].act);
            REQUIRE(back.layers[l].bn.has_value() == net.layers[l].bn.has_value());
            if (net.layers[l].bn) {
                for (size_t i = 0; i < net.layers[l].bn->running_var.size(); ++i) {
                    CHECK(back.layers[l].bn->running_mean[i] ==
                          net.layers[l].bn->running_mean[i]);
                    CHECK(back.layers[l].bn->running_var[i] ==
                          net.layers[l].bn->running_var[i]);
                }
            }
        }
        Matrix x = random_batch(4, 3, rng);
        Matrix y1 = eval_batch(net, x);
        Matrix y2 = eval_batch(back, x);
        for (size_t i = 0; i < y1.data.size(); ++i) CHECK(y1.data[i] == y2.data[i]);
    }
    SUBCASE("file round trip") {
        save_mlp_file(net, "/tmp/net_snapshot.bin");
        Mlp back = load_mlp_file("/tmp/net_snapshot.bin");
        Matrix x = random_batch(4, 3, rng);
        Matrix y1 = eval_batch(net, x);
        Matrix y2 = eval_batch(back, x);
        for (size_t i = 0; i < y1.data.size(); ++i) CHECK(y1.data[i] == y2.data[i]);
    }
    SUBCASE("junk input is rejected") {
        std::stringstream buf("not a snapshot");
        CHECK_THROWS(load_mlp(buf));
    }
}
