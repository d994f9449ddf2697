#include "dragsim/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <istream>
#include <stdexcept>

#include "dragsim/errors.hpp"

namespace dragsim {

namespace {

constexpr double kBnEps = 1e-8;

double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

double activate(Activation a, double x) {
    switch (a) {
        case Activation::linear: return x;
        case Activation::relu: return x > 0 ? x : 0.0;
        case Activation::tanh_fn: return std::tanh(x);
        case Activation::sigmoid: return sigmoid(x);
        case Activation::softplus: return softplus(x);
        case Activation::shifted_tanh: return (std::tanh(x + 2.0) + 1.0) / 2.0;
    }
    throw std::logic_error("unknown activation");
}

double activate_grad(Activation a, double x) {
    switch (a) {
        case Activation::linear: return 1.0;
        case Activation::relu: return x > 0 ? 1.0 : 0.0;
        case Activation::tanh_fn: {
            double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::sigmoid: {
            double s = sigmoid(x);
            return s * (1.0 - s);
        }
        case Activation::softplus: return sigmoid(x);
        case Activation::shifted_tanh: {
            double t = std::tanh(x + 2.0);
            return (1.0 - t * t) / 2.0;
        }
    }
    throw std::logic_error("unknown activation");
}

size_t Mlp::parameter_count() const {
    size_t n = 0;
    for (const auto& l : layers) {
        n += l.weight.data.size() + l.bias.size();
        if (l.bn) n += l.bn->scale.size() + l.bn->offset.size();
    }
    return n;
}

Mlp make_mlp(int input_dim, const std::vector<LayerSpec>& specs, Rng& rng,
             double head_bound) {
    if (input_dim <= 0) throw DimensionMismatch("make_mlp: input_dim must be positive");
    if (specs.empty()) throw DimensionMismatch("make_mlp: need at least one layer");

    Mlp net;
    int fan_in = input_dim;
    for (size_t li = 0; li < specs.size(); ++li) {
        const auto& spec = specs[li];
        if (spec.size <= 0) throw DimensionMismatch("make_mlp: layer size must be positive");
        const bool last = li + 1 == specs.size();
        const double bound = last && head_bound > 0.0
                                 ? head_bound
                                 : 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);

        Layer layer;
        layer.weight = Matrix(spec.size, fan_in);
        for (auto& w : layer.weight.data) w = u(rng);
        layer.bias.resize(spec.size);
        for (auto& b : layer.bias) b = u(rng);
        layer.act = spec.act;
        if (spec.batchnorm) {
            BatchNorm bn;
            bn.scale.assign(spec.size, 1.0);
            bn.offset.assign(spec.size, 0.0);
            bn.running_mean.assign(spec.size, 0.0);
            bn.running_var.assign(spec.size, 1.0);
            layer.bn = std::move(bn);
        }
        net.layers.push_back(std::move(layer));
        fan_in = spec.size;
    }
    return net;
}

namespace {

// update_target non-null only for train mode: running statistics get refreshed in place.
ForwardCache run_forward(const Mlp& net, const Matrix& batch, Mode mode, Mlp* update_target) {
    if (batch.cols != net.input_dim())
        throw DimensionMismatch("forward: input has " + std::to_string(batch.cols) +
                                " features, network expects " + std::to_string(net.input_dim()));
    if (mode == Mode::train && batch.rows < 2) {
        for (const auto& l : net.layers)
            if (l.bn)
                throw DimensionMismatch("forward: train mode with batch norm needs >= 2 rows");
    }

    const int n = batch.rows;
    ForwardCache cache;
    cache.mode = mode;
    cache.act_out.reserve(net.layers.size() + 1);
    cache.layers.resize(net.layers.size());
    cache.act_out.push_back(batch);

    for (size_t li = 0; li < net.layers.size(); ++li) {
        const Layer& layer = net.layers[li];
        const Matrix& x = cache.act_out.back();
        Matrix z = matmul_bt(x, layer.weight);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < z.cols; ++j) z.at(i, j) += layer.bias[j];

        LayerCache& lc = cache.layers[li];
        if (layer.bn) {
            const BatchNorm& bn = *layer.bn;
            const int d = z.cols;
            lc.xhat = Matrix(n, d);
            lc.inv_std.resize(d);
            if (mode == Mode::train) {
                std::vector<double> mean(d, 0.0), var(d, 0.0);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < d; ++j) mean[j] += z.at(i, j);
                for (int j = 0; j < d; ++j) mean[j] /= n;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < d; ++j) {
                        double c = z.at(i, j) - mean[j];
                        var[j] += c * c;
                    }
                for (int j = 0; j < d; ++j) var[j] /= n;
                for (int j = 0; j < d; ++j) lc.inv_std[j] = 1.0 / std::sqrt(var[j] + kBnEps);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < d; ++j)
                        lc.xhat.at(i, j) = (z.at(i, j) - mean[j]) * lc.inv_std[j];
                if (update_target) {
                    BatchNorm& live = *update_target->layers[li].bn;
                    for (int j = 0; j < d; ++j) {
                        live.running_mean[j] = bn.momentum * live.running_mean[j] +
                                               (1.0 - bn.momentum) * mean[j];
                        live.running_var[j] = bn.momentum * live.running_var[j] +
                                              (1.0 - bn.momentum) * var[j];
                    }
                }
            } else {
                for (int j = 0; j < d; ++j)
                    lc.inv_std[j] = 1.0 / std::sqrt(bn.running_var[j] + kBnEps);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < d; ++j)
                        lc.xhat.at(i, j) = (z.at(i, j) - bn.running_mean[j]) * lc.inv_std[j];
            }
            lc.preact = Matrix(n, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j)
                    lc.preact.at(i, j) = bn.scale[j] * lc.xhat.at(i, j) + bn.offset[j];
        } else {
            lc.preact = std::move(z);
        }

        Matrix out(n, lc.preact.cols);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < out.cols; ++j)
                out.at(i, j) = activate(layer.act, lc.preact.at(i, j));
        cache.act_out.push_back(std::move(out));
    }
    return cache;
}

}  // namespace

ForwardCache forward(Mlp& net, const Matrix& batch, Mode mode) {
    return run_forward(net, batch, mode, mode == Mode::train ? &net : nullptr);
}

Matrix eval_batch(const Mlp& net, const Matrix& batch) {
    return run_forward(net, batch, Mode::eval, nullptr).output();
}

std::vector<double> eval_single(const Mlp& net, const std::vector<double>& input) {
    Matrix out = eval_batch(net, row_matrix(input));
    return out.data;
}

BackwardResult backward(const Mlp& net, const ForwardCache& cache, const Matrix& upstream) {
    const size_t nl = net.layers.size();
    if (cache.act_out.size() != nl + 1 || cache.layers.size() != nl)
        throw StaleCache("backward: cache does not match network depth");
    if (!upstream.same_shape(cache.act_out.back()))
        throw StaleCache("backward: upstream gradient shape does not match cached output");
    for (size_t li = 0; li < nl; ++li) {
        if (cache.act_out[li].cols != net.layers[li].in_dim() ||
            cache.act_out[li + 1].cols != net.layers[li].out_dim())
            throw StaleCache("backward: cache does not match network shape");
    }

    const int n = upstream.rows;
    BackwardResult res;
    res.grads.layers.resize(nl);

    Matrix d = upstream;  // gradient wrt current layer's output
    for (size_t li = nl; li-- > 0;) {
        const Layer& layer = net.layers[li];
        const LayerCache& lc = cache.layers[li];
        const Matrix& x = cache.act_out[li];
        const int dout = layer.out_dim();

        // through the activation
        Matrix da(n, dout);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < dout; ++j)
                da.at(i, j) = d.at(i, j) * activate_grad(layer.act, lc.preact.at(i, j));

        LayerGrads& lg = res.grads.layers[li];
        Matrix dz;  // gradient wrt the linear output x.W^T + b
        if (layer.bn) {
            const BatchNorm& bn = *layer.bn;
            lg.bn_scale.assign(dout, 0.0);
            lg.bn_offset.assign(dout, 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < dout; ++j) {
                    lg.bn_scale[j] += da.at(i, j) * lc.xhat.at(i, j);
                    lg.bn_offset[j] += da.at(i, j);
                }
            dz = Matrix(n, dout);
            if (cache.mode == Mode::train) {
                // batch statistics depend on every row; fold those paths in
                std::vector<double> sum_dxhat(dout, 0.0), sum_dxhat_xhat(dout, 0.0);
                Matrix dxhat(n, dout);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < dout; ++j) {
                        double v = da.at(i, j) * bn.scale[j];
                        dxhat.at(i, j) = v;
                        sum_dxhat[j] += v;
                        sum_dxhat_xhat[j] += v * lc.xhat.at(i, j);
                    }
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < dout; ++j)
                        dz.at(i, j) = (lc.inv_std[j] / n) *
                                      (n * dxhat.at(i, j) - sum_dxhat[j] -
                                       lc.xhat.at(i, j) * sum_dxhat_xhat[j]);
            } else {
                // fixed affine map at decision time
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < dout; ++j)
                        dz.at(i, j) = da.at(i, j) * bn.scale[j] * lc.inv_std[j];
            }
        } else {
            dz = std::move(da);
        }

        lg.weight = matmul_at(dz, x);
        lg.bias.assign(dout, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < dout; ++j) lg.bias[j] += dz.at(i, j);

        d = matmul(dz, layer.weight);
    }
    res.input_grad = std::move(d);
    return res;
}

void sgd_step(Mlp& net, const Gradients& grads, double lr) {
    if (grads.layers.size() != net.layers.size())
        throw DimensionMismatch("sgd_step: gradient/network depth mismatch");
    for (size_t li = 0; li < net.layers.size(); ++li) {
        Layer& layer = net.layers[li];
        const LayerGrads& lg = grads.layers[li];
        if (!lg.weight.same_shape(layer.weight) || lg.bias.size() != layer.bias.size())
            throw DimensionMismatch("sgd_step: gradient/layer shape mismatch");
        for (size_t k = 0; k < layer.weight.data.size(); ++k)
            layer.weight.data[k] -= lr * lg.weight.data[k];
        for (size_t k = 0; k < layer.bias.size(); ++k) layer.bias[k] -= lr * lg.bias[k];
        if (layer.bn) {
            BatchNorm& bn = *layer.bn;
            if (lg.bn_scale.size() != bn.scale.size())
                throw DimensionMismatch("sgd_step: batch norm gradient shape mismatch");
            for (size_t k = 0; k < bn.scale.size(); ++k) {
                bn.scale[k] -= lr * lg.bn_scale[k];
                bn.offset[k] -= lr * lg.bn_offset[k];
            }
        }
    }
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
    if (target.layers.size() != online.layers.size())
        throw DimensionMismatch("soft_update: network depth mismatch");
    for (size_t li = 0; li < target.layers.size(); ++li) {
        Layer& t = target.layers[li];
        const Layer& o = online.layers[li];
        if (!t.weight.same_shape(o.weight) || t.bias.size() != o.bias.size() ||
            t.bn.has_value() != o.bn.has_value())
            throw DimensionMismatch("soft_update: layer shape mismatch");
        for (size_t k = 0; k < t.weight.data.size(); ++k)
            t.weight.data[k] = tau * o.weight.data[k] + (1.0 - tau) * t.weight.data[k];
        for (size_t k = 0; k < t.bias.size(); ++k)
            t.bias[k] = tau * o.bias[k] + (1.0 - tau) * t.bias[k];
        if (t.bn) {
            BatchNorm& tb = *t.bn;
            const BatchNorm& ob = *o.bn;
            for (size_t k = 0; k < tb.scale.size(); ++k) {
                tb.scale[k] = tau * ob.scale[k] + (1.0 - tau) * tb.scale[k];
                tb.offset[k] = tau * ob.offset[k] + (1.0 - tau) * tb.offset[k];
            }
            tb.running_mean = ob.running_mean;
            tb.running_var = ob.running_var;
        }
    }
}

std::vector<double> grad_inverse(const std::vector<double>& push,
                                 const std::vector<double>& action, double lo, double hi) {
    if (push.size() != action.size())
        throw DimensionMismatch("grad_inverse: push/action size mismatch");
    std::vector<double> out(push.size());
    const double width = hi - lo;
    for (size_t i = 0; i < push.size(); ++i) {
        double factor = push[i] > 0 ? (hi - action[i]) / width : (action[i] - lo) / width;
        out[i] = push[i] * factor;
    }
    return out;
}

namespace {

constexpr char kMagic[4] = {'M', 'L', 'P', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u8(std::ostream& out, std::uint8_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

std::uint8_t read_u8(std::istream& in) {
    std::uint8_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void read_doubles(std::istream& in, std::vector<double>& v, size_t count) {
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
}

}  // namespace

void save_mlp(const Mlp& net, std::ostream& out) {
    out.write(kMagic, sizeof kMagic);
    write_u32(out, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& layer : net.layers) {
        write_u32(out, static_cast<std::uint32_t>(layer.weight.rows));
        write_u32(out, static_cast<std::uint32_t>(layer.weight.cols));
        write_u8(out, static_cast<std::uint8_t>(layer.act));
        write_u8(out, layer.bn ? 1 : 0);
        write_doubles(out, layer.weight.data);
        write_doubles(out, layer.bias);
        if (layer.bn) {
            const BatchNorm& bn = *layer.bn;
            out.write(reinterpret_cast<const char*>(&bn.momentum), sizeof bn.momentum);
            write_doubles(out, bn.scale);
            write_doubles(out, bn.offset);
            write_doubles(out, bn.running_mean);
            write_doubles(out, bn.running_var);
        }
    }
    if (!out) throw std::runtime_error("save_mlp: write failed");
}

Mlp load_mlp(std::istream& in) {
    char magic[4];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("load_mlp: bad magic, not a network snapshot");
    const std::uint32_t nl = read_u32(in);
    if (nl == 0 || nl > 1000) throw std::runtime_error("load_mlp: implausible layer count");
    Mlp net;
    for (std::uint32_t li = 0; li < nl; ++li) {
        const std::uint32_t rows = read_u32(in);
        const std::uint32_t cols = read_u32(in);
        if (rows == 0 || cols == 0 || rows > 1000000 || cols > 1000000)
            throw std::runtime_error("load_mlp: implausible layer shape");
        Layer layer;
        layer.act = static_cast<Activation>(read_u8(in));
        if (layer.act > Activation::shifted_tanh)
            throw std::runtime_error("load_mlp: unknown activation code");
        const bool has_bn = read_u8(in) != 0;
        layer.weight = Matrix(static_cast<int>(rows), static_cast<int>(cols));
        read_doubles(in, layer.weight.data, rows * static_cast<size_t>(cols));
        read_doubles(in, layer.bias, rows);
        if (has_bn) {
            BatchNorm bn;
            in.read(reinterpret_cast<char*>(&bn.momentum), sizeof bn.momentum);
            read_doubles(in, bn.scale, rows);
            read_doubles(in, bn.offset, rows);
            read_doubles(in, bn.running_mean, rows);
            read_doubles(in, bn.running_var, rows);
            layer.bn = std::move(bn);
        }
        if (!in) throw std::runtime_error("load_mlp: truncated snapshot");
        net.layers.push_back(std::move(layer));
    }
    return net;
}

void save_mlp_file(const Mlp& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_mlp: cannot open " + path);
    save_mlp(net, out);
}

Mlp load_mlp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_mlp: cannot open " + path);
    return load_mlp(in);
}

}  // namespace dragsim
