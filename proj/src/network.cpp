#include "retrofit/network.hpp"

#include <cmath>

#include "retrofit/error.hpp"
#include "retrofit/ops.hpp"

namespace retrofit {

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::maxpool2d: return "maxpool2d";
        case LayerKind::flatten: return "flatten";
        case LayerKind::dropout: return "dropout";
        case LayerKind::activation: return "activation";
    }
    return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
    if (name == "dense") return LayerKind::dense;
    if (name == "conv2d") return LayerKind::conv2d;
    if (name == "maxpool2d") return LayerKind::maxpool2d;
    if (name == "flatten") return LayerKind::flatten;
    if (name == "dropout") return LayerKind::dropout;
    if (name == "activation") return LayerKind::activation;
    throw ConfigError("unknown layer kind: " + name);
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.in = in;
    s.out = out;
    return s;
}

LayerSpec LayerSpec::conv2d(std::size_t kh, std::size_t kw, std::size_t cin, std::size_t cout, std::size_t pad) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.kh = kh;
    s.kw = kw;
    s.cin = cin;
    s.cout = cout;
    s.pad = pad;
    return s;
}

LayerSpec LayerSpec::maxpool2d() {
    LayerSpec s;
    s.kind = LayerKind::maxpool2d;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
}

LayerSpec LayerSpec::dropout(double rate) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must lie in [0,1)");
    LayerSpec s;
    s.kind = LayerKind::dropout;
    s.rate = rate;
    return s;
}

LayerSpec LayerSpec::activation_layer(ActivationSpec spec) {
    spec.validate();
    LayerSpec s;
    s.kind = LayerKind::activation;
    s.activation = spec;
    return s;
}

Network::Network(std::vector<LayerSpec> layers) : layers_(std::move(layers)) { register_parameters(); }

void Network::register_parameters() {
    params_.clear();
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const LayerSpec& l = layers_[i];
        const std::string prefix = "layer" + std::to_string(i);
        if (l.kind == LayerKind::dense) {
            params_[prefix + ".weight"] = Tensor({l.in, l.out});
            params_[prefix + ".bias"] = Tensor({l.out});
        } else if (l.kind == LayerKind::conv2d) {
            params_[prefix + ".weight"] = Tensor({l.kh, l.kw, l.cin, l.cout});
            params_[prefix + ".bias"] = Tensor({l.cout});
        }
    }
}

Tensor& Network::parameter(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("no parameter named " + name);
    return it->second;
}

const Tensor& Network::parameter(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("no parameter named " + name);
    return it->second;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : params_) n += t.size();
    return n;
}

bool Network::has_randomized_activation() const {
    for (const LayerSpec& l : layers_) {
        if (l.kind == LayerKind::activation && l.activation.randomized()) return true;
    }
    return false;
}

std::vector<std::size_t> Network::activation_layer_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].kind == LayerKind::activation) out.push_back(i);
    }
    return out;
}

void Network::init_parameters(Rng& rng) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const LayerSpec& l = layers_[i];
        const std::string prefix = "layer" + std::to_string(i);
        if (l.kind == LayerKind::dense) {
            // He initialization: fan-in scaled normal.
            const double stddev = std::sqrt(2.0 / static_cast<double>(l.in));
            Tensor& w = params_[prefix + ".weight"];
            for (std::size_t j = 0; j < w.size(); ++j) w[j] = rng.normal(0.0, stddev);
        } else if (l.kind == LayerKind::conv2d) {
            const double fan_in = static_cast<double>(l.kh * l.kw * l.cin);
            const double stddev = std::sqrt(2.0 / fan_in);
            Tensor& w = params_[prefix + ".weight"];
            for (std::size_t j = 0; j < w.size(); ++j) w[j] = rng.normal(0.0, stddev);
        }
    }
}

Tensor Network::forward(const Tensor& x, ForwardTrace* trace, Mode mode, Rng* rng) const {
    if (!input_shape_.empty()) {
        bool ok = x.rank() == input_shape_.size() + 1;
        for (std::size_t i = 0; ok && i < input_shape_.size(); ++i) ok = x.dim(i + 1) == input_shape_[i];
        if (!ok) {
            Tensor expected(input_shape_);
            throw ShapeError("network input " + x.shape_string() + " does not match declared per-example shape " +
                             expected.shape_string());
        }
    }
    if (trace) {
        trace->inputs.clear();
        trace->pool_argmax.clear();
        trace->dropout_mask.clear();
        trace->kappa_drawn = false;
        trace->mode = mode;
    }
    // One jump draw per forward call, shared across randomized layers.
    double call_kappa = 0.0;
    bool call_kappa_set = false;

    Tensor cur = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const LayerSpec& l = layers_[i];
        if (trace) trace->inputs.push_back(cur);
        try {
            switch (l.kind) {
                case LayerKind::dense: {
                    const Tensor& w = params_.at("layer" + std::to_string(i) + ".weight");
                    const Tensor& b = params_.at("layer" + std::to_string(i) + ".bias");
                    cur = ops::add_bias(ops::matmul(cur, w), b);
                    break;
                }
                case LayerKind::conv2d: {
                    const Tensor& w = params_.at("layer" + std::to_string(i) + ".weight");
                    const Tensor& b = params_.at("layer" + std::to_string(i) + ".bias");
                    cur = ops::conv2d(cur, w, b, l.pad);
                    break;
                }
                case LayerKind::maxpool2d: {
                    std::vector<std::size_t> argmax;
                    cur = ops::maxpool2d(cur, trace ? &argmax : nullptr);
                    if (trace) trace->pool_argmax[i] = std::move(argmax);
                    break;
                }
                case LayerKind::flatten: {
                    cur = ops::flatten(cur);
                    break;
                }
                case LayerKind::dropout: {
                    if (mode == Mode::training) {
                        if (!rng) throw ConfigError("dropout in training mode requires a seeded stream");
                        // Inverted dropout: scale kept units so inference is identity.
                        const double keep = 1.0 - l.rate;
                        std::vector<double> mask(cur.size(), 0.0);
                        for (std::size_t j = 0; j < mask.size(); ++j) {
                            mask[j] = (rng->uniform01() < keep) ? 1.0 / keep : 0.0;
                        }
                        double* pc = cur.data();
                        for (std::size_t j = 0; j < cur.size(); ++j) pc[j] *= mask[j];
                        if (trace) trace->dropout_mask[i] = std::move(mask);
                    }
                    break;
                }
                case LayerKind::activation: {
                    if (l.activation.randomized() && !call_kappa_set) {
                        if (!rng) throw ConfigError("randomized jumprelu requires a seeded stream");
                        call_kappa = (l.activation.kappa_lo == l.activation.kappa_hi)
                                         ? l.activation.kappa_lo
                                         : rng->uniform(l.activation.kappa_lo, l.activation.kappa_hi);
                        call_kappa_set = true;
                        if (trace) {
                            trace->drawn_kappa = call_kappa;
                            trace->kappa_drawn = true;
                        }
                    }
                    if (l.activation.randomized()) {
                        cur = act::jumprelu(cur, call_kappa);
                    } else {
                        cur = act::forward(l.activation, cur, rng, nullptr);
                    }
                    break;
                }
            }
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i) + " (" + to_string(l.kind) + "): " + e.what());
        }
    }
    if (trace) trace->output = cur;
    return cur;
}

Tensor Network::backward(const ForwardTrace& trace, const Tensor& seed, Gradients* grads) const {
    if (trace.inputs.size() != layers_.size()) {
        throw ShapeError("backward called without a matching forward trace");
    }
    if (!seed.same_shape(trace.output)) {
        throw ShapeError("loss seed " + seed.shape_string() + " does not match output " + trace.output.shape_string());
    }
    Tensor up = seed;
    for (std::size_t ri = layers_.size(); ri-- > 0;) {
        const LayerSpec& l = layers_[ri];
        const Tensor& in = trace.inputs[ri];
        const std::string prefix = "layer" + std::to_string(ri);
        switch (l.kind) {
            case LayerKind::dense: {
                const Tensor& w = params_.at(prefix + ".weight");
                Tensor gb;
                Tensor gx_after_bias;
                ops::add_bias_backward(up, l.out, &gx_after_bias, grads ? &gb : nullptr);
                Tensor ga;
                Tensor gw;
                ops::matmul_backward(in, w, gx_after_bias, &ga, grads ? &gw : nullptr);
                if (grads) {
                    grads->params[prefix + ".weight"] = std::move(gw);
                    grads->params[prefix + ".bias"] = std::move(gb);
                }
                up = std::move(ga);
                break;
            }
            case LayerKind::conv2d: {
                const Tensor& w = params_.at(prefix + ".weight");
                Tensor gx, gw, gb;
                ops::conv2d_backward(in, w, l.pad, up, &gx, grads ? &gw : nullptr, grads ? &gb : nullptr);
                if (grads) {
                    grads->params[prefix + ".weight"] = std::move(gw);
                    grads->params[prefix + ".bias"] = std::move(gb);
                }
                up = std::move(gx);
                break;
            }
            case LayerKind::maxpool2d: {
                auto it = trace.pool_argmax.find(ri);
                if (it == trace.pool_argmax.end()) throw ShapeError("maxpool backward: missing argmax cache");
                Tensor gx;
                ops::maxpool2d_backward(in, it->second, up, &gx);
                up = std::move(gx);
                break;
            }
            case LayerKind::flatten: {
                up = up.reshaped(in.shape());
                break;
            }
            case LayerKind::dropout: {
                if (trace.mode == Mode::training) {
                    auto it = trace.dropout_mask.find(ri);
                    if (it != trace.dropout_mask.end()) {
                        double* pu = up.data();
                        const std::vector<double>& mask = it->second;
                        for (std::size_t j = 0; j < up.size(); ++j) pu[j] *= mask[j];
                    }
                }
                break;
            }
            case LayerKind::activation: {
                up = act::backward(l.activation, in, up, trace.kappa_drawn ? trace.drawn_kappa : 0.0);
                break;
            }
        }
    }
    if (grads) grads->input = up;
    return up;
}

Tensor Network::forward_backward(const Tensor& x, const Tensor& seed, Mode mode, Rng* rng) {
    ForwardTrace trace;
    forward(x, &trace, mode, rng);
    Gradients grads;
    Tensor gin = backward(trace, seed, &grads);
    for (auto& [name, g] : grads.params) {
        Tensor& p = params_.at(name);
        p.set_grad(std::move(g.values()));
    }
    return gin;
}

int Network::predict(const Tensor& single_example) const {
    Tensor batched = single_example;
    if (!input_shape_.empty() && single_example.rank() == input_shape_.size()) {
        std::vector<std::size_t> shape = single_example.shape();
        shape.insert(shape.begin(), 1);
        batched = single_example.reshaped(shape);
    }
    Tensor logits = forward(batched);
    return ops::argmax_rows(logits)[0];
}

std::vector<int> Network::predict_batch(const Tensor& batch, Rng* rng) const {
    return ops::argmax_rows(forward(batch, nullptr, Mode::inference, rng));
}

Network retrofit(const Network& net, const ActivationSpec& spec) {
    spec.validate();
    Network out = net;
    for (LayerSpec& l : out.layers()) {
        if (l.kind == LayerKind::activation && l.activation.retrofittable()) {
            l.activation = spec;
        }
    }
    return out;
}

Network build_lenetlike(const std::vector<std::size_t>& input_shape, std::size_t classes, std::uint64_t init_seed) {
    if (input_shape.size() != 3) throw ConfigError("lenetlike expects an [h,w,c] input shape");
    const std::size_t h = input_shape[0], w = input_shape[1], c = input_shape[2];
    const std::size_t h2 = (h - 4) / 2, w2 = (w - 4) / 2;          // after conv 5x5 valid + pool
    const std::size_t h3 = (h2 - 4) / 2, w3 = (w2 - 4) / 2;        // after second conv + pool
    std::vector<LayerSpec> layers = {
        LayerSpec::conv2d(5, 5, c, 6),
        LayerSpec::activation_layer(ActivationSpec::relu()),
        LayerSpec::maxpool2d(),
        LayerSpec::conv2d(5, 5, 6, 16),
        LayerSpec::activation_layer(ActivationSpec::relu()),
        LayerSpec::maxpool2d(),
        LayerSpec::flatten(),
        LayerSpec::dense(h3 * w3 * 16, 120),
        LayerSpec::activation_layer(ActivationSpec::relu()),
        LayerSpec::dropout(0.5),
        LayerSpec::dense(120, classes),
    };
    Network net(std::move(layers));
    net.set_input_shape(input_shape);
    Rng rng(init_seed);
    net.init_parameters(rng);
    return net;
}

Network build_alexmini(const std::vector<std::size_t>& input_shape, std::size_t classes, std::uint64_t init_seed) {
    if (input_shape.size() != 3) throw ConfigError("alexmini expects an [h,w,c] input shape");
    const std::size_t h = input_shape[0], w = input_shape[1], c = input_shape[2];
    const std::size_t h2 = h / 2, w2 = w / 2;
    const std::size_t h3 = h2 / 2, w3 = w2 / 2;
    std::vector<LayerSpec> layers = {
        LayerSpec::conv2d(3, 3, c, 16, 1),
        LayerSpec::activation_layer(ActivationSpec::relu()),
        LayerSpec::maxpool2d(),
        LayerSpec::conv2d(3, 3, 16, 32, 1),
        LayerSpec::activation_layer(ActivationSpec::relu()),
        LayerSpec::maxpool2d(),
        LayerSpec::flatten(),
        LayerSpec::dense(h3 * w3 * 32, 128),
        LayerSpec::activation_layer(ActivationSpec::relu()),
        LayerSpec::dropout(0.5),
        LayerSpec::dense(128, classes),
    };
    Network net(std::move(layers));
    net.set_input_shape(input_shape);
    Rng rng(init_seed);
    net.init_parameters(rng);
    return net;
}

Network build_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t classes,
                  std::uint64_t init_seed) {
    std::vector<LayerSpec> layers;
    layers.push_back(LayerSpec::flatten());
    std::size_t prev = input_dim;
    for (std::size_t hdim : hidden) {
        layers.push_back(LayerSpec::dense(prev, hdim));
        layers.push_back(LayerSpec::activation_layer(ActivationSpec::relu()));
        prev = hdim;
    }
    layers.push_back(LayerSpec::dense(prev, classes));
    Network net(std::move(layers));
    Rng rng(init_seed);
    net.init_parameters(rng);
    return net;
}

}  // namespace retrofit
