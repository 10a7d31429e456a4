#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retrofit/activations.hpp"
#include "retrofit/rng.hpp"
#include "retrofit/tensor.hpp"

namespace retrofit {

enum class LayerKind { dense, conv2d, maxpool2d, flatten, dropout, activation };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::flatten;

    // dense
    std::size_t in = 0, out = 0;
    // conv2d
    std::size_t kh = 0, kw = 0, cin = 0, cout = 0, pad = 0;
    // dropout
    double rate = 0.0;
    // activation
    ActivationSpec activation{};

    static LayerSpec dense(std::size_t in, std::size_t out);
    static LayerSpec conv2d(std::size_t kh, std::size_t kw, std::size_t cin, std::size_t cout, std::size_t pad = 0);
    static LayerSpec maxpool2d();
    static LayerSpec flatten();
    static LayerSpec dropout(double rate);
    static LayerSpec activation_layer(ActivationSpec spec);
};

enum class Mode { training, inference };

// Per-call scratch produced by forward and consumed by backward. Keeping it
// outside the network makes concurrent forward/backward over a frozen network
// safe: each call owns its trace and gradient buffers.
struct ForwardTrace {
    std::vector<Tensor> inputs;                       // input seen by each layer
    Tensor output;                                    // network output
    std::map<std::size_t, std::vector<std::size_t>> pool_argmax;  // by layer index
    std::map<std::size_t, std::vector<double>> dropout_mask;      // by layer index
    double drawn_kappa = 0.0;                         // randomized jump draw for this call
    bool kappa_drawn = false;
    Mode mode = Mode::inference;
};

// Parameter gradients keyed by parameter name, plus the input gradient.
struct Gradients {
    std::map<std::string, Tensor> params;
    Tensor input;
};

class Network {
public:
    Network() = default;
    explicit Network(std::vector<LayerSpec> layers);

    // Evaluates the layer stack. trace, when given, captures everything
    // backward needs. rng is required in training mode when dropout layers
    // are present and whenever a randomized activation is configured; one
    // jump value is drawn per forward call and shared by all randomized
    // activation layers of that call.
    Tensor forward(const Tensor& x, ForwardTrace* trace = nullptr, Mode mode = Mode::inference, Rng* rng = nullptr) const;

    // Reverse pass over a recorded trace. seed must match the output shape.
    // Returns the gradient with respect to the input; parameter gradients are
    // accumulated into grads->params when grads is non-null (skipping them
    // makes input-gradient-only passes, i.e. attacks, cheaper).
    Tensor backward(const ForwardTrace& trace, const Tensor& seed, Gradients* grads = nullptr) const;

    // Convenience pair used by the training loop and the autodiff tests:
    // forward, then backward, writing gradients into each parameter tensor's
    // grad slot and returning the input tensor's gradient.
    Tensor forward_backward(const Tensor& x, const Tensor& seed, Mode mode = Mode::inference, Rng* rng = nullptr);

    int predict(const Tensor& single_example) const;
    std::vector<int> predict_batch(const Tensor& batch, Rng* rng = nullptr) const;

    const std::vector<LayerSpec>& layers() const { return layers_; }
    std::vector<LayerSpec>& layers() { return layers_; }

    const std::map<std::string, Tensor>& parameters() const { return params_; }
    std::map<std::string, Tensor>& parameters() { return params_; }
    Tensor& parameter(const std::string& name);
    const Tensor& parameter(const std::string& name) const;
    std::size_t parameter_count() const;

    bool has_randomized_activation() const;

    // Indices of activation layers, in order; these are the layers the LID
    // detector instruments.
    std::vector<std::size_t> activation_layer_indices() const;

    // Expected input shape per example (excluding the batch dimension), when
    // one was declared by the builder.
    const std::vector<std::size_t>& input_shape() const { return input_shape_; }
    void set_input_shape(std::vector<std::size_t> shape) { input_shape_ = std::move(shape); }

    void init_parameters(Rng& rng);

private:
    void register_parameters();

    std::vector<LayerSpec> layers_;
    std::map<std::string, Tensor> params_;
    std::vector<std::size_t> input_shape_;
};

// Replaces every retrofittable (relu-family) activation with spec, leaving
// parameters untouched. The original network remains valid; the result is an
// independent value.
Network retrofit(const Network& net, const ActivationSpec& spec);

// conv 6@5x5 -> pool -> conv 16@5x5 -> pool -> dense 120 -> dropout 0.5 ->
// dense <classes>, relu activations throughout.
Network build_lenetlike(const std::vector<std::size_t>& input_shape = {28, 28, 1}, std::size_t classes = 10,
                        std::uint64_t init_seed = 1);

// Small CIFAR10-shaped companion: conv 16@3x3/p1 -> pool -> conv 32@3x3/p1 ->
// pool -> dense 128 -> dropout 0.5 -> dense <classes>.
Network build_alexmini(const std::vector<std::size_t>& input_shape = {32, 32, 3}, std::size_t classes = 10,
                       std::uint64_t init_seed = 1);

// Fully connected stack with relu between hidden layers.
Network build_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t classes,
                  std::uint64_t init_seed = 1);

}  // namespace retrofit
