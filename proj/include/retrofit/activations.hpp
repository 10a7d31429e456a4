#pragma once

#include <string>

#include "retrofit/rng.hpp"
#include "retrofit/tensor.hpp"

namespace retrofit {

enum class ActivationKind { relu, jumprelu, jumprelu_random, swish, heaviside_smooth };

std::string to_string(ActivationKind kind);
ActivationKind activation_kind_from_string(const std::string& name);

// Configuration for one activation. kappa is the jump value: signals at or
// below it are suppressed, signals above pass unscaled. The randomized
// variant draws kappa uniformly from [kappa_lo, kappa_hi] once per forward
// call; beta is the sharpness of the swish / smooth-step variants.
struct ActivationSpec {
    ActivationKind kind = ActivationKind::relu;
    double kappa = 0.0;
    double kappa_lo = 0.0;
    double kappa_hi = 0.0;
    double beta = 1.0;

    static ActivationSpec relu() { return {}; }
    static ActivationSpec jumprelu(double kappa);
    // Range [0.6*b, b], the default split for the randomized variant.
    static ActivationSpec jumprelu_random_from_upper(double b);
    static ActivationSpec jumprelu_random(double lo, double hi);
    static ActivationSpec swish(double beta);

    // True for the relu family that retrofitting swaps out.
    bool retrofittable() const {
        return kind == ActivationKind::relu || kind == ActivationKind::jumprelu || kind == ActivationKind::jumprelu_random;
    }
    bool randomized() const { return kind == ActivationKind::jumprelu_random; }

    void validate() const;
};

namespace act {

// z * H(z - kappa): 0 where z <= kappa, z where z > kappa.
Tensor jumprelu(const Tensor& z, double kappa);
// Subgradient: upstream where z > kappa, 0 elsewhere; the jump itself carries
// no gradient.
Tensor jumprelu_backward(const Tensor& z, const Tensor& upstream, double kappa);

Tensor relu(const Tensor& z);
Tensor relu_backward(const Tensor& z, const Tensor& upstream);

// Draws kappa ~ Uniform[lo,hi] from rng, shared by every element of this
// call, and reports it through drawn_kappa so the backward pass can reuse it.
Tensor jumprelu_random(const Tensor& z, double lo, double hi, Rng& rng, double* drawn_kappa);

// z / (1 + exp(-2*beta*z))
Tensor swish(const Tensor& z, double beta);
Tensor swish_backward(const Tensor& z, const Tensor& upstream, double beta);

// 1 / (1 + exp(-2*beta*z)), the logistic approximation of the unit step.
Tensor heaviside_smooth(const Tensor& z, double beta);
Tensor heaviside_smooth_backward(const Tensor& z, const Tensor& upstream, double beta);

// Dispatch on spec.kind. For the randomized kind, forward requires rng and
// records the drawn kappa; backward applies the recorded value.
Tensor forward(const ActivationSpec& spec, const Tensor& z, Rng* rng, double* drawn_kappa);
Tensor backward(const ActivationSpec& spec, const Tensor& z, const Tensor& upstream, double drawn_kappa);

}  // namespace act

}  // namespace retrofit
