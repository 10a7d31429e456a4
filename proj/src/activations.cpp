#include "retrofit/activations.hpp"

#include <cmath>

#include "retrofit/error.hpp"

namespace retrofit {

std::string to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::jumprelu: return "jumprelu";
        case ActivationKind::jumprelu_random: return "jumprelu-random";
        case ActivationKind::swish: return "swish";
        case ActivationKind::heaviside_smooth: return "heaviside-smooth";
    }
    return "unknown";
}

ActivationKind activation_kind_from_string(const std::string& name) {
    if (name == "relu") return ActivationKind::relu;
    if (name == "jumprelu") return ActivationKind::jumprelu;
    if (name == "jumprelu-random") return ActivationKind::jumprelu_random;
    if (name == "swish") return ActivationKind::swish;
    if (name == "heaviside-smooth") return ActivationKind::heaviside_smooth;
    throw ConfigError("unknown activation kind: " + name);
}

ActivationSpec ActivationSpec::jumprelu(double kappa) {
    ActivationSpec s;
    s.kind = ActivationKind::jumprelu;
    s.kappa = kappa;
    s.validate();
    return s;
}

ActivationSpec ActivationSpec::jumprelu_random_from_upper(double b) { return jumprelu_random(0.6 * b, b); }

ActivationSpec ActivationSpec::jumprelu_random(double lo, double hi) {
    ActivationSpec s;
    s.kind = ActivationKind::jumprelu_random;
    s.kappa_lo = lo;
    s.kappa_hi = hi;
    s.validate();
    return s;
}

ActivationSpec ActivationSpec::swish(double beta) {
    ActivationSpec s;
    s.kind = ActivationKind::swish;
    s.beta = beta;
    s.validate();
    return s;
}

void ActivationSpec::validate() const {
    if (kind == ActivationKind::jumprelu && kappa < 0.0) throw ConfigError("jump value must be nonnegative");
    if (kind == ActivationKind::jumprelu_random) {
        if (kappa_lo < 0.0 || kappa_hi < kappa_lo) {
            throw ConfigError("jump range requires 0 <= lo <= hi");
        }
    }
    if ((kind == ActivationKind::swish || kind == ActivationKind::heaviside_smooth) && beta <= 0.0) {
        throw ConfigError("beta must be positive");
    }
}

namespace act {

Tensor jumprelu(const Tensor& z, double kappa) {
    if (kappa < 0.0) throw ConfigError("jump value must be nonnegative");
    Tensor out = Tensor::zeros_like(z);
    const double* pz = z.data();
    double* po = out.data();
    for (std::size_t i = 0; i < z.size(); ++i) po[i] = (pz[i] > kappa) ? pz[i] : 0.0;
    return out;
}

Tensor jumprelu_backward(const Tensor& z, const Tensor& upstream, double kappa) {
    if (!z.same_shape(upstream)) throw ShapeError("jumprelu backward: shape mismatch");
    Tensor out = Tensor::zeros_like(z);
    const double* pz = z.data();
    const double* pu = upstream.data();
    double* po = out.data();
    for (std::size_t i = 0; i < z.size(); ++i) po[i] = (pz[i] > kappa) ? pu[i] : 0.0;
    return out;
}

Tensor relu(const Tensor& z) { return jumprelu(z, 0.0); }

Tensor relu_backward(const Tensor& z, const Tensor& upstream) { return jumprelu_backward(z, upstream, 0.0); }

Tensor jumprelu_random(const Tensor& z, double lo, double hi, Rng& rng, double* drawn_kappa) {
    if (lo < 0.0 || hi < lo) throw ConfigError("jump range requires 0 <= lo <= hi");
    const double kappa = (lo == hi) ? lo : rng.uniform(lo, hi);
    if (drawn_kappa) *drawn_kappa = kappa;
    return jumprelu(z, kappa);
}

Tensor swish(const Tensor& z, double beta) {
    if (beta <= 0.0) throw ConfigError("beta must be positive");
    Tensor out = Tensor::zeros_like(z);
    const double* pz = z.data();
    double* po = out.data();
    for (std::size_t i = 0; i < z.size(); ++i) po[i] = pz[i] / (1.0 + std::exp(-2.0 * beta * pz[i]));
    return out;
}

Tensor swish_backward(const Tensor& z, const Tensor& upstream, double beta) {
    if (!z.same_shape(upstream)) throw ShapeError("swish backward: shape mismatch");
    Tensor out = Tensor::zeros_like(z);
    const double* pz = z.data();
    const double* pu = upstream.data();
    double* po = out.data();
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-2.0 * beta * pz[i]));
        po[i] = pu[i] * (s + 2.0 * beta * pz[i] * s * (1.0 - s));
    }
    return out;
}

Tensor heaviside_smooth(const Tensor& z, double beta) {
    if (beta <= 0.0) throw ConfigError("beta must be positive");
    Tensor out = Tensor::zeros_like(z);
    const double* pz = z.data();
    double* po = out.data();
    for (std::size_t i = 0; i < z.size(); ++i) po[i] = 1.0 / (1.0 + std::exp(-2.0 * beta * pz[i]));
    return out;
}

Tensor heaviside_smooth_backward(const Tensor& z, const Tensor& upstream, double beta) {
    if (!z.same_shape(upstream)) throw ShapeError("heaviside backward: shape mismatch");
    Tensor out = Tensor::zeros_like(z);
    const double* pz = z.data();
    const double* pu = upstream.data();
    double* po = out.data();
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-2.0 * beta * pz[i]));
        po[i] = pu[i] * 2.0 * beta * s * (1.0 - s);
    }
    return out;
}

Tensor forward(const ActivationSpec& spec, const Tensor& z, Rng* rng, double* drawn_kappa) {
    switch (spec.kind) {
        case ActivationKind::relu:
            if (drawn_kappa) *drawn_kappa = 0.0;
            return relu(z);
        case ActivationKind::jumprelu:
            if (drawn_kappa) *drawn_kappa = spec.kappa;
            return jumprelu(z, spec.kappa);
        case ActivationKind::jumprelu_random: {
            if (!rng) throw ConfigError("randomized jumprelu requires a seeded stream");
            return jumprelu_random(z, spec.kappa_lo, spec.kappa_hi, *rng, drawn_kappa);
        }
        case ActivationKind::swish:
            if (drawn_kappa) *drawn_kappa = 0.0;
            return swish(z, spec.beta);
        case ActivationKind::heaviside_smooth:
            if (drawn_kappa) *drawn_kappa = 0.0;
            return heaviside_smooth(z, spec.beta);
    }
    throw ConfigError("unhandled activation kind");
}

Tensor backward(const ActivationSpec& spec, const Tensor& z, const Tensor& upstream, double drawn_kappa) {
    switch (spec.kind) {
        case ActivationKind::relu: return relu_backward(z, upstream);
        case ActivationKind::jumprelu: return jumprelu_backward(z, upstream, spec.kappa);
        case ActivationKind::jumprelu_random: return jumprelu_backward(z, upstream, drawn_kappa);
        case ActivationKind::swish: return swish_backward(z, upstream, spec.beta);
        case ActivationKind::heaviside_smooth: return heaviside_smooth_backward(z, upstream, spec.beta);
    }
    throw ConfigError("unhandled activation kind");
}

}  // namespace act

}  // namespace retrofit
