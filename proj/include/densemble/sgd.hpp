#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "densemble/errors.hpp"
#include "densemble/net.hpp"

namespace densemble {

/// SGD with momentum, coupled L2 weight decay and a stepwise learning-rate
/// schedule. A schedule entry (epoch, multiplier) scales the base rate by
/// that multiplier from the given epoch onward; the most recently passed
/// entry wins (multipliers are absolute, not compounding).
struct SgdConfig {
    double learning_rate = 0.2;
    double momentum = 0.9;
    double weight_decay = 3e-4;
    std::vector<std::pair<int, double>> lr_schedule; // (epoch, multiplier), epochs strictly increasing

    bool operator==(const SgdConfig&) const = default;
};

inline void validate(const SgdConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("sgd: learning_rate must be positive");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) throw ConfigError("sgd: momentum must be in [0,1)");
    if (cfg.weight_decay < 0.0) throw ConfigError("sgd: weight_decay must be non-negative");
    int prev = -1;
    for (const auto& [epoch, mult] : cfg.lr_schedule) {
        if (epoch <= prev) throw ConfigError("sgd: lr_schedule epochs must be strictly increasing");
        if (!(mult > 0.0)) throw ConfigError("sgd: lr_schedule multipliers must be positive");
        prev = epoch;
    }
}

inline double lr_at(const SgdConfig& cfg, int epoch) {
    double mult = 1.0;
    for (const auto& [e, m] : cfg.lr_schedule) {
        if (epoch >= e) mult = m;
    }
    return cfg.learning_rate * mult;
}

struct SgdState {
    NetGrads velocity;
};

inline SgdState make_sgd_state(const DenseNet& net) { return SgdState{zero_grads_like(net)}; }

namespace detail {
inline void sgd_update_span(double* theta, double* vel, const double* grad, std::size_t n, double lr,
                            double momentum, double weight_decay, std::size_t layer, const char* kind) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(grad[i])) {
            throw NumericError("sgd_step: non-finite gradient in layer " + std::to_string(layer) + " " + kind +
                               " at index " + std::to_string(i));
        }
        vel[i] = momentum * vel[i] + grad[i] + weight_decay * theta[i];
        theta[i] -= lr * vel[i];
    }
}
} // namespace detail

// v <- momentum*v + grad + weight_decay*theta;  theta <- theta - lr(epoch)*v
inline void sgd_step(DenseNet& net, const NetGrads& grads, SgdState& state, const SgdConfig& cfg, int epoch) {
    if (grads.weights.size() != net.layer_count()) throw ShapeError("sgd_step: gradient layer count mismatch");
    const double lr = lr_at(cfg, epoch);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        if (!grads.weights[l].same_shape(net.weights[l]) || grads.biases[l].size() != net.biases[l].size()) {
            throw ShapeError("sgd_step: gradient shape mismatch at layer " + std::to_string(l));
        }
        detail::sgd_update_span(net.weights[l].data.data(), state.velocity.weights[l].data.data(),
                                grads.weights[l].data.data(), net.weights[l].data.size(), lr, cfg.momentum,
                                cfg.weight_decay, l, "weights");
        detail::sgd_update_span(net.biases[l].data(), state.velocity.biases[l].data(), grads.biases[l].data(),
                                net.biases[l].size(), lr, cfg.momentum, cfg.weight_decay, l, "biases");
    }
}

} // namespace densemble
