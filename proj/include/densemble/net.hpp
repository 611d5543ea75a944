#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "densemble/errors.hpp"
#include "densemble/matrix.hpp"
#include "densemble/rng.hpp"

namespace densemble {

enum class Activation { ReLU };

/// Fully-connected classifier mapping R^d to the C-class probability simplex:
/// ReLU hidden layers followed by a softmax output.
struct DenseNet {
    std::vector<std::size_t> layer_dims;     // input, hidden..., class count
    std::vector<Matrix> weights;             // weights[l] is dims[l+1] x dims[l]
    std::vector<std::vector<double>> biases; // biases[l] has dims[l+1] entries
    Activation activation = Activation::ReLU;

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t class_count() const { return layer_dims.back(); }
    std::size_t layer_count() const { return weights.size(); }
};

// Gradient (or velocity) container shaped like a DenseNet's parameters.
struct NetGrads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

inline NetGrads zero_grads_like(const DenseNet& net) {
    NetGrads g;
    g.weights.reserve(net.layer_count());
    g.biases.reserve(net.layer_count());
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        g.weights.emplace_back(net.weights[l].rows, net.weights[l].cols);
        g.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    return g;
}

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] for weights and biases.
inline DenseNet make_dense_net(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
    if (layer_dims.size() < 2) throw ConfigError("make_dense_net: need at least input and output dims");
    for (std::size_t d : layer_dims) {
        if (d == 0) throw ConfigError("make_dense_net: zero layer dimension");
    }
    DenseNet net;
    net.layer_dims = layer_dims;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const std::size_t fan_in = layer_dims[l];
        const std::size_t fan_out = layer_dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Matrix w(fan_out, fan_in);
        for (double& x : w.data) x = rng.uniform(-bound, bound);
        std::vector<double> b(fan_out);
        for (double& x : b) x = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

// Row-wise softmax with max-subtraction for stability.
inline void softmax_rows_inplace(Matrix& logits) {
    for (std::size_t i = 0; i < logits.rows; ++i) {
        double* r = logits.row(i);
        double mx = r[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, r[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            r[j] = std::exp(r[j] - mx);
            sum += r[j];
        }
        for (std::size_t j = 0; j < logits.cols; ++j) r[j] /= sum;
    }
}

// Activations recorded during a forward pass, as needed by backward().
// acts[0] is the input batch, acts[l] the post-ReLU output of hidden layer l;
// probs is the softmax output.
struct ForwardCache {
    std::vector<Matrix> acts;
    Matrix probs;
};

inline ForwardCache forward_cached(const DenseNet& net, const Matrix& batch) {
    if (batch.cols != net.input_dim()) {
        throw ShapeError("forward: batch has " + std::to_string(batch.cols) + " features, net expects " +
                         std::to_string(net.input_dim()));
    }
    ForwardCache cache;
    cache.acts.reserve(net.layer_count());
    cache.acts.push_back(batch);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const Matrix& x = cache.acts.back();
        Matrix z = multiply_transposed(x, net.weights[l]);
        const std::vector<double>& b = net.biases[l];
        for (std::size_t i = 0; i < z.rows; ++i) {
            double* zi = z.row(i);
            for (std::size_t j = 0; j < z.cols; ++j) zi[j] += b[j];
        }
        if (l + 1 < net.layer_count()) {
            for (double& v : z.data) v = v > 0.0 ? v : 0.0; // ReLU
            cache.acts.push_back(std::move(z));
        } else {
            softmax_rows_inplace(z);
            cache.probs = std::move(z);
        }
    }
    return cache;
}

/// Class probabilities for a batch; each output row lies on the simplex.
inline Matrix forward(const DenseNet& net, const Matrix& batch) {
    return forward_cached(net, batch).probs;
}

/// Exact chain-rule gradients of a scalar loss given its gradient with
/// respect to the softmax probabilities. The softmax Jacobian is applied
/// first, then the gradient is propagated through the linear/ReLU stack.
inline NetGrads backward(const DenseNet& net, const ForwardCache& cache, const Matrix& grad_probs) {
    if (!grad_probs.same_shape(cache.probs)) {
        throw ShapeError("backward: upstream gradient shape does not match forward output");
    }
    NetGrads grads = zero_grads_like(net);

    // dL/dlogit_j = p_j * (g_j - sum_k g_k p_k)
    Matrix delta(grad_probs.rows, grad_probs.cols);
    for (std::size_t i = 0; i < grad_probs.rows; ++i) {
        const double* p = cache.probs.row(i);
        const double* g = grad_probs.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < grad_probs.cols; ++j) dot += g[j] * p[j];
        double* d = delta.row(i);
        for (std::size_t j = 0; j < grad_probs.cols; ++j) d[j] = p[j] * (g[j] - dot);
    }

    for (std::size_t l = net.layer_count(); l-- > 0;) {
        const Matrix& x = cache.acts[l];
        Matrix& dw = grads.weights[l];
        std::vector<double>& db = grads.biases[l];
        for (std::size_t i = 0; i < delta.rows; ++i) {
            const double* di = delta.row(i);
            const double* xi = x.row(i);
            for (std::size_t o = 0; o < dw.rows; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                double* dwo = dw.row(o);
                for (std::size_t k = 0; k < dw.cols; ++k) dwo[k] += d * xi[k];
                db[o] += d;
            }
        }
        if (l == 0) break;
        // propagate to the previous layer: dx = delta * W, masked by ReLU
        Matrix dx(delta.rows, net.weights[l].cols);
        for (std::size_t i = 0; i < delta.rows; ++i) {
            const double* di = delta.row(i);
            double* dxi = dx.row(i);
            for (std::size_t o = 0; o < net.weights[l].rows; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                const double* wo = net.weights[l].row(o);
                for (std::size_t k = 0; k < net.weights[l].cols; ++k) dxi[k] += d * wo[k];
            }
            const double* act = x.row(i);
            for (std::size_t k = 0; k < dx.cols; ++k) {
                if (act[k] <= 0.0) dxi[k] = 0.0;
            }
        }
        delta = std::move(dx);
    }
    return grads;
}

inline NetGrads backward(const DenseNet& net, const Matrix& batch, const Matrix& grad_probs) {
    return backward(net, forward_cached(net, batch), grad_probs);
}

} // namespace densemble
