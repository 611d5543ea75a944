#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "densemble/errors.hpp"
#include "densemble/losses.hpp"
#include "densemble/matrix.hpp"
#include "densemble/net.hpp"
#include "densemble/rng.hpp"

namespace densemble {

/// M independently initialized networks sharing one architecture, combined
/// at prediction time by uniform voting over their softmax outputs.
struct Ensemble {
    std::vector<DenseNet> members;

    std::size_t size() const { return members.size(); }
    std::size_t class_count() const { return members.front().class_count(); }
};

inline Ensemble make_ensemble(std::size_t m, const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
    if (m == 0) throw ConfigError("make_ensemble: M must be >= 1");
    Ensemble ens;
    ens.members.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        ens.members.push_back(make_dense_net(layer_dims, derive_seed(seed, streams::kMemberInit, i)));
    }
    return ens;
}

// One forward pass of every member on a shared batch.
struct EnsembleForward {
    std::vector<Matrix> member_probs;
    Matrix mean_probs;
};

inline EnsembleForward ensemble_forward(const Ensemble& ens, const Matrix& batch) {
    if (ens.members.empty()) throw ConfigError("ensemble: no members");
    EnsembleForward fw;
    fw.member_probs.reserve(ens.size());
    for (const DenseNet& net : ens.members) fw.member_probs.push_back(forward(net, batch));
    fw.mean_probs = Matrix(batch.rows, ens.class_count());
    const double inv_m = 1.0 / static_cast<double>(ens.size());
    for (const Matrix& p : fw.member_probs) {
        for (std::size_t i = 0; i < p.data.size(); ++i) fw.mean_probs.data[i] += p.data[i];
    }
    for (double& v : fw.mean_probs.data) v *= inv_m;
    return fw;
}

/// Uniform-vote prediction: the arithmetic mean of the members' probabilities.
inline Matrix vote(const Ensemble& ens, const Matrix& batch) { return ensemble_forward(ens, batch).mean_probs; }

/// Per-sample confidences and the uncertainty decomposition for one batch.
/// total = entropy of the vote, data = mean member entropy, model = total - data
/// (the mutual information between the prediction and the member identity).
/// l_con is filled only when labels were supplied.
struct ConfidenceReport {
    Matrix mean_probs;
    std::vector<double> l_con;
    std::vector<double> m_con;
    std::vector<double> total_unc;
    std::vector<double> data_unc;
    std::vector<double> model_unc;
};

inline ConfidenceReport build_report(const EnsembleForward& fw, const std::vector<int>* labels,
                                     double clamp_eps = kProbClampEps) {
    const std::size_t n = fw.mean_probs.rows;
    const std::size_t c = fw.mean_probs.cols;
    ConfidenceReport rep;
    rep.mean_probs = fw.mean_probs;
    rep.m_con.resize(n);
    rep.total_unc.resize(n);
    rep.data_unc.resize(n);
    rep.model_unc.resize(n);
    if (labels) {
        check_labels(*labels, n, c);
        rep.l_con.resize(n);
    }
    const double inv_m = 1.0 / static_cast<double>(fw.member_probs.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double* mean = rep.mean_probs.row(i);
        double mx = mean[0];
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, mean[j]);
        rep.m_con[i] = mx;
        if (labels) rep.l_con[i] = mean[static_cast<std::size_t>((*labels)[i])];
        rep.total_unc[i] = entropy(mean, c, clamp_eps);
        double data = 0.0;
        for (const Matrix& p : fw.member_probs) data += entropy(p.row(i), c, clamp_eps);
        rep.data_unc[i] = data * inv_m;
        rep.model_unc[i] = rep.total_unc[i] - rep.data_unc[i];
    }
    return rep;
}

inline ConfidenceReport build_report(const Ensemble& ens, const Matrix& batch, const std::vector<int>* labels,
                                     double clamp_eps = kProbClampEps) {
    return build_report(ensemble_forward(ens, batch), labels, clamp_eps);
}

/// Label confidence: the vote's probability at each sample's observed label.
inline std::vector<double> l_con(const Ensemble& ens, const Matrix& batch, const std::vector<int>& labels) {
    return build_report(ens, batch, &labels).l_con;
}

/// Maximum confidence: the largest entry of the vote distribution.
inline std::vector<double> m_con(const Ensemble& ens, const Matrix& batch) {
    return build_report(ens, batch, nullptr).m_con;
}

struct UncertaintyDecomposition {
    std::vector<double> total;
    std::vector<double> data;
    std::vector<double> model;
};

inline UncertaintyDecomposition uncertainty_decomposition(const Ensemble& ens, const Matrix& batch,
                                                          double clamp_eps = kProbClampEps) {
    ConfidenceReport rep = build_report(ens, batch, nullptr, clamp_eps);
    return {std::move(rep.total_unc), std::move(rep.data_unc), std::move(rep.model_unc)};
}

struct MiLossResult {
    double loss = 0.0; // mean model uncertainty over the batch
    NetGrads member_grads;
};

namespace detail {
// Exact derivative of the clamped entropy H(p) = -sum p*log(max(p,eps)):
// -log(max(p,eps)) - 1 above the clamp, -log(eps) below it.
inline double clamped_entropy_deriv(double p, double eps) {
    return p < eps ? -std::log(eps) : -(std::log(p) + 1.0);
}
} // namespace detail

/// Mean model uncertainty of the batch and its gradient for one designated
/// member. The other members' outputs are treated as constants, so each
/// member stays individually trained; only member_index receives a gradient.
inline MiLossResult mi_loss_and_grad(const Ensemble& ens, std::size_t member_index, const Matrix& batch,
                                     double clamp_eps = kProbClampEps) {
    if (member_index >= ens.size()) throw ConfigError("mi_loss_and_grad: member index out of range");
    std::vector<ForwardCache> caches;
    caches.reserve(ens.size());
    for (const DenseNet& net : ens.members) caches.push_back(forward_cached(net, batch));

    const std::size_t n = batch.rows;
    const std::size_t c = ens.class_count();
    const std::size_t m = ens.size();
    const double inv_m = 1.0 / static_cast<double>(m);
    const double inv_n = 1.0 / static_cast<double>(n);

    Matrix mean_probs(n, c);
    for (const ForwardCache& cache : caches) {
        for (std::size_t i = 0; i < mean_probs.data.size(); ++i) mean_probs.data[i] += cache.probs.data[i];
    }
    for (double& v : mean_probs.data) v *= inv_m;

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double data = 0.0;
        for (const ForwardCache& cache : caches) data += entropy(cache.probs.row(i), c, clamp_eps);
        loss += entropy(mean_probs.row(i), c, clamp_eps) - data * inv_m;
    }
    loss *= inv_n;

    // d(model_unc_i)/d(p^m_ic) = (1/M) * (H'(q_ic) - H'(p^m_ic)) with peers constant
    const Matrix& own = caches[member_index].probs;
    Matrix grad_probs(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        const double* q = mean_probs.row(i);
        const double* p = own.row(i);
        double* g = grad_probs.row(i);
        for (std::size_t j = 0; j < c; ++j) {
            g[j] = inv_n * inv_m *
                   (detail::clamped_entropy_deriv(q[j], clamp_eps) - detail::clamped_entropy_deriv(p[j], clamp_eps));
        }
    }
    MiLossResult result;
    result.loss = loss;
    result.member_grads = backward(ens.members[member_index], caches[member_index], grad_probs);
    return result;
}

} // namespace densemble
