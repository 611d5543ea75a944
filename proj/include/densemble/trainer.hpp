#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "densemble/dataset.hpp"
#include "densemble/ensemble.hpp"
#include "densemble/filter.hpp"
#include "densemble/losses.hpp"
#include "densemble/metrics.hpp"
#include "densemble/net.hpp"
#include "densemble/rng.hpp"
#include "densemble/sgd.hpp"

namespace densemble {

inline SgdConfig default_desk_sgd() {
    SgdConfig sgd;
    sgd.learning_rate = 0.2;
    sgd.momentum = 0.9;
    sgd.weight_decay = 3e-4;
    // x0.4 step decay at epochs 10/25/40 (multipliers are absolute)
    sgd.lr_schedule = {{10, 0.4}, {25, 0.16}, {40, 0.064}};
    return sgd;
}

struct TrainConfig {
    int warmup_epochs = 10;
    int max_epochs = 60;
    int batch_size = 64;
    std::vector<std::size_t> hidden_dims = {64};
    int ensemble_size = 5; // M
    SgdConfig sgd = default_desk_sgd();
    FilterConfig filter;
    std::uint64_t seed = 0;

    bool operator==(const TrainConfig&) const = default;
};

inline void validate(const TrainConfig& cfg) {
    if (cfg.warmup_epochs < 0) throw ConfigError("train: warmup_epochs must be non-negative");
    // warmup_epochs == max_epochs is allowed: the run then covers warm-up only
    if (cfg.warmup_epochs > cfg.max_epochs) throw ConfigError("train: warmup_epochs must be <= max_epochs");
    if (cfg.batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
    if (cfg.ensemble_size < 1) throw ConfigError("train: M must be >= 1");
    validate(cfg.sgd);
    validate(cfg.filter);
}

/// Per-batch loss summary under the switched objective: the cross-entropy
/// term over kept samples, the model-uncertainty term over filtered ones.
struct LossBreakdown {
    double ce_term = 0.0; // mean over members of sum_clean CE / batch_size
    double mi_term = 0.0; // sum_noisy model_unc / batch_size
    std::size_t n_clean = 0;
    std::size_t n_noisy = 0;
};

// Shared mini-batch partition for one epoch: every member sees the same
// shuffled batches, as the confidence statistics are per-batch ensemble
// quantities.
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch_size, std::uint64_t seed,
                                                           int epoch) {
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    Rng rng(derive_seed(seed, streams::kShuffle, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(indices);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
        const std::size_t stop = std::min(n, start + static_cast<std::size_t>(batch_size));
        batches.emplace_back(indices.begin() + static_cast<std::ptrdiff_t>(start),
                             indices.begin() + static_cast<std::ptrdiff_t>(stop));
    }
    return batches;
}

namespace detail {

// One iteration of Algorithm 1 on a prepared batch. The confidence report
// and the weights w_s are computed from the pre-update parameters; every
// member is then updated against that same snapshot.
inline LossBreakdown train_iteration(Ensemble& ens, std::vector<SgdState>& states, const Matrix& x,
                                     const std::vector<int>& y, const TrainConfig& cfg, int epoch,
                                     bool consult_filter, std::vector<double>* loss_trace) {
    const std::size_t b = x.rows;
    const std::size_t m = ens.size();
    const std::size_t c = ens.class_count();
    const double inv_b = 1.0 / static_cast<double>(b);
    const double inv_m = 1.0 / static_cast<double>(m);

    std::vector<ForwardCache> caches;
    caches.reserve(m);
    for (const DenseNet& net : ens.members) caches.push_back(forward_cached(net, x));

    SampleWeights weights = combine(BinaryWeights(b, 1), BinaryWeights(b, 1));
    std::vector<double> model_unc;
    Matrix mean_probs;
    if (consult_filter && cfg.filter.enabled) {
        EnsembleForward fw;
        fw.member_probs.reserve(m);
        for (const ForwardCache& cache : caches) fw.member_probs.push_back(cache.probs);
        fw.mean_probs = Matrix(b, c);
        for (const Matrix& p : fw.member_probs) {
            for (std::size_t i = 0; i < fw.mean_probs.data.size(); ++i) fw.mean_probs.data[i] += p.data[i];
        }
        for (double& v : fw.mean_probs.data) v *= inv_m;
        ConfidenceReport report = build_report(fw, &y);
        weights = apply_filter(report, cfg.filter);
        model_unc = std::move(report.model_unc);
        mean_probs = std::move(fw.mean_probs);
    }

    LossBreakdown bd;
    for (std::uint8_t w : weights.w_s) (w ? bd.n_clean : bd.n_noisy)++;
    for (std::size_t i = 0; i < b; ++i) {
        if (!weights.w_s[i]) bd.mi_term += model_unc[i] * inv_b;
    }

    std::vector<NetGrads> grads(m);
    std::vector<double> member_losses(m);
    for (std::size_t mi = 0; mi < m; ++mi) {
        const Matrix& probs = caches[mi].probs;
        Matrix upstream(b, c);
        double ce_sum = 0.0;
        for (std::size_t i = 0; i < b; ++i) {
            const auto yi = static_cast<std::size_t>(y[i]);
            if (weights.w_s[i]) {
                const double p = probs(i, yi);
                ce_sum -= clamped_log(p, kProbClampEps);
                if (p >= kProbClampEps) upstream(i, yi) = -inv_b / p;
            } else {
                const double* q = mean_probs.row(i);
                const double* pm = probs.row(i);
                double* up = upstream.row(i);
                for (std::size_t j = 0; j < c; ++j) {
                    up[j] = inv_b * inv_m *
                            (clamped_entropy_deriv(q[j], kProbClampEps) -
                             clamped_entropy_deriv(pm[j], kProbClampEps));
                }
            }
        }
        grads[mi] = backward(ens.members[mi], caches[mi], upstream);
        member_losses[mi] = ce_sum * inv_b + bd.mi_term;
        bd.ce_term += ce_sum * inv_b * inv_m;
    }
    for (std::size_t mi = 0; mi < m; ++mi) {
        sgd_step(ens.members[mi], grads[mi], states[mi], cfg.sgd, epoch);
    }
    if (loss_trace) loss_trace->insert(loss_trace->end(), member_losses.begin(), member_losses.end());
    return bd;
}

} // namespace detail

/// Training-side totals of one epoch (summed over its iterations).
struct EpochTrainStats {
    double ce_sum = 0.0;
    double mi_sum = 0.0;
    std::size_t n_clean = 0;
    std::size_t n_noisy = 0; // samples filtered out, w_s == 0
};

namespace detail {

inline EpochTrainStats run_epoch(Ensemble& ens, std::vector<SgdState>& states, const Dataset& ds,
                                 const TrainConfig& cfg, int epoch, bool consult_filter,
                                 std::vector<double>* loss_trace) {
    EpochTrainStats stats;
    std::size_t iteration = 0;
    for (const std::vector<std::size_t>& batch : epoch_batches(ds.size(), cfg.batch_size, cfg.seed, epoch)) {
        const Matrix x = features_matrix(ds, batch);
        const std::vector<int> y = observed_labels(ds, batch);
        LossBreakdown bd;
        try {
            bd = train_iteration(ens, states, x, y, cfg, epoch, consult_filter, loss_trace);
        } catch (const NumericError& e) {
            throw NumericError("epoch " + std::to_string(epoch) + " iteration " + std::to_string(iteration) +
                               ": " + e.what());
        }
        stats.ce_sum += bd.ce_term;
        stats.mi_sum += bd.mi_term;
        stats.n_clean += bd.n_clean;
        stats.n_noisy += bd.n_noisy;
        ++iteration;
    }
    return stats;
}

} // namespace detail

/// Warm-up: plain per-member cross-entropy for cfg.warmup_epochs epochs at
/// the base (high) learning rate; the filter is never consulted.
inline void warmup(Ensemble& ens, const Dataset& ds, const TrainConfig& cfg,
                   std::vector<SgdState>* states = nullptr) {
    validate(cfg);
    std::vector<SgdState> local;
    std::vector<SgdState>& st = states ? *states : local;
    if (st.empty()) {
        for (const DenseNet& net : ens.members) st.push_back(make_sgd_state(net));
    } else if (st.size() != ens.size()) {
        throw ShapeError("warmup: optimizer state count does not match ensemble size");
    }
    for (int epoch = 0; epoch < cfg.warmup_epochs; ++epoch) {
        detail::run_epoch(ens, st, ds, cfg, epoch, /*consult_filter=*/false, nullptr);
    }
}

/// One epoch of the filtered phase: per batch, confidence report -> weights
/// -> one switched-objective SGD step per member.
inline EpochTrainStats train_epoch_filtered(Ensemble& ens, std::vector<SgdState>& states, const Dataset& ds,
                                            const TrainConfig& cfg, int epoch,
                                            std::vector<double>* loss_trace = nullptr) {
    if (states.size() != ens.size())
        throw ShapeError("train_epoch_filtered: optimizer state count does not match ensemble size");
    return detail::run_epoch(ens, states, ds, cfg, epoch, /*consult_filter=*/true, loss_trace);
}

/// End-of-epoch snapshot on the training set, computed with frozen
/// parameters in natural sample order.
struct TrainEvalStats {
    double acc = 0.0; // against observed labels
    double auroc_l = std::numeric_limits<double>::quiet_NaN();
    double auroc_m = std::numeric_limits<double>::quiet_NaN();
    double mean_model_unc = 0.0;
    double mean_lcon_clean = std::numeric_limits<double>::quiet_NaN();
    double mean_lcon_noisy = std::numeric_limits<double>::quiet_NaN();
};

inline TrainEvalStats evaluate_train_set(const Ensemble& ens, const Dataset& ds, int chunk = 256) {
    TrainEvalStats stats;
    const std::size_t n = ds.size();
    std::vector<double> lcon_all, mcon_all;
    std::vector<std::uint8_t> y_flags, x_flags;
    lcon_all.reserve(n);
    mcon_all.reserve(n);
    y_flags.reserve(n);
    x_flags.reserve(n);
    std::size_t correct = 0;
    double model_sum = 0.0;
    double lcon_clean_sum = 0.0, lcon_noisy_sum = 0.0;
    std::size_t n_clean = 0, n_noisy = 0;

    std::vector<std::size_t> indices;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(chunk)) {
        const std::size_t stop = std::min(n, start + static_cast<std::size_t>(chunk));
        indices.resize(stop - start);
        for (std::size_t i = start; i < stop; ++i) indices[i - start] = i;
        const Matrix x = features_matrix(ds, indices);
        const std::vector<int> y = observed_labels(ds, indices);
        const ConfidenceReport report = build_report(ens, x, &y);
        correct += count_correct(report.mean_probs, y);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const Sample& s = ds.samples[indices[i]];
            lcon_all.push_back(report.l_con[i]);
            mcon_all.push_back(report.m_con[i]);
            y_flags.push_back(s.y_noisy ? 1 : 0);
            x_flags.push_back(s.x_noisy ? 1 : 0);
            model_sum += report.model_unc[i];
            if (s.y_noisy) {
                lcon_noisy_sum += report.l_con[i];
                ++n_noisy;
            } else {
                lcon_clean_sum += report.l_con[i];
                ++n_clean;
            }
        }
    }
    stats.acc = static_cast<double>(correct) / static_cast<double>(n);
    stats.mean_model_unc = model_sum / static_cast<double>(n);
    if (n_clean > 0) stats.mean_lcon_clean = lcon_clean_sum / static_cast<double>(n_clean);
    if (n_noisy > 0) stats.mean_lcon_noisy = lcon_noisy_sum / static_cast<double>(n_noisy);
    try {
        stats.auroc_l = auroc(lcon_all, y_flags);
    } catch (const UndefinedMetricError&) {
    }
    try {
        stats.auroc_m = auroc(mcon_all, x_flags);
    } catch (const UndefinedMetricError&) {
    }
    return stats;
}

/// Vote + argmax accuracy against true labels.
inline double evaluate_accuracy(const Ensemble& ens, const Dataset& ds, int chunk = 256) {
    const std::size_t n = ds.size();
    std::size_t correct = 0;
    std::vector<std::size_t> indices;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(chunk)) {
        const std::size_t stop = std::min(n, start + static_cast<std::size_t>(chunk));
        indices.resize(stop - start);
        for (std::size_t i = start; i < stop; ++i) indices[i - start] = i;
        const Matrix probs = vote(ens, features_matrix(ds, indices));
        correct += count_correct(probs, true_labels(ds, indices));
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

struct EpochStats {
    int epoch = 0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double auroc_l = std::numeric_limits<double>::quiet_NaN();
    double auroc_m = std::numeric_limits<double>::quiet_NaN();
    double mean_model_unc = 0.0;
    double mean_lcon_clean = std::numeric_limits<double>::quiet_NaN();
    double mean_lcon_noisy = std::numeric_limits<double>::quiet_NaN();
    double ce_sum = 0.0;
    double mi_sum = 0.0;
    std::size_t n_clean = 0;
    std::size_t n_filtered = 0;
};

struct RunRecord {
    std::vector<EpochStats> epochs;
    double best_val_acc = 0.0;
    double last_val_acc = 0.0;
    int best_epoch = -1;
    // per-iteration member losses in update order, for reproducibility checks
    std::vector<double> train_loss_trace;
};

/// Algorithm 1 end to end: warm-up, then filtered epochs, with per-epoch
/// train/val statistics. Deterministic given (cfg, datasets). The trained
/// ensemble is copied out when final_ensemble is given.
inline RunRecord run(const TrainConfig& cfg, const Dataset& ds_train, const Dataset& ds_val,
                     Ensemble* final_ensemble = nullptr) {
    validate(cfg);
    if (ds_train.class_count != ds_val.class_count || ds_train.feature_dim != ds_val.feature_dim)
        throw ShapeError("run: train and val datasets disagree on shape");

    std::vector<std::size_t> dims;
    dims.push_back(ds_train.feature_dim);
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(static_cast<std::size_t>(ds_train.class_count));

    Ensemble ens = make_ensemble(static_cast<std::size_t>(cfg.ensemble_size), dims, cfg.seed);
    std::vector<SgdState> states;
    for (const DenseNet& net : ens.members) states.push_back(make_sgd_state(net));

    RunRecord record;
    record.epochs.reserve(static_cast<std::size_t>(cfg.max_epochs));
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const bool filtered_phase = epoch >= cfg.warmup_epochs;
        const EpochTrainStats train_stats =
            detail::run_epoch(ens, states, ds_train, cfg, epoch, filtered_phase, &record.train_loss_trace);

        EpochStats stats;
        stats.epoch = epoch;
        stats.ce_sum = train_stats.ce_sum;
        stats.mi_sum = train_stats.mi_sum;
        stats.n_clean = train_stats.n_clean;
        stats.n_filtered = train_stats.n_noisy;
        const TrainEvalStats eval = evaluate_train_set(ens, ds_train);
        stats.train_acc = eval.acc;
        stats.auroc_l = eval.auroc_l;
        stats.auroc_m = eval.auroc_m;
        stats.mean_model_unc = eval.mean_model_unc;
        stats.mean_lcon_clean = eval.mean_lcon_clean;
        stats.mean_lcon_noisy = eval.mean_lcon_noisy;
        stats.val_acc = evaluate_accuracy(ens, ds_val);
        record.epochs.push_back(stats);

        if (record.best_epoch < 0 || stats.val_acc > record.best_val_acc) {
            record.best_val_acc = stats.val_acc;
            record.best_epoch = epoch;
        }
        record.last_val_acc = stats.val_acc;
    }
    if (final_ensemble) *final_ensemble = std::move(ens);
    return record;
}

} // namespace densemble
