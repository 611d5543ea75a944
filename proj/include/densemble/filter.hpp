#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "densemble/ensemble.hpp"
#include "densemble/errors.hpp"

namespace densemble {

/// Confidence-based sample filter. L-Con is thresholded hard at eps1; M-Con
/// uses the soft per-batch percentile rule (the bottom eps2_percent of each
/// mini-batch is filtered), with the hard absolute-threshold variant kept
/// behind m_con_hard for the ablation.
struct FilterConfig {
    double eps1 = 0.020;
    double eps2_percent = 5.0; // in [0, 100)
    bool enabled = true;
    bool l_con_enabled = true;  // off for the Proposed-M variant
    bool m_con_enabled = true;  // off for the Proposed-L variant
    bool m_con_hard = false;
    double eps2_hard = 0.0; // absolute M-Con threshold when m_con_hard

    bool operator==(const FilterConfig&) const = default;
};

inline void validate(const FilterConfig& cfg) {
    if (cfg.eps1 < 0.0 || cfg.eps1 > 1.0) throw ConfigError("filter: eps1 must be in [0,1]");
    if (cfg.eps2_percent < 0.0 || cfg.eps2_percent >= 100.0)
        throw ConfigError("filter: eps2_percent must be in [0,100)");
}

using BinaryWeights = std::vector<std::uint8_t>;

struct SampleWeights {
    BinaryWeights w_l;
    BinaryWeights w_k;
    BinaryWeights w_s; // w_l AND w_k

    std::size_t filtered_count() const {
        return static_cast<std::size_t>(std::count(w_s.begin(), w_s.end(), std::uint8_t{0}));
    }
};

/// w_l[i] = 0 iff l_con[i] <= eps1 (inclusive boundary).
inline BinaryWeights weights_l(const std::vector<double>& l_con, double eps1) {
    BinaryWeights w(l_con.size());
    for (std::size_t i = 0; i < l_con.size(); ++i) w[i] = l_con[i] <= eps1 ? 0 : 1;
    return w;
}

/// Soft threshold: the floor(eps2_percent/100 * n) samples with the smallest
/// M-Con get w_k = 0. Ties are broken by sample index, lower index first.
inline BinaryWeights weights_k(const std::vector<double>& m_con, double eps2_percent) {
    if (eps2_percent < 0.0 || eps2_percent >= 100.0)
        throw ConfigError("weights_k: eps2_percent must be in [0,100)");
    const std::size_t n = m_con.size();
    const auto k = static_cast<std::size_t>(eps2_percent / 100.0 * static_cast<double>(n));
    BinaryWeights w(n, 1);
    if (k == 0) return w;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m_con[a] < m_con[b]; });
    for (std::size_t i = 0; i < k; ++i) w[order[i]] = 0;
    return w;
}

/// Hard variant of the M-Con rule: w_k[i] = 0 iff m_con[i] <= eps2.
inline BinaryWeights weights_k_hard(const std::vector<double>& m_con, double eps2) {
    BinaryWeights w(m_con.size());
    for (std::size_t i = 0; i < m_con.size(); ++i) w[i] = m_con[i] <= eps2 ? 0 : 1;
    return w;
}

/// Final weight w_s = w_l * w_k.
inline SampleWeights combine(BinaryWeights w_l, BinaryWeights w_k) {
    if (w_l.size() != w_k.size()) throw ShapeError("combine: weight vectors differ in length");
    SampleWeights sw{std::move(w_l), std::move(w_k), {}};
    sw.w_s.resize(sw.w_l.size());
    for (std::size_t i = 0; i < sw.w_l.size(); ++i)
        sw.w_s[i] = static_cast<std::uint8_t>(sw.w_l[i] * sw.w_k[i]);
    return sw;
}

// Filter one batch given its confidence report. Disabled sides keep w = 1.
inline SampleWeights apply_filter(const ConfidenceReport& report, const FilterConfig& cfg) {
    const std::size_t n = report.m_con.size();
    if (!cfg.enabled) return combine(BinaryWeights(n, 1), BinaryWeights(n, 1));
    validate(cfg);
    BinaryWeights wl = cfg.l_con_enabled ? weights_l(report.l_con, cfg.eps1) : BinaryWeights(n, 1);
    BinaryWeights wk(n, 1);
    if (cfg.m_con_enabled) {
        wk = cfg.m_con_hard ? weights_k_hard(report.m_con, cfg.eps2_hard) : weights_k(report.m_con, cfg.eps2_percent);
    }
    return combine(std::move(wl), std::move(wk));
}

} // namespace densemble
