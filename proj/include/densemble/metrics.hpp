#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "densemble/dataset.hpp"
#include "densemble/ensemble.hpp"
#include "densemble/errors.hpp"
#include "densemble/matrix.hpp"

namespace densemble {

// Number of rows whose argmax matches the label; ties go to the lowest
// class index.
inline std::size_t count_correct(const Matrix& mean_probs, const std::vector<int>& labels) {
    check_labels(labels, mean_probs.rows, mean_probs.cols);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < mean_probs.rows; ++i) {
        const double* p = mean_probs.row(i);
        std::size_t arg = 0;
        for (std::size_t j = 1; j < mean_probs.cols; ++j) {
            if (p[j] > p[arg]) arg = j;
        }
        if (arg == static_cast<std::size_t>(labels[i])) ++correct;
    }
    return correct;
}

/// Fraction of rows whose argmax matches the label; ties go to the lowest
/// class index.
inline double accuracy(const Matrix& mean_probs, const std::vector<int>& labels) {
    if (mean_probs.rows == 0) return 0.0;
    return static_cast<double>(count_correct(mean_probs, labels)) / static_cast<double>(mean_probs.rows);
}

/// Mann-Whitney AUROC of a confidence score as a noise detector. Convention:
/// noisy samples are expected to score LOW, so the statistic counts the
/// probability that a random noisy sample scores below a random clean one,
/// with ties contributing 1/2.
inline double auroc(const std::vector<double>& scores, const std::vector<std::uint8_t>& positive_flags) {
    if (scores.size() != positive_flags.size()) throw ShapeError("auroc: scores/flags length mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (std::uint8_t f : positive_flags) n_pos += f ? 1 : 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("auroc: need at least one noisy and one clean sample");

    // ranks in descending score order, average rank for ties
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1); // 1-based
        for (std::size_t t = i; t <= j; ++t) {
            if (positive_flags[order[t]]) rank_sum_pos += avg_rank;
        }
        i = j + 1;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// AUROC of L-Con against the hidden y-noise flags and of M-Con against the
/// hidden x-noise flags.
inline std::pair<double, double> filter_quality(const ConfidenceReport& report,
                                                const std::vector<Sample>& samples) {
    if (report.m_con.size() != samples.size() || report.l_con.size() != samples.size())
        throw ShapeError("filter_quality: report and samples disagree in length");
    std::vector<std::uint8_t> y_flags(samples.size()), x_flags(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        y_flags[i] = samples[i].y_noisy ? 1 : 0;
        x_flags[i] = samples[i].x_noisy ? 1 : 0;
    }
    return {auroc(report.l_con, y_flags), auroc(report.m_con, x_flags)};
}

} // namespace densemble
