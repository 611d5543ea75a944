#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "densemble/errors.hpp"
#include "densemble/matrix.hpp"

namespace densemble {

// Probabilities below this are clamped before any log. Natural log throughout.
inline constexpr double kProbClampEps = 1e-12;

inline double clamped_log(double p, double eps) { return std::log(p < eps ? eps : p); }

inline void check_labels(const std::vector<int>& labels, std::size_t rows, std::size_t class_count) {
    if (labels.size() != rows) throw ShapeError("labels: expected one label per batch row");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count) {
            throw std::out_of_range("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                    " outside [0, " + std::to_string(class_count) + ")");
        }
    }
}

/// Mean negative log-likelihood of the observed labels, -mean(log p[y]).
inline double cross_entropy_loss(const Matrix& probs, const std::vector<int>& labels,
                                 double clamp_eps = kProbClampEps) {
    check_labels(labels, probs.rows, probs.cols);
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.rows; ++i) {
        sum -= clamped_log(probs(i, static_cast<std::size_t>(labels[i])), clamp_eps);
    }
    return sum / static_cast<double>(probs.rows);
}

// Gradient of cross_entropy_loss with respect to the probabilities.
// The clamped branch (p < eps) has zero derivative.
inline Matrix cross_entropy_grad_probs(const Matrix& probs, const std::vector<int>& labels,
                                       double clamp_eps = kProbClampEps) {
    check_labels(labels, probs.rows, probs.cols);
    Matrix grad(probs.rows, probs.cols);
    const double inv_n = 1.0 / static_cast<double>(probs.rows);
    for (std::size_t i = 0; i < probs.rows; ++i) {
        const double p = probs(i, static_cast<std::size_t>(labels[i]));
        if (p >= clamp_eps) grad(i, static_cast<std::size_t>(labels[i])) = -inv_n / p;
    }
    return grad;
}

/// Shannon entropy -sum p log p of one probability row, natural log,
/// probabilities clamped below by clamp_eps inside the log.
inline double entropy(const double* probs_row, std::size_t n, double clamp_eps = kProbClampEps) {
    double h = 0.0;
    for (std::size_t j = 0; j < n; ++j) h -= probs_row[j] * clamped_log(probs_row[j], clamp_eps);
    return h;
}

inline double entropy(const std::vector<double>& probs_row, double clamp_eps = kProbClampEps) {
    return entropy(probs_row.data(), probs_row.size(), clamp_eps);
}

} // namespace densemble
