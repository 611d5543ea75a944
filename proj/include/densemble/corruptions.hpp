#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "densemble/errors.hpp"

namespace densemble {

// Normalized 1-D Gaussian kernel of radius ceil(3*sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("gaussian_kernel: sigma must be positive");
    const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

namespace detail {

// Reflective border padding with edge duplication: -1 -> 0, n -> n-1, ...
// This extension keeps a symmetric unit-sum kernel mean-preserving.
inline std::size_t mirror_index(long i, long n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return static_cast<std::size_t>(i);
}

} // namespace detail

/// Separable Gaussian blur of an H x W grid (row-major), kernel radius
/// ceil(3*sigma), reflective padding. Values stay in [0,1].
inline std::vector<double> gaussian_blur(const std::vector<double>& image, std::size_t height, std::size_t width,
                                         double sigma) {
    if (height < 2 || width < 2) throw ShapeError("gaussian_blur: image sides must be >= 2");
    if (image.size() != height * width) throw ShapeError("gaussian_blur: image size does not match H x W");
    const std::vector<double> k = gaussian_kernel(sigma);
    const long radius = static_cast<long>(k.size() / 2);

    std::vector<double> tmp(image.size());
    for (std::size_t r = 0; r < height; ++r) {
        const double* src = image.data() + r * width;
        double* dst = tmp.data() + r * width;
        for (std::size_t c = 0; c < width; ++c) {
            double acc = 0.0;
            for (long t = -radius; t <= radius; ++t) {
                acc += k[static_cast<std::size_t>(t + radius)] *
                       src[detail::mirror_index(static_cast<long>(c) + t, static_cast<long>(width))];
            }
            dst[c] = acc;
        }
    }
    std::vector<double> out(image.size());
    for (std::size_t c = 0; c < width; ++c) {
        for (std::size_t r = 0; r < height; ++r) {
            double acc = 0.0;
            for (long t = -radius; t <= radius; ++t) {
                acc += k[static_cast<std::size_t>(t + radius)] *
                       tmp[detail::mirror_index(static_cast<long>(r) + t, static_cast<long>(height)) * width + c];
            }
            out[r * width + c] = std::clamp(acc, 0.0, 1.0);
        }
    }
    return out;
}

/// Contrast reduction: squeeze values toward the image mean by the given
/// factor, out = clamp(mean + factor*(x - mean), 0, 1). factor in (0,1).
inline std::vector<double> contrast(const std::vector<double>& image, double factor) {
    double mean = 0.0;
    for (double v : image) mean += v;
    if (!image.empty()) mean /= static_cast<double>(image.size());
    std::vector<double> out(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
        out[i] = std::clamp(mean + factor * (image[i] - mean), 0.0, 1.0);
    }
    return out;
}

} // namespace densemble
