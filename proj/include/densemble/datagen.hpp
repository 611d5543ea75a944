#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "densemble/dataset.hpp"
#include "densemble/errors.hpp"
#include "densemble/rng.hpp"

namespace densemble {

/// Gaussian clusters around distinct hypercube corners. Class c's mean has
/// coordinate +1.5 where bit j of c is set and -1.5 elsewhere, so the means
/// are deterministic (seed-independent) and at least 3 apart in one axis.
inline Dataset make_blobs(int classes, int per_class, int dim, double spread, std::uint64_t seed,
                          Split split = Split::train) {
    if (classes < 2) throw ConfigError("make_blobs: need at least 2 classes");
    if (per_class < 1) throw ConfigError("make_blobs: per_class must be >= 1");
    if (dim < 1) throw ConfigError("make_blobs: dim must be >= 1");
    if (spread < 0.0) throw ConfigError("make_blobs: spread must be non-negative");
    if (dim < 30 && classes > (1 << dim))
        throw ConfigError("make_blobs: more classes than distinct corners (2^dim)");

    Dataset ds;
    ds.class_count = classes;
    ds.feature_dim = static_cast<std::size_t>(dim);
    ds.split = split;
    ds.samples.reserve(static_cast<std::size_t>(classes) * per_class);
    Rng rng(derive_seed(seed, streams::kBlobs));
    for (int c = 0; c < classes; ++c) {
        for (int k = 0; k < per_class; ++k) {
            Sample s;
            s.observed_label = s.true_label = c;
            s.features.resize(ds.feature_dim);
            for (int j = 0; j < dim; ++j) {
                const double mean = ((static_cast<unsigned>(c) >> (j % 30)) & 1u) ? 1.5 : -1.5;
                s.features[static_cast<std::size_t>(j)] = mean + spread * rng.normal();
            }
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

namespace detail {

// Seven-segment layout scaled to the grid. Classes 0-9 use the standard
// digit patterns; higher classes fall back to a hashed segment subset.
inline unsigned glyph_segments(int cls) {
    // bits: 0=top, 1=top-right, 2=bottom-right, 3=bottom, 4=bottom-left, 5=top-left, 6=middle
    static constexpr unsigned kDigits[10] = {
        0b0111111, // 0
        0b0000110, // 1
        0b1011011, // 2
        0b1001111, // 3
        0b1100110, // 4
        0b1101101, // 5
        0b1111101, // 6
        0b0000111, // 7
        0b1111111, // 8
        0b1101111, // 9
    };
    if (cls >= 0 && cls < 10) return kDigits[cls];
    std::uint64_t h = static_cast<std::uint64_t>(cls) * 0x9e3779b97f4a7c15ULL;
    h ^= h >> 29;
    unsigned mask = static_cast<unsigned>(h % 127u) + 1u; // nonzero 7-bit subset
    return mask;
}

inline void fill_rect(std::vector<double>& img, std::size_t side, std::size_t r0, std::size_t r1,
                      std::size_t c0, std::size_t c1, double value) {
    for (std::size_t r = r0; r <= r1 && r < side; ++r)
        for (std::size_t c = c0; c <= c1 && c < side; ++c) img[r * side + c] = value;
}

} // namespace detail

/// The class template: a seven-segment style glyph on a side x side grid,
/// strokes at 0.9 over a 0.1 background. Depends only on (side, cls).
inline std::vector<double> glyph_template(std::size_t side, int cls) {
    if (side < 8) throw ConfigError("glyph_template: side must be >= 8");
    std::vector<double> img(side * side, 0.1);
    const std::size_t margin = side / 8;
    const std::size_t th = std::max<std::size_t>(1, side / 8);
    const std::size_t x0 = margin, x1 = side - 1 - margin;
    const std::size_t y_top = margin, y_mid = side / 2, y_bot = side - 1 - margin;
    const unsigned seg = detail::glyph_segments(cls);
    const double ink = 0.9;
    if (seg & 0b0000001) detail::fill_rect(img, side, y_top, y_top + th - 1, x0, x1, ink);      // top
    if (seg & 0b0000010) detail::fill_rect(img, side, y_top, y_mid, x1 - th + 1, x1, ink);      // top-right
    if (seg & 0b0000100) detail::fill_rect(img, side, y_mid, y_bot, x1 - th + 1, x1, ink);      // bottom-right
    if (seg & 0b0001000) detail::fill_rect(img, side, y_bot - th + 1, y_bot, x0, x1, ink);      // bottom
    if (seg & 0b0010000) detail::fill_rect(img, side, y_mid, y_bot, x0, x0 + th - 1, ink);      // bottom-left
    if (seg & 0b0100000) detail::fill_rect(img, side, y_top, y_mid, x0, x0 + th - 1, ink);      // top-left
    if (seg & 0b1000000) detail::fill_rect(img, side, y_mid - th / 2, y_mid - th / 2 + th - 1, x0, x1, ink); // middle
    return img;
}

/// Synthetic grayscale glyph images: one fixed template per class plus
/// per-pixel uniform jitter, clamped to [0,1]. Templates do not depend on
/// the seed; only the jitter does.
inline Dataset make_grid_digits(std::size_t side, int classes, int per_class, std::uint64_t seed,
                                double jitter = 0.15, Split split = Split::train) {
    if (side < 8) throw ConfigError("make_grid_digits: side must be >= 8");
    if (classes < 2) throw ConfigError("make_grid_digits: need at least 2 classes");
    if (per_class < 1) throw ConfigError("make_grid_digits: per_class must be >= 1");
    if (jitter < 0.0) throw ConfigError("make_grid_digits: jitter must be non-negative");

    Dataset ds;
    ds.class_count = classes;
    ds.feature_dim = side * side;
    ds.image_side = side;
    ds.split = split;
    ds.samples.reserve(static_cast<std::size_t>(classes) * per_class);
    Rng rng(derive_seed(seed, streams::kGlyphJitter));
    for (int c = 0; c < classes; ++c) {
        const std::vector<double> tmpl = glyph_template(side, c);
        for (int k = 0; k < per_class; ++k) {
            Sample s;
            s.observed_label = s.true_label = c;
            s.features = tmpl;
            if (jitter > 0.0) {
                for (double& v : s.features) {
                    v = std::clamp(v + rng.uniform(-jitter, jitter), 0.0, 1.0);
                }
            }
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

} // namespace densemble
