#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "densemble/corruptions.hpp"
#include "densemble/dataset.hpp"
#include "densemble/errors.hpp"
#include "densemble/rng.hpp"

namespace densemble {

enum class Corruption { gaussian_blur, contrast };

inline std::string to_string(Corruption c) {
    return c == Corruption::gaussian_blur ? "gaussian_blur" : "contrast";
}

struct NoiseSpec {
    double y_rate = 0.0;
    double x_rate = 0.0;
    std::vector<Corruption> x_kinds = {Corruption::gaussian_blur, Corruption::contrast};
    double blur_sigma = 1.5;
    double contrast_factor = 0.3;
    std::uint64_t rng_seed = 0;

    bool operator==(const NoiseSpec&) const = default;
};

inline void validate(const NoiseSpec& spec) {
    if (spec.y_rate < 0.0 || spec.y_rate > 1.0) throw ConfigError("noise: y_rate must be in [0,1]");
    if (spec.x_rate < 0.0 || spec.x_rate > 1.0) throw ConfigError("noise: x_rate must be in [0,1]");
    if (spec.x_rate > 0.0 && spec.x_kinds.empty()) throw ConfigError("noise: x_kinds empty with x_rate > 0");
    if (!(spec.blur_sigma > 0.0)) throw ConfigError("noise: blur_sigma must be positive");
    if (!(spec.contrast_factor > 0.0 && spec.contrast_factor < 1.0))
        throw ConfigError("noise: contrast_factor must be in (0,1)");
}

// round-half-up count of affected samples
inline std::size_t noisy_count(double rate, std::size_t n) {
    return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 0.5));
}

/// Symmetric label noise: a uniformly chosen subset of round(y_rate*N)
/// samples has its observed label resampled uniformly among the other C-1
/// classes. True labels are untouched; y_noisy marks the flipped samples.
inline Dataset inject_label_noise(const Dataset& ds, double y_rate, std::uint64_t seed) {
    if (ds.split != Split::train) throw ConfigError("inject_label_noise: only train splits may be corrupted");
    if (y_rate < 0.0 || y_rate > 1.0) throw ConfigError("inject_label_noise: y_rate must be in [0,1]");
    if (ds.class_count < 2) throw ConfigError("inject_label_noise: need at least 2 classes to flip labels");
    Dataset out = ds;
    Rng rng(derive_seed(seed, streams::kLabelNoise));
    std::vector<std::size_t> chosen = rng.sample_without_replacement(ds.size(), noisy_count(y_rate, ds.size()));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t idx : chosen) {
        Sample& s = out.samples[idx];
        const auto other = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(ds.class_count - 1)));
        s.observed_label = other >= s.true_label ? other + 1 : other;
        s.y_noisy = true;
    }
    return out;
}

/// Image corruption injection: a uniformly chosen subset of round(x_rate*N)
/// samples each receives one corruption drawn uniformly from spec.x_kinds.
/// Chosen independently of any label noise, so a sample may carry both.
inline Dataset inject_x_noise(const Dataset& ds, const NoiseSpec& spec) {
    if (ds.split != Split::train) throw ConfigError("inject_x_noise: only train splits may be corrupted");
    validate(spec);
    if (ds.image_side == 0) throw ShapeError("inject_x_noise: dataset features are not image-shaped");
    Dataset out = ds;
    if (spec.x_rate == 0.0) return out;
    Rng rng(derive_seed(spec.rng_seed, streams::kImageNoise));
    std::vector<std::size_t> chosen = rng.sample_without_replacement(ds.size(), noisy_count(spec.x_rate, ds.size()));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t idx : chosen) {
        Sample& s = out.samples[idx];
        const Corruption kind = spec.x_kinds[rng.uniform_below(spec.x_kinds.size())];
        switch (kind) {
        case Corruption::gaussian_blur:
            s.features = gaussian_blur(s.features, ds.image_side, ds.image_side, spec.blur_sigma);
            break;
        case Corruption::contrast:
            s.features = contrast(s.features, spec.contrast_factor);
            break;
        }
        s.x_noisy = true;
    }
    return out;
}

} // namespace densemble
