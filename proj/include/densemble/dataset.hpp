#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "densemble/errors.hpp"
#include "densemble/matrix.hpp"

namespace densemble {

enum class Split { train, val };

struct Sample {
    std::vector<double> features; // image-like data is an H x W grid, flattened row-major
    int observed_label = 0;
    int true_label = 0; // hidden from the trainer, used only by evaluation
    bool y_noisy = false;
    bool x_noisy = false;
};

struct Dataset {
    std::vector<Sample> samples;
    int class_count = 0;
    std::size_t feature_dim = 0;
    Split split = Split::train;
    std::size_t image_side = 0; // 0 when features are not image-shaped

    std::size_t size() const { return samples.size(); }
};

inline Matrix features_matrix(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Matrix x(indices.size(), ds.feature_dim);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::vector<double>& f = ds.samples[indices[i]].features;
        std::copy(f.begin(), f.end(), x.row(i));
    }
    return x;
}

inline std::vector<int> observed_labels(const Dataset& ds, const std::vector<std::size_t>& indices) {
    std::vector<int> y(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) y[i] = ds.samples[indices[i]].observed_label;
    return y;
}

inline std::vector<int> true_labels(const Dataset& ds, const std::vector<std::size_t>& indices) {
    std::vector<int> y(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) y[i] = ds.samples[indices[i]].true_label;
    return y;
}

// 9 significant decimal digits; enough for a stable text round-trip.
inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
}

/// Line-oriented text format: header "C d N", then one sample per line:
/// observed_label true_label y_noisy x_noisy f_1 ... f_d
inline void save_dataset(const Dataset& ds, std::ostream& out) {
    out << ds.class_count << ' ' << ds.feature_dim << ' ' << ds.size() << '\n';
    for (const Sample& s : ds.samples) {
        out << s.observed_label << ' ' << s.true_label << ' ' << (s.y_noisy ? 1 : 0) << ' '
            << (s.x_noisy ? 1 : 0);
        for (double f : s.features) out << ' ' << format_g9(f);
        out << '\n';
    }
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("save_dataset: cannot open " + path);
    save_dataset(ds, out);
}

inline Dataset load_dataset(std::istream& in, Split split = Split::train) {
    Dataset ds;
    ds.split = split;
    std::size_t n = 0;
    if (!(in >> ds.class_count >> ds.feature_dim >> n)) throw ConfigError("load_dataset: bad header");
    if (ds.class_count < 1) throw ConfigError("load_dataset: class count must be positive");
    ds.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        Sample& s = ds.samples[i];
        int yn = 0, xn = 0;
        if (!(in >> s.observed_label >> s.true_label >> yn >> xn))
            throw ConfigError("load_dataset: truncated sample " + std::to_string(i));
        if (s.observed_label < 0 || s.observed_label >= ds.class_count || s.true_label < 0 ||
            s.true_label >= ds.class_count)
            throw ConfigError("load_dataset: label out of range in sample " + std::to_string(i));
        s.y_noisy = yn != 0;
        s.x_noisy = xn != 0;
        s.features.resize(ds.feature_dim);
        for (double& f : s.features) {
            if (!(in >> f)) throw ConfigError("load_dataset: truncated features in sample " + std::to_string(i));
        }
    }
    // image-shaped datasets are recognized by a square feature count
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(ds.feature_dim))));
    if (side * side == ds.feature_dim && side >= 2) ds.image_side = side;
    return ds;
}

inline Dataset load_dataset(const std::string& path, Split split = Split::train) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_dataset: cannot open " + path);
    return load_dataset(in, split);
}

} // namespace densemble
