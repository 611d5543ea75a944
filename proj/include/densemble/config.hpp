#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "densemble/errors.hpp"
#include "densemble/noise.hpp"
#include "densemble/trainer.hpp"

namespace densemble {

enum class Variant { proposed_lm, proposed_l, proposed_m, de_ce, single_ce };
enum class DatasetKind { blobs, grid_digits };

inline std::string to_string(Variant v) {
    switch (v) {
    case Variant::proposed_lm: return "proposed_lm";
    case Variant::proposed_l: return "proposed_l";
    case Variant::proposed_m: return "proposed_m";
    case Variant::de_ce: return "de_ce";
    case Variant::single_ce: return "single_ce";
    }
    return "?";
}

inline std::string to_string(DatasetKind k) { return k == DatasetKind::blobs ? "blobs" : "grid_digits"; }

/// One experiment: dataset recipe, noise recipe, training setup, method
/// variant and output location. Flat key = value text format, # comments.
struct RunConfig {
    DatasetKind dataset = DatasetKind::grid_digits;
    int classes = 10;
    int train_per_class = 200;
    int val_per_class = 50;
    std::uint64_t data_seed = 1;
    // blobs
    int dim = 16;
    double spread = 0.3;
    // grid_digits
    std::size_t side = 8;
    double jitter = 0.15;

    NoiseSpec noise;
    TrainConfig train;
    Variant variant = Variant::proposed_lm;
    std::string output_dir;

    bool operator==(const RunConfig&) const = default;
};

// Enforce the variant invariants: single_ce runs one network, the ablation
// variants switch off one side of the filter, the CE baselines disable it.
inline void apply_variant(RunConfig& cfg, std::vector<std::string>* warnings = nullptr) {
    switch (cfg.variant) {
    case Variant::single_ce:
        if (cfg.train.ensemble_size != 1) {
            if (warnings) warnings->push_back("variant single_ce forces M = 1 (was " +
                                              std::to_string(cfg.train.ensemble_size) + ")");
            cfg.train.ensemble_size = 1;
        }
        cfg.train.filter.enabled = false;
        break;
    case Variant::de_ce:
        cfg.train.filter.enabled = false;
        break;
    case Variant::proposed_l:
        cfg.train.filter.enabled = true;
        cfg.train.filter.l_con_enabled = true;
        cfg.train.filter.m_con_enabled = false;
        break;
    case Variant::proposed_m:
        cfg.train.filter.enabled = true;
        cfg.train.filter.l_con_enabled = false;
        cfg.train.filter.m_con_enabled = true;
        break;
    case Variant::proposed_lm:
        cfg.train.filter.enabled = true;
        cfg.train.filter.l_con_enabled = true;
        cfg.train.filter.m_con_enabled = true;
        break;
    }
}

struct ParsedConfig {
    RunConfig config;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

namespace detail {

struct ConfigReader {
    std::map<std::string, std::string> values;
    std::vector<std::string>* errors;
    std::vector<std::string> seen;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    void fail(const std::string& key, const std::string& msg) { errors->push_back(key + ": " + msg); }

    template <typename F>
    void with(const std::string& key, F&& apply) {
        auto it = values.find(key);
        if (it == values.end()) return;
        seen.push_back(key);
        try {
            apply(it->second);
        } catch (const std::exception& e) {
            fail(key, e.what());
        }
    }

    void read_double(const std::string& key, double& out, double lo, double hi, bool hi_open = false) {
        with(key, [&](const std::string& v) {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw ConfigError("trailing characters in '" + v + "'");
            if (x < lo || x > hi || (hi_open && x == hi))
                throw ConfigError("value " + v + " outside [" + std::to_string(lo) + "," + std::to_string(hi) +
                                  (hi_open ? ")" : "]"));
            out = x;
        });
    }

    void read_int(const std::string& key, int& out, int lo, int hi) {
        with(key, [&](const std::string& v) {
            std::size_t pos = 0;
            const long x = std::stol(v, &pos);
            if (pos != v.size()) throw ConfigError("trailing characters in '" + v + "'");
            if (x < lo || x > hi) throw ConfigError("value " + v + " outside [" + std::to_string(lo) + "," +
                                                    std::to_string(hi) + "]");
            out = static_cast<int>(x);
        });
    }

    void read_u64(const std::string& key, std::uint64_t& out) {
        with(key, [&](const std::string& v) {
            std::size_t pos = 0;
            out = std::stoull(v, &pos);
            if (pos != v.size()) throw ConfigError("trailing characters in '" + v + "'");
        });
    }

    void read_bool(const std::string& key, bool& out) {
        with(key, [&](const std::string& v) {
            if (v == "true" || v == "1")
                out = true;
            else if (v == "false" || v == "0")
                out = false;
            else
                throw ConfigError("expected true/false, got '" + v + "'");
        });
    }

    void read_string(const std::string& key, std::string& out) {
        with(key, [&](const std::string& v) { out = v; });
    }
};

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "dataset",       "classes",     "train_per_class", "val_per_class", "data_seed",
        "dim",           "spread",      "side",            "jitter",        "y_rate",
        "x_rate",        "x_kinds",     "blur_sigma",      "contrast_factor", "noise_seed",
        "hidden_dims",   "M",           "warmup_epochs",   "max_epochs",    "batch_size",
        "learning_rate", "momentum",    "weight_decay",    "lr_schedule",   "train_seed",
        "eps1",          "eps2_percent", "m_con_hard",     "eps2_hard",     "variant",
        "output_dir",
    };
    return keys;
}

} // namespace detail

/// Parse the flat key = value text into a validated RunConfig; all
/// field-level problems are collected instead of stopping at the first.
inline ParsedConfig parse_config(const std::string& text) {
    ParsedConfig result;
    detail::ConfigReader reader;
    reader.errors = &result.errors;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            result.errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        bool known = false;
        for (const std::string& k : detail::known_keys()) known = known || k == key;
        if (!known) {
            result.errors.push_back(key + ": unknown key");
            continue;
        }
        if (reader.values.count(key)) result.warnings.push_back(key + ": repeated, last value wins");
        reader.values[key] = value;
    }

    for (const char* req : {"dataset", "classes", "variant", "output_dir"}) {
        if (!reader.has(req)) result.errors.push_back(std::string(req) + ": required key missing");
    }

    RunConfig& cfg = result.config;
    reader.with("dataset", [&](const std::string& v) {
        if (v == "blobs")
            cfg.dataset = DatasetKind::blobs;
        else if (v == "grid_digits")
            cfg.dataset = DatasetKind::grid_digits;
        else
            throw ConfigError("expected blobs|grid_digits, got '" + v + "'");
    });
    reader.read_int("classes", cfg.classes, 2, 1000000);
    reader.read_int("train_per_class", cfg.train_per_class, 1, 1000000);
    reader.read_int("val_per_class", cfg.val_per_class, 1, 1000000);
    reader.read_u64("data_seed", cfg.data_seed);
    reader.read_int("dim", cfg.dim, 1, 1000000);
    reader.read_double("spread", cfg.spread, 0.0, 1e9);
    reader.with("side", [&](const std::string& v) {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size() || x < 8) throw ConfigError("side must be an integer >= 8");
        cfg.side = static_cast<std::size_t>(x);
    });
    reader.read_double("jitter", cfg.jitter, 0.0, 1.0);

    reader.read_double("y_rate", cfg.noise.y_rate, 0.0, 1.0);
    reader.read_double("x_rate", cfg.noise.x_rate, 0.0, 1.0);
    reader.with("x_kinds", [&](const std::string& v) {
        std::vector<Corruption> kinds;
        for (const std::string& part : detail::split(v, ',')) {
            const std::string name = detail::trim(part);
            if (name.empty()) continue;
            if (name == "gaussian_blur")
                kinds.push_back(Corruption::gaussian_blur);
            else if (name == "contrast")
                kinds.push_back(Corruption::contrast);
            else
                throw ConfigError("unknown corruption '" + name + "'");
        }
        cfg.noise.x_kinds = std::move(kinds);
    });
    reader.read_double("blur_sigma", cfg.noise.blur_sigma, 1e-9, 1e9);
    reader.read_double("contrast_factor", cfg.noise.contrast_factor, 0.0, 1.0, /*hi_open=*/true);
    reader.read_u64("noise_seed", cfg.noise.rng_seed);

    reader.with("hidden_dims", [&](const std::string& v) {
        std::vector<std::size_t> dims;
        for (const std::string& part : detail::split(v, ',')) {
            const std::string p = detail::trim(part);
            if (p.empty()) continue;
            std::size_t pos = 0;
            const long x = std::stol(p, &pos);
            if (pos != p.size() || x < 1) throw ConfigError("bad hidden dim '" + p + "'");
            dims.push_back(static_cast<std::size_t>(x));
        }
        if (dims.empty()) throw ConfigError("need at least one hidden dim");
        cfg.train.hidden_dims = std::move(dims);
    });
    reader.read_int("M", cfg.train.ensemble_size, 1, 1000);
    reader.read_int("warmup_epochs", cfg.train.warmup_epochs, 0, 1000000);
    reader.read_int("max_epochs", cfg.train.max_epochs, 1, 1000000);
    reader.read_int("batch_size", cfg.train.batch_size, 2, 1000000);
    reader.read_double("learning_rate", cfg.train.sgd.learning_rate, 1e-12, 1e9);
    reader.read_double("momentum", cfg.train.sgd.momentum, 0.0, 1.0, /*hi_open=*/true);
    reader.read_double("weight_decay", cfg.train.sgd.weight_decay, 0.0, 1e9);
    reader.with("lr_schedule", [&](const std::string& v) {
        std::vector<std::pair<int, double>> schedule;
        if (detail::trim(v) != "none") {
            for (const std::string& part : detail::split(v, ',')) {
                const std::string p = detail::trim(part);
                if (p.empty()) continue;
                const std::size_t colon = p.find(':');
                if (colon == std::string::npos) throw ConfigError("expected epoch:multiplier, got '" + p + "'");
                schedule.emplace_back(std::stoi(p.substr(0, colon)), std::stod(p.substr(colon + 1)));
            }
        }
        cfg.train.sgd.lr_schedule = std::move(schedule);
    });
    reader.read_u64("train_seed", cfg.train.seed);

    reader.read_double("eps1", cfg.train.filter.eps1, 0.0, 1.0);
    reader.read_double("eps2_percent", cfg.train.filter.eps2_percent, 0.0, 100.0, /*hi_open=*/true);
    reader.read_bool("m_con_hard", cfg.train.filter.m_con_hard);
    reader.read_double("eps2_hard", cfg.train.filter.eps2_hard, 0.0, 1.0);

    reader.with("variant", [&](const std::string& v) {
        if (v == "proposed_lm")
            cfg.variant = Variant::proposed_lm;
        else if (v == "proposed_l")
            cfg.variant = Variant::proposed_l;
        else if (v == "proposed_m")
            cfg.variant = Variant::proposed_m;
        else if (v == "de_ce")
            cfg.variant = Variant::de_ce;
        else if (v == "single_ce")
            cfg.variant = Variant::single_ce;
        else
            throw ConfigError("expected proposed_lm|proposed_l|proposed_m|de_ce|single_ce, got '" + v + "'");
    });
    reader.read_string("output_dir", cfg.output_dir);

    if (result.errors.empty()) {
        apply_variant(cfg, &result.warnings);
        try {
            validate(cfg.train);
            validate(cfg.noise);
        } catch (const ConfigError& e) {
            result.errors.push_back(e.what());
        }
        if (cfg.dataset == DatasetKind::blobs && cfg.noise.x_rate > 0.0) {
            result.errors.push_back("x_rate: image corruptions require the grid_digits dataset");
        }
    }
    return result;
}

inline RunConfig parse_config_or_throw(const std::string& text) {
    ParsedConfig parsed = parse_config(text);
    if (!parsed.ok()) {
        std::string msg = "config errors:";
        for (const std::string& e : parsed.errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return parsed.config;
}

/// Canonical re-serialization; parse(config_to_text(c)) == c.
inline std::string config_to_text(const RunConfig& cfg) {
    std::ostringstream out;
    out << "dataset = " << to_string(cfg.dataset) << '\n';
    out << "classes = " << cfg.classes << '\n';
    out << "train_per_class = " << cfg.train_per_class << '\n';
    out << "val_per_class = " << cfg.val_per_class << '\n';
    out << "data_seed = " << cfg.data_seed << '\n';
    out << "dim = " << cfg.dim << '\n';
    out << "spread = " << format_g9(cfg.spread) << '\n';
    out << "side = " << cfg.side << '\n';
    out << "jitter = " << format_g9(cfg.jitter) << '\n';
    out << "y_rate = " << format_g9(cfg.noise.y_rate) << '\n';
    out << "x_rate = " << format_g9(cfg.noise.x_rate) << '\n';
    out << "x_kinds = ";
    for (std::size_t i = 0; i < cfg.noise.x_kinds.size(); ++i) {
        if (i) out << ',';
        out << to_string(cfg.noise.x_kinds[i]);
    }
    out << '\n';
    out << "blur_sigma = " << format_g9(cfg.noise.blur_sigma) << '\n';
    out << "contrast_factor = " << format_g9(cfg.noise.contrast_factor) << '\n';
    out << "noise_seed = " << cfg.noise.rng_seed << '\n';
    out << "hidden_dims = ";
    for (std::size_t i = 0; i < cfg.train.hidden_dims.size(); ++i) {
        if (i) out << ',';
        out << cfg.train.hidden_dims[i];
    }
    out << '\n';
    out << "M = " << cfg.train.ensemble_size << '\n';
    out << "warmup_epochs = " << cfg.train.warmup_epochs << '\n';
    out << "max_epochs = " << cfg.train.max_epochs << '\n';
    out << "batch_size = " << cfg.train.batch_size << '\n';
    out << "learning_rate = " << format_g9(cfg.train.sgd.learning_rate) << '\n';
    out << "momentum = " << format_g9(cfg.train.sgd.momentum) << '\n';
    out << "weight_decay = " << format_g9(cfg.train.sgd.weight_decay) << '\n';
    out << "lr_schedule = ";
    if (cfg.train.sgd.lr_schedule.empty()) {
        out << "none";
    } else {
        for (std::size_t i = 0; i < cfg.train.sgd.lr_schedule.size(); ++i) {
            if (i) out << ',';
            out << cfg.train.sgd.lr_schedule[i].first << ':' << format_g9(cfg.train.sgd.lr_schedule[i].second);
        }
    }
    out << '\n';
    out << "train_seed = " << cfg.train.seed << '\n';
    out << "eps1 = " << format_g9(cfg.train.filter.eps1) << '\n';
    out << "eps2_percent = " << format_g9(cfg.train.filter.eps2_percent) << '\n';
    out << "m_con_hard = " << (cfg.train.filter.m_con_hard ? "true" : "false") << '\n';
    out << "eps2_hard = " << format_g9(cfg.train.filter.eps2_hard) << '\n';
    out << "variant = " << to_string(cfg.variant) << '\n';
    out << "output_dir = " << cfg.output_dir << '\n';
    return out.str();
}

} // namespace densemble
