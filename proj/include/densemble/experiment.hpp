#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "densemble/config.hpp"
#include "densemble/datagen.hpp"
#include "densemble/noise.hpp"
#include "densemble/trainer.hpp"

namespace densemble {

// Output root override; relative output_dir values are placed under it.
inline constexpr const char* kOutputRootEnv = "DENSEMBLE_OUT";

inline std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
    std::filesystem::path dir = cfg.output_dir;
    if (dir.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv)) dir = std::filesystem::path(root) / dir;
    }
    return dir;
}

/// Materialize the experiment's data: a noise-injected train split and a
/// clean validation split drawn from the same generator.
inline std::pair<Dataset, Dataset> build_datasets(const RunConfig& cfg) {
    const std::uint64_t val_seed = derive_seed(cfg.data_seed, /*stream=*/0x76616cULL, 1);
    Dataset train, val;
    if (cfg.dataset == DatasetKind::blobs) {
        train = make_blobs(cfg.classes, cfg.train_per_class, cfg.dim, cfg.spread, cfg.data_seed, Split::train);
        val = make_blobs(cfg.classes, cfg.val_per_class, cfg.dim, cfg.spread, val_seed, Split::val);
    } else {
        train = make_grid_digits(cfg.side, cfg.classes, cfg.train_per_class, cfg.data_seed, cfg.jitter,
                                 Split::train);
        val = make_grid_digits(cfg.side, cfg.classes, cfg.val_per_class, val_seed, cfg.jitter, Split::val);
    }
    if (cfg.noise.y_rate > 0.0) train = inject_label_noise(train, cfg.noise.y_rate, cfg.noise.rng_seed);
    if (cfg.noise.x_rate > 0.0) train = inject_x_noise(train, cfg.noise);
    return {std::move(train), std::move(val)};
}

namespace detail {

inline std::string csv_cell(double v) { return format_g9(v); }

inline void write_metrics_csv(const RunRecord& record, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "epoch,train_acc,val_acc,auroc_l,auroc_m,mean_model_unc,n_filtered\n";
    for (const EpochStats& e : record.epochs) {
        out << e.epoch << ',' << csv_cell(e.train_acc) << ',' << csv_cell(e.val_acc) << ','
            << csv_cell(e.auroc_l) << ',' << csv_cell(e.auroc_m) << ',' << csv_cell(e.mean_model_unc) << ','
            << e.n_filtered << '\n';
    }
}

inline void write_summary(const RunConfig& cfg, const RunRecord& record, const std::filesystem::path& path) {
    nlohmann::json j;
    j["variant"] = to_string(cfg.variant);
    j["dataset"] = to_string(cfg.dataset);
    j["epochs"] = record.epochs.size();
    j["best_val_acc"] = record.best_val_acc;
    j["best_epoch"] = record.best_epoch;
    j["last_val_acc"] = record.last_val_acc;
    if (!record.epochs.empty()) {
        const EpochStats& last = record.epochs.back();
        j["final_train_acc"] = last.train_acc;
        j["final_auroc_l"] = last.auroc_l;
        j["final_auroc_m"] = last.auroc_m;
        j["final_mean_lcon_clean"] = last.mean_lcon_clean;
        j["final_mean_lcon_noisy"] = last.mean_lcon_noisy;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace detail

/// Run one experiment and persist metrics.csv, summary.txt and the resolved
/// config under the output directory.
inline RunRecord execute_run(RunConfig cfg) {
    apply_variant(cfg);
    validate(cfg.train);
    validate(cfg.noise);
    const std::filesystem::path dir = resolve_output_dir(cfg);
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir / "config_resolved.txt");
        if (!out) throw ConfigError("cannot write " + (dir / "config_resolved.txt").string());
        out << config_to_text(cfg);
    }
    auto [train, val] = build_datasets(cfg);
    RunRecord record = run(cfg.train, train, val);
    detail::write_metrics_csv(record, dir / "metrics.csv");
    detail::write_summary(cfg, record, dir / "summary.txt");
    return record;
}

/// execute_run wrapped into exit-code semantics: 0 ok, 1 config error,
/// 2 runtime error.
inline int execute(const RunConfig& cfg) {
    try {
        execute_run(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

/// Grid over the filter thresholds and the ensemble size; empty dimensions
/// fall back to the base config's value.
struct SweepGrid {
    std::vector<double> eps1;
    std::vector<double> eps2_percent;
    std::vector<int> ensemble_sizes;
};

inline SweepGrid parse_sweep_grid(const std::string& text) {
    SweepGrid grid;
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
        if (eq == std::string::npos) throw ConfigError("grid line " + std::to_string(line_no) + ": expected key = values");
        const std::string key = detail::trim(line.substr(0, eq));
        for (const std::string& part : detail::split(line.substr(eq + 1), ',')) {
            const std::string p = detail::trim(part);
            if (p.empty()) continue;
            if (key == "eps1")
                grid.eps1.push_back(std::stod(p));
            else if (key == "eps2_percent")
                grid.eps2_percent.push_back(std::stod(p));
            else if (key == "M")
                grid.ensemble_sizes.push_back(std::stoi(p));
            else
                throw ConfigError("grid: unknown key '" + key + "' (expected eps1, eps2_percent or M)");
        }
    }
    return grid;
}

/// One execute per grid point; per-cell failures are recorded in sweep.csv
/// and do not stop the sweep. Returns 0 if every cell succeeded.
inline int sweep(const RunConfig& base, const SweepGrid& grid) {
    std::vector<double> eps1s = grid.eps1.empty() ? std::vector<double>{base.train.filter.eps1} : grid.eps1;
    std::vector<double> eps2s =
        grid.eps2_percent.empty() ? std::vector<double>{base.train.filter.eps2_percent} : grid.eps2_percent;
    std::vector<int> ms =
        grid.ensemble_sizes.empty() ? std::vector<int>{base.train.ensemble_size} : grid.ensemble_sizes;

    const std::filesystem::path root = resolve_output_dir(base);
    std::filesystem::create_directories(root);
    std::ofstream csv(root / "sweep.csv");
    if (!csv) {
        std::cerr << "config error: cannot write " << (root / "sweep.csv").string() << '\n';
        return 1;
    }
    csv << "eps1,eps2_percent,M,status,best_val_acc,last_val_acc,run_dir\n";

    bool any_failed = false;
    for (double eps1 : eps1s) {
        for (double eps2 : eps2s) {
            for (int m : ms) {
                RunConfig cell = base;
                cell.train.filter.eps1 = eps1;
                cell.train.filter.eps2_percent = eps2;
                cell.train.ensemble_size = m;
                const std::string name =
                    "eps1_" + format_g9(eps1) + "__eps2_" + format_g9(eps2) + "__M_" + std::to_string(m);
                cell.output_dir = (std::filesystem::path(base.output_dir) / name).string();
                csv << format_g9(eps1) << ',' << format_g9(eps2) << ',' << m << ',';
                try {
                    RunRecord record = execute_run(cell);
                    csv << "ok," << format_g9(record.best_val_acc) << ',' << format_g9(record.last_val_acc)
                        << ',' << name << '\n';
                } catch (const std::exception& e) {
                    std::cerr << "sweep cell " << name << " failed: " << e.what() << '\n';
                    csv << "error,,," << name << '\n';
                    any_failed = true;
                }
                csv.flush();
            }
        }
    }
    return any_failed ? 2 : 0;
}

} // namespace densemble
