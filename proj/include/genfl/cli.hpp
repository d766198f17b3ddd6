#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "genfl/config_io.hpp"
#include "genfl/log.hpp"
#include "genfl/metrics_io.hpp"
#include "genfl/protocol.hpp"
#include "genfl/svg_plot.hpp"

namespace genfl {

struct MetricsTable {
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<RoundMetrics> rows;
};

inline void validate_metrics_rows(const std::vector<RoundMetrics>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].round != i)
            throw std::runtime_error("metrics rows must cover rounds 0..N in order");
}

inline MetricsTable run_table(const ExperimentConfig& cfg) {
    MetricsTable t;
    t.seed = cfg.seed;
    t.config_hash = config_hash(cfg);
    t.rows = run_experiment(cfg);
    validate_metrics_rows(t.rows);
    return t;
}

// Runs one experiment and writes metrics.csv plus the resolved config echo
// into cfg.output_dir. Returns the table for further use.
inline MetricsTable run_to_dir(const ExperimentConfig& cfg) {
    log_info("run: seed=" + std::to_string(cfg.seed) + " mode=" + std::string(mode_name(cfg.mode)) +
             " rounds=" + std::to_string(cfg.rounds) + " out=" + cfg.output_dir);
    MetricsTable t = run_table(cfg);
    const std::filesystem::path dir(cfg.output_dir);
    write_file_atomic(dir / "metrics.csv", metrics_to_csv(t.rows));
    write_file_atomic(dir / "config.txt", echo_config(cfg));
    log_info("run: wrote " + (dir / "metrics.csv").string());
    return t;
}

inline std::uint64_t sweep_child_seed(std::uint64_t base_seed, const std::string& axis,
                                      const std::string& value) {
    return derive_seed(base_seed, fnv1a(axis), fnv1a(value));
}

// Applies one sweep value to a copy of the base config. kappa1/kappa2 stay
// paired, and a mode change re-defaults the kappas to that mode's policy.
inline ExperimentConfig apply_axis_value(ExperimentConfig cfg, const std::string& axis,
                                         const std::string& value) {
    if (axis == "seed" || axis == "output_dir")
        throw std::invalid_argument("axis '" + axis + "' is not sweepable");
    const ConfigKey* key = find_config_key(axis);
    if (!key) throw std::invalid_argument("unknown sweep axis '" + axis + "'");
    const Mode base_mode = cfg.mode;
    try {
        key->set(cfg, value);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("axis '" + axis + "': " + e.what());
    }
    if (axis == "kappa1") {
        cfg.kappa2 = 1.0 - cfg.kappa1;
    } else if (axis == "kappa2") {
        cfg.kappa1 = 1.0 - cfg.kappa2;
    } else if (axis == "mode" && cfg.mode != base_mode) {
        switch (cfg.mode) {
            case Mode::GenFL: cfg.kappa1 = 0.7; cfg.kappa2 = 0.3; break;
            case Mode::FLOnly: cfg.kappa1 = 1.0; cfg.kappa2 = 0.0; break;
            case Mode::AigcOnly: cfg.kappa1 = 0.0; cfg.kappa2 = 1.0; break;
        }
    }
    return cfg;
}

// Fully resolved member configs: child seed derived from (base seed, axis,
// value) and output redirected to "<out>/<axis>=<value>".
inline std::vector<ExperimentConfig> sweep_configs(const ExperimentConfig& base,
                                                   const std::string& axis,
                                                   const std::vector<std::string>& values) {
    if (values.empty()) throw std::invalid_argument("sweep: empty values list");
    std::vector<ExperimentConfig> members;
    members.reserve(values.size());
    for (const auto& v : values) {
        ExperimentConfig cfg = apply_axis_value(base, axis, v);
        cfg.seed = sweep_child_seed(base.seed, axis, v);
        cfg.output_dir =
            (std::filesystem::path(base.output_dir) / (axis + "=" + v)).string();
        cfg.validate();
        members.push_back(std::move(cfg));
    }
    return members;
}

struct SweepResult {
    std::string axis;
    std::vector<std::string> values;
    std::vector<MetricsTable> tables;
};

inline std::string sweep_to_csv(const SweepResult& result) {
    std::string out = "axis_key,axis_value,";
    out += kMetricsCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < result.tables.size(); ++i)
        for (const auto& row : result.tables[i].rows) {
            out += result.axis;
            out += ',';
            out += result.values[i];
            out += ',';
            out += metrics_row_to_csv(row);
            out += '\n';
        }
    return out;
}

// Runs every member (optionally in parallel; they are independent) and
// writes per-member dirs plus a combined sweep.csv under the base out dir.
inline SweepResult run_sweep(const ExperimentConfig& base, const std::string& axis,
                             const std::vector<std::string>& values, bool parallel = false) {
    const std::vector<ExperimentConfig> members = sweep_configs(base, axis, values);
    log_info("sweep: axis=" + axis + " members=" + std::to_string(members.size()));
    SweepResult result;
    result.axis = axis;
    result.values = values;
    result.tables.resize(members.size());
    if (parallel && members.size() > 1) {
        std::vector<std::future<MetricsTable>> futs;
        futs.reserve(members.size());
        for (const auto& cfg : members)
            futs.push_back(std::async(std::launch::async, [&cfg] { return run_to_dir(cfg); }));
        for (std::size_t i = 0; i < futs.size(); ++i) result.tables[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < members.size(); ++i) result.tables[i] = run_to_dir(members[i]);
    }
    write_file_atomic(std::filesystem::path(base.output_dir) / "sweep.csv",
                      sweep_to_csv(result));
    return result;
}

// Reads metric CSVs and renders the comparison chart. Series are labeled by
// mode; duplicate modes get a positional suffix to stay distinguishable.
inline std::string plot_csv_files(const std::vector<std::filesystem::path>& inputs) {
    if (inputs.empty()) throw std::invalid_argument("plot: no input files");
    std::vector<PlotSeries> series;
    std::vector<std::string> used;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto rows = metrics_from_csv(read_file(inputs[i]));
        PlotSeries s = accuracy_series(rows);
        if (std::find(used.begin(), used.end(), s.label) != used.end())
            s.label += " (" + std::to_string(i + 1) + ")";
        used.push_back(s.label);
        series.push_back(std::move(s));
    }
    return render_line_plot(series);
}

inline void plot_to_file(const std::vector<std::filesystem::path>& inputs,
                         const std::filesystem::path& out) {
    write_file_atomic(out, plot_csv_files(inputs));
    log_info("plot: wrote " + out.string());
}

}  // namespace genfl
