#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "leakqkd/keyrate.hpp"

namespace leakqkd {

enum class OutputFormat { Csv, JsonLines };

/// Everything a sweep needs. Unset keys keep the simulation defaults of the engine.
struct SweepConfig {
    LeakageCase leak_case = LeakageCase::FixedCoherent;
    std::vector<double> i_max{0.0};
    double d_min = 0.0;
    double d_max = 160.0;
    double d_step = 1.0;
    EngineSettings engine;  // channel, estimator, protocol, grid, gamma_w, p_cut, pm_enabled
    std::string output_path = "-";  // "-" is stdout
    OutputFormat format = OutputFormat::Csv;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

bool operator==(const SweepConfig& a, const SweepConfig& b);

/// Keys accepted by parse_config, in the order serialize_config writes them.
const std::vector<std::string>& config_keys();

/// Parses `key = value` lines. '#' starts a comment; lists are written [a, b, ...];
/// strings may be quoted. Unknown and repeated keys are errors. The result is validated.
SweepConfig parse_config(std::string_view text);
SweepConfig load_config(const std::string& path);

/// Text that parse_config maps back to an identical config.
std::string serialize_config(const SweepConfig& cfg);

/// d_min, d_min + d_step, ... up to d_max (inclusive up to round-off). Empty when d_min > d_max.
std::vector<double> sweep_distances(const SweepConfig& cfg);

struct SweepRow {
    double distance = 0.0;
    double i_max = 0.0;
    LeakageCase leak_case = LeakageCase::FixedCoherent;
    bool pm_enabled = false;
    OptimalPoint point;
};

/// One row per (i_max, distance) in ascending (i_max, distance) order.
/// `progress`, when set, is called after each row.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg,
                                const std::function<void(const SweepRow&)>& progress = {});

const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_jsonl(std::ostream& out, const std::vector<SweepRow>& rows);
void write_rows(std::ostream& out, const std::vector<SweepRow>& rows, OutputFormat format);

}  // namespace leakqkd
