#pragma once

#include "semidiff/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace semidiff {

// "<semver>+g<commit>" when built from a git checkout, otherwise "<semver>".
std::string artifact_version();

// One long-format results row. Empty n / N / lambda / task mean "not applicable".
struct ResultRow {
    std::string mode;
    std::string method;
    std::uint64_t seed = 0;
    std::string n;
    std::string N;
    std::string lambda;
    std::string scalarization;
    std::string task;
    std::string metric;
    double value = 0.0;
    double std_err = 0.0;
};

struct TimingRow {
    std::uint64_t seed = 0;
    std::string cell;
    double seconds = 0.0;
};

struct RunSummary {
    std::filesystem::path dir;
    std::size_t rows = 0;
    std::vector<std::string> warnings;
};

// Output directory: explicit --out, else config output_dir, else
// $SEMIDIFF_OUT_ROOT (or ./runs) / <name>-<hash8>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const std::string& cli_out);

void apply_overrides(ExperimentConfig& cfg, std::optional<std::uint64_t> seed_override, std::optional<int> workers);

// Human-readable plan for --dry-run: the resolved config and the job list.
std::string describe_plan(const ExperimentConfig& cfg);

// Runs the configured experiment, writing manifest.json, results.csv,
// timings.csv, checkpoints/ and pseudo/ under out_dir.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& config_hash,
                       const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

// Aggregates results.csv across seeds into report.csv (median, IQR) and
// report.md. Output depends only on results.csv and manifest.json.
struct ReportSummary {
    std::size_t cells = 0;
    std::size_t incomplete = 0;
};
ReportSummary write_report(const std::filesystem::path& dir);

}  // namespace semidiff
