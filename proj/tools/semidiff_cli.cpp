// semidiff command-line tool: run experiments from a JSON config and build
// seed-aggregated reports from their results directories.

#include "semidiff/experiment.hpp"
#include "semidiff/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace {

enum ExitCode : int {
    kOk = 0,
    kInvalidConfig = 2,
    kConfigNotFound = 3,
    kRunFailed = 4,
    kReportFailed = 5,
};

int fail(int code, const std::string& kind, const std::string& message, const std::filesystem::path& dir = {},
         const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json err = {{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    for (auto it = extra.begin(); it != extra.end(); ++it) err["error"][it.key()] = it.value();
    std::cerr << err.dump() << "\n";
    if (!dir.empty() && std::filesystem::is_directory(dir)) std::ofstream(dir / "error.json") << err.dump(2) << "\n";
    return code;
}

int default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n ? static_cast<int>(n) : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semidiff: semi-supervised multi-objective diffusion experiments"};
    app.set_version_flag("--version", semidiff::artifact_version());
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed_override;
    int workers = default_workers();
    bool dry_run = false;

    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--seed-override", seed_override, "replace the config's seed list with this single seed");
    run->add_option("--workers", workers, "worker threads for independent per-task jobs")->check(CLI::PositiveNumber);
    run->add_flag("--dry-run", dry_run, "validate the config and print the resolved plan without running");
    run->add_option("--out", out_dir, "results directory (default: $SEMIDIFF_OUT_ROOT or ./runs)");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "aggregate a results directory into report.csv and report.md");
    report->add_option("dir", report_dir, "results directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*run) {
        semidiff::ExperimentConfig cfg;
        try {
            cfg = semidiff::load_config(config_path);
            semidiff::apply_overrides(cfg, seed_override, workers);
            for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << "\n";
        } catch (const semidiff::ConfigNotFound& e) {
            return fail(kConfigNotFound, "config_not_found", e.what());
        } catch (const std::exception& e) {
            return fail(kInvalidConfig, "invalid_config", e.what());
        }
        const auto dir = semidiff::resolve_output_dir(cfg, out_dir);
        if (dry_run) {
            std::cout << "output: " << dir.string() << "\n" << semidiff::describe_plan(cfg);
            return kOk;
        }
        try {
            const auto summary = semidiff::run_experiment(cfg, dir);
            for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << summary.dir.string() << "\n";
            return kOk;
        } catch (const semidiff::PipelineError& e) {
            return fail(kRunFailed, "pipeline_error", e.what(), dir, {{"stage", e.stage()}, {"task", e.task()}});
        } catch (const std::exception& e) {
            return fail(kRunFailed, "run_failed", e.what(), dir);
        }
    }

    try {
        const auto rs = semidiff::write_report(report_dir);
        std::cout << rs.cells << " cells";
        if (rs.incomplete) std::cout << ", " << rs.incomplete << " incomplete";
        std::cout << "\n";
        return kOk;
    } catch (const std::exception& e) {
        return fail(kReportFailed, "report_failed", e.what());
    }
}
