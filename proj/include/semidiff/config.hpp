#pragma once

#include "semidiff/mdp.hpp"
#include "semidiff/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace semidiff {

enum class Mode { distribution, mdp, sweep, pareto, axioms };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigNotFound : public ConfigError {
public:
    using ConfigError::ConfigError;
};

struct SweepSpec {
    std::vector<std::size_t> n_grid;
    std::vector<std::size_t> N_grid;
    bool baseline = true;
};

struct ParetoSpec {
    std::vector<Vec> lambdas;
};

struct AxiomSpec {
    int k = 3;
    std::size_t n_samples = 10000;
    std::vector<Scalarization> kinds;  // empty: linear (uniform), chebyshev, lp(1), lp(2), lp(inf)
};

struct ExperimentConfig {
    Mode mode = Mode::distribution;
    std::string name = "experiment";
    std::vector<std::uint64_t> seeds{0};
    std::string output_dir;
    PipelineConfig pipeline;  // tasks, specs, optimizers, sampler, eval
    MdpPipelineConfig mdp;    // envs, rollouts, policy sampler
    SweepSpec sweep;
    ParetoSpec pareto;
    AxiomSpec axioms;
    bool save_checkpoints = true;
    bool save_pseudo = true;

    // Throws ConfigError on a config the selected mode cannot run.
    std::vector<std::string> validate() const;
};

// Parses a config document. Unknown keys anywhere are rejected with their path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// The fully resolved config (all defaults filled in); parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& cfg);
// 16 hex digits of FNV-1a over the canonical dump of to_json(cfg).
std::string config_hash(const ExperimentConfig& cfg);

nlohmann::json to_json(const Scalarization& s);
Scalarization scalarization_from_json(const nlohmann::json& j, const std::string& path = "scalarization");
nlohmann::json to_json(const SamplerConfig& s);
nlohmann::json to_json(const ModelClassSpec& s);

}  // namespace semidiff
