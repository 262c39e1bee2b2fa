#pragma once

#include "semidiff/datasets.hpp"
#include "semidiff/diffusion.hpp"
#include "semidiff/optimizer.hpp"
#include "semidiff/scalarization.hpp"
#include "semidiff/score_model.hpp"
#include "semidiff/task.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semidiff {

struct TrainTrace {
    std::vector<int> step;
    std::vector<double> train_objective;  // scalarized minibatch objective at eval points
    std::vector<double> holdout;          // exact-S held-out objective at eval points
    int best_step = 0;
    double best_holdout = 0.0;
};

struct TrainResult {
    ScoreModel model;
    TrainTrace trace;
};

class TrainingDivergence : public std::runtime_error {
public:
    TrainingDivergence(const std::string& what, TrainTrace trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const TrainTrace& trace() const { return trace_; }

private:
    TrainTrace trace_;
};

// One objective of a scalarized DSM fit: training pairs, held-out pairs and an
// optional frozen reference score subtracted on shared draws.
struct ObjectiveData {
    Mat x, y;
    Mat holdout_x, holdout_y;
    std::optional<ScoreField> reference;
};

// Budgeted Adam minimization of S(u_1, ..., u_K) with u_k the (reference-
// subtracted) mean DSM loss of objective k. Iterates are compared by exact S on
// frozen held-out draws every eval_every steps; a later iterate replaces the
// selected one unless it is worse by more than two standard errors of the
// paired held-out difference.
TrainResult train_scalarized(const std::vector<ObjectiveData>& objectives, const ModelClassSpec& spec,
                             const Scalarization& s, const OptimizerConfig& opt, const Schedule& sched,
                             const std::optional<Vec>& init_params = std::nullopt);

// Splits columns into (train, holdout) by a seeded shuffle; holdout gets
// round(frac * n) points, or the train set itself when that would be empty.
ObjectiveData split_holdout(const Mat& x, const Mat& y, double frac, std::uint64_t seed);

TrainResult train_specialist(const LabeledDataset& data, const ModelClassSpec& spec, const OptimizerConfig& opt,
                             const Schedule& sched);

PseudoDataset generate_pseudo(const ScoreModel& specialist, const ConditionPool& pool, const SamplerConfig& cfg,
                              Rng& rng, const std::string& specialist_id = {});

TrainResult train_generalist(const std::vector<PseudoDataset>& pseudo, const std::vector<ScoreModel>& specialists,
                             const ModelClassSpec& spec, const Scalarization& s, const OptimizerConfig& opt,
                             const Schedule& sched, const std::vector<LabeledDataset>* extra_labeled = nullptr,
                             const std::optional<Vec>& init_params = std::nullopt);

// Regresses a model directly onto the task's closed-form score (no DSM noise):
// the realizability check that the class contains the true score.
TrainResult fit_oracle(const ConditionalTask& task, const ModelClassSpec& spec, const OptimizerConfig& opt,
                       const Schedule& sched);

TrainResult train_labeled_only(const std::vector<LabeledDataset>& datasets, const ModelClassSpec& spec,
                               const Scalarization& s, const OptimizerConfig& opt, const Schedule& sched);

struct EvalConfig {
    int n_conditions = 8;
    int samples_per_condition = 10000;
    int bins = 100;
    SamplerConfig sampler;
    std::size_t lp_draws = 20000;
};

struct TaskMetrics {
    double tv = 0.0;
    double tv_se = 0.0;
    double lp = 0.0;
    double lp_se = 0.0;
};

struct ModelReport {
    std::vector<TaskMetrics> per_task;
    double scalarized_tv = 0.0;
    double scalarized_lp = 0.0;

    Vec tv() const;
    Vec lp() const;
};

// Per-task TV and L_P of a score field plus their exact scalarizations. The
// evaluation streams depend only on (seed, task), so models evaluated with the
// same seed share randomness.
ModelReport evaluate_model(const ScoreField& model, const std::vector<ConditionalTask>& tasks,
                           const Scalarization& s, const EvalConfig& eval, const Schedule& sched,
                           std::uint64_t seed);

struct PipelineConfig {
    std::vector<ConditionalTask> tasks;
    ModelClassSpec specialist;
    ModelClassSpec generalist;
    Schedule schedule;
    SamplerConfig pseudo_sampler;  // truncation radius <= 0 selects the default radius
    Scalarization scalarization = Scalarization::linear(Vec::Ones(1));
    OptimizerConfig specialist_opt;
    OptimizerConfig generalist_opt;
    std::size_t n_labeled = 200;
    std::size_t n_pseudo = 2000;
    std::uint64_t seed = 0;
    bool include_labeled_in_stage2 = false;
    bool warm_start = false;
    bool run_baseline = true;
    bool evaluate_specialists = true;
    bool allow_regime_violation = false;
    EvalConfig eval;
    int workers = 1;

    // Throws on invalid configs; returns warning-grade diagnostics.
    std::vector<std::string> validate() const;
    SamplerConfig resolved_pseudo_sampler() const;
};

struct PipelineResult {
    std::vector<ScoreModel> specialists;
    std::vector<TrainTrace> specialist_traces;
    std::vector<LabeledDataset> labeled;
    std::vector<PseudoDataset> pseudo;
    std::optional<ScoreModel> generalist;
    TrainTrace generalist_trace;
    std::optional<ScoreModel> baseline;
    TrainTrace baseline_trace;
    std::optional<ModelReport> specialist_report;  // specialist k evaluated on task k
    ModelReport generalist_report;
    std::optional<ModelReport> baseline_report;
    std::vector<std::string> warnings;
    std::uint64_t seed = 0;
};

class PipelineError : public std::runtime_error {
public:
    PipelineError(const std::string& stage, int task, const std::string& what);
    const std::string& stage() const { return stage_; }
    int task() const { return task_; }

private:
    std::string stage_;
    int task_;
};

// Stage 1 building blocks, shared by the pipeline and the sweeps.
std::vector<LabeledDataset> draw_labeled(const PipelineConfig& cfg, std::size_t n);
std::vector<ConditionPool> draw_pools(const PipelineConfig& cfg, std::size_t n_pool);
std::vector<TrainResult> train_specialists(const PipelineConfig& cfg, const std::vector<LabeledDataset>& labeled);
std::vector<PseudoDataset> generate_all_pseudo(const PipelineConfig& cfg, const std::vector<ScoreModel>& specialists,
                                               const std::vector<ConditionPool>& pools);

// Seeded copies of the configured stage-2 and baseline specs/optimizers; the
// sweeps use these so their cells match run_pipeline.
ModelClassSpec seeded_generalist_spec(const PipelineConfig& cfg);
OptimizerConfig seeded_generalist_opt(const PipelineConfig& cfg);
OptimizerConfig seeded_baseline_opt(const PipelineConfig& cfg);

PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace semidiff
