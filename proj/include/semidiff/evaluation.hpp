#pragma once

#include "semidiff/pipeline.hpp"
#include "semidiff/sampler.hpp"
#include "semidiff/task.hpp"

#include <functional>
#include <string>
#include <vector>

namespace semidiff {

struct TvEstimate {
    double value = 0.0;
    double std_err = 0.0;
    std::string method;      // "histogram" or "grid-quadrature"
    int resolution = 0;      // bins (histogram) or nodes (quadrature)
    std::size_t n_samples = 0;
};

inline constexpr std::size_t kMinTvSamples = 10000;

// Binned L1 distance (1/2) sum |p_hat(bin) - P(bin | y)| between model samples
// (d_x x n) and the task's conditional at y, true bin masses by quadrature.
// Bins span +-6 std of the conditional joined with the sample range; for d_x = 2
// the grid is ceil(sqrt(bins)) per axis. Mass outside the grid counts fully.
TvEstimate tv_conditional(const Mat& samples, const ConditionalTask& task, const Vec& y, int bins,
                          std::size_t min_samples = kMinTvSamples);

// Density-vs-density TV on [lo, hi] by composite Gauss-Legendre quadrature.
TvEstimate tv_between(const std::function<double(double)>& p, const std::function<double(double)>& q, double lo,
                      double hi, int panels = 400);
// Two 1D task conditionals; the integration range covers both at +-10 std.
TvEstimate tv_between(const ConditionalTask& a, const Vec& y_a, const ConditionalTask& b, const Vec& y_b);

// E_{y ~ P^Y} TV(P_s(.|y), P(.|y)): n_conditions conditions from the task's
// marginal, samples_per_condition reverse-SDE draws each. std_err is across
// conditions.
TvEstimate tv_expected(const ScoreField& model, const ConditionalTask& task, int n_conditions,
                       int samples_per_condition, int bins, const SamplerConfig& sampler, Rng& rng);

struct ParetoPoint {
    std::string label;          // scalarization id
    Vec lambda;
    Vec tv, tv_se;
    Vec lp, lp_se;
    std::string checkpoint_id;
    bool dominated = false;
};

struct ParetoFront {
    std::vector<ParetoPoint> points;
    std::vector<std::vector<ParetoPoint>> per_seed;  // [seed][lambda]
    std::vector<std::uint64_t> seeds;
};

// a dominates b beyond margin m: a_k + m_k <= b_k for all k, strictly for one.
bool dominates(const Vec& a, const Vec& b, const Vec& margin);
// Flags every point dominated by another point; margin is the combined
// (root-sum-square) TV std error of the pair.
void flag_dominated(std::vector<ParetoPoint>& points);

// One generalist per lambda on shared specialists and pseudo-data, repeated over
// seeds; points hold the across-seed mean and standard error.
ParetoFront pareto_sweep(const PipelineConfig& base, const std::vector<Vec>& lambdas,
                         const std::vector<std::uint64_t>& seeds);

struct SweepRow {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::size_t N = 0;           // 0 for the labeled-only baseline
    std::string method;          // "semi" or "labeled"
    std::string scalarization;
    ModelReport report;
    double runtime_s = 0.0;
};

// Full factorial over (n, N, seed). Labeled sets are nested prefixes across n and
// pseudo-sets nested prefixes across N; the baseline adds one row per (n, seed).
std::vector<SweepRow> complexity_sweep(const PipelineConfig& base, const std::vector<std::size_t>& n_grid,
                                       const std::vector<std::size_t>& N_grid,
                                       const std::vector<std::uint64_t>& seeds, bool include_baseline);

}  // namespace semidiff
