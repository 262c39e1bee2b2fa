#pragma once

#include "semidiff/datasets.hpp"
#include "semidiff/diffusion.hpp"
#include "semidiff/optimizer.hpp"
#include "semidiff/pipeline.hpp"
#include "semidiff/sampler.hpp"
#include "semidiff/scalarization.hpp"
#include "semidiff/score_model.hpp"
#include "semidiff/task.hpp"

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace semidiff {

// Shipped environment families.
//   reach: s' = clamp(s + a + noise, 0, 1), r = 1 - 2 |s - goal|, init uniform on [init_lo, init_hi]
//   tiny:  states {0, 0.5, 1}; s' = nearest grid point to clamp(s + a, 0, 1); same reward; init uniform on the grid
// Experts are Gaussian with mean gain * (goal - s) + shift and std action_std.
struct EnvSpec {
    std::string kind = "reach";
    double goal = 0.5;
    double gamma = 0.9;
    double init_lo = 0.0;
    double init_hi = 1.0;
    double noise_std = 0.02;
    double gain = 0.5;
    double action_std = 0.1;
    double expert_shift = 0.0;
    double reward_scale = 1.0;  // >1 lets the reward leave [-1, 1]; clamped and counted

    void validate() const;
};

struct MdpEnv {
    int d_y = 1;  // state dimension
    int d_x = 1;  // action dimension
    double gamma = 0.9;
    std::function<Vec(Rng&)> init;
    std::function<Vec(const Vec& s, const Vec& a, Rng& rng)> transition;
    std::function<double(const Vec& s, const Vec& a)> raw_reward;
    std::shared_ptr<std::atomic<std::size_t>> reward_violations = std::make_shared<std::atomic<std::size_t>>(0);

    // Reward clamped into [-1, 1]; out-of-range raw values are counted.
    double reward(const Vec& s, const Vec& a) const;
    int horizon() const;  // ceil(log(1e-4) / log(gamma)), 1 when gamma = 0
};

MdpEnv make_env(const EnvSpec& spec);
// Expert pi*(a | s) as a conditional task with y = state, x = action.
ConditionalTask make_expert(const EnvSpec& spec);

// Acts on a batch of states (d_y x B), one action column per state.
struct Policy {
    std::function<Mat(const Mat& states, Rng& rng)> act;
    std::shared_ptr<std::size_t> clip_events;  // set by truncated diffusion policies
};

Policy gaussian_policy(const ConditionalTask& expert);
// Diffusion policy: each action drawn by the reverse sampler conditioned on the
// state; with truncation configured, clipped draws are counted.
Policy diffusion_policy(const ScoreField& score, const SamplerConfig& cfg);

int horizon_for(double gamma);

struct VisitationBatch {
    Mat states;
    Mat actions;
    std::vector<int> times;
    std::size_t rollouts = 0;
};

// Draws n (s_t, a_t) pairs with t ~ (1 - gamma) gamma^t conditioned on t < H.
// One pair per independent rollout unless reuse_rollouts, where each rollout of
// length H contributes pairs_per_rollout pairs (correlated). Rollouts run in
// lockstep so a policy acts on all live states at once.
VisitationBatch visitation_sample(const MdpEnv& env, const Policy& policy, std::size_t n, Rng& rng,
                                  bool reuse_rollouts = false, int pairs_per_rollout = 8);

LabeledDataset collect_expert_demos(const MdpEnv& env, const ConditionalTask& expert, std::size_t n, Rng& rng,
                                    int task = 0);

PseudoDataset collect_onpolicy_pseudo(const MdpEnv& env, const ScoreField& specialist, std::size_t N,
                                      const SamplerConfig& cfg, Rng& rng, int task = 0, bool reuse_rollouts = false);

struct ValueEstimate {
    double value = 0.0;
    double std_err = 0.0;
    double truncation_bias = 0.0;  // gamma^H / (1 - gamma)
    std::size_t n_rollouts = 0;
};

// Mean discounted return over n_rollouts rollouts of horizon H. Environment
// randomness comes from env_seed and policy randomness from policy_seed, so two
// policies evaluated with the same env_seed see the same initial states and
// transition noise.
ValueEstimate value_estimate(const MdpEnv& env, const Policy& policy, std::size_t n_rollouts,
                             std::uint64_t env_seed, std::uint64_t policy_seed);

struct GapEstimate {
    double gap = 0.0;
    double std_err = 0.0;  // of the paired difference
    ValueEstimate expert;
    ValueEstimate learned;
};

// V(expert) - V(learned) on shared environment randomness.
GapEstimate suboptimality(const MdpEnv& env, const Policy& expert, const Policy& learned, std::size_t n_rollouts,
                          std::uint64_t seed);

// Exact oracles for the tiny env: discounted state occupancy and state values.
struct TinyOracle {
    Vec grid;          // the three states
    Mat transition;    // P[i, j] = P(s' = grid_j | s = grid_i) under the policy
    Vec occupancy;     // (1 - gamma) rho^T (I - gamma P)^{-1}
    Vec values;        // (I - gamma P)^{-1} r
    double value = 0.0;  // rho^T values
};
TinyOracle tiny_oracle(const EnvSpec& spec, const ConditionalTask& policy);

// Performance-difference check: gap <= 2 / (1 - gamma)^2 * E_{s ~ d(expert)} TV(pi*(.|s), pi(.|s)).
struct PerformanceDifference {
    GapEstimate gap;
    double mean_tv = 0.0;
    double mean_tv_se = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // 3 x std errors of gap and bound
    bool holds() const { return gap.gap <= bound + margin; }
};
PerformanceDifference performance_difference_check(const MdpEnv& env, const ConditionalTask& expert,
                                                   const Policy& learned, std::size_t n_rollouts, int state_bins,
                                                   int samples_per_state, std::uint64_t seed);

struct MdpPipelineConfig {
    std::vector<EnvSpec> envs;
    ModelClassSpec specialist;
    ModelClassSpec generalist;
    Schedule schedule;
    SamplerConfig policy_sampler;  // 100 steps by default, truncated
    // Sampler for on-policy pseudo-data collection; unset means policy_sampler.
    std::optional<SamplerConfig> pseudo_sampler;
    Scalarization scalarization = Scalarization::linear(Vec::Ones(1));
    OptimizerConfig specialist_opt;
    OptimizerConfig generalist_opt;
    std::size_t n_labeled = 200;
    std::size_t n_pseudo = 2000;
    std::size_t n_rollouts = 1000;
    bool reuse_rollouts = false;
    bool include_labeled_in_stage2 = false;
    bool run_baseline = true;
    bool allow_regime_violation = false;
    std::uint64_t seed = 0;
    int workers = 1;

    MdpPipelineConfig();
    std::vector<std::string> validate() const;
    // The equivalent distribution-level pipeline config (specs, optimizers, seeds).
    PipelineConfig as_pipeline(const std::vector<ConditionalTask>& experts) const;
    // policy_sampler with truncation filled in; radius <= 0 becomes the default for (n_pseudo, K).
    SamplerConfig resolved_policy_sampler() const;
};

struct MdpResult {
    std::vector<ScoreModel> specialists;
    std::vector<LabeledDataset> demos;
    std::vector<PseudoDataset> pseudo;
    std::optional<ScoreModel> generalist;
    std::optional<ScoreModel> baseline;
    TrainTrace generalist_trace, baseline_trace;
    std::vector<GapEstimate> specialist_gaps;
    std::vector<GapEstimate> generalist_gaps;
    std::vector<GapEstimate> baseline_gaps;
    double scalarized_gap = 0.0;
    std::optional<double> baseline_scalarized_gap;
    std::size_t clip_events = 0;
    std::size_t reward_violations = 0;
    std::vector<std::string> warnings;
    std::uint64_t seed = 0;

    Vec gaps() const;
    Vec baseline_gap_vector() const;
};

MdpResult run_mdp_pipeline(const MdpPipelineConfig& cfg);

}  // namespace semidiff
