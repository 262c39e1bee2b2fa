#pragma once

#include "semidiff/rng.hpp"
#include "semidiff/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace semidiff {

enum class SamplerKind { sde, ode };
enum class OverflowPolicy { clip, fail };

// Pseudo-samples restricted to the box B_R = [-R, R]^{d_x}.
struct Truncation {
    double radius = 4.0;
    int max_retries = 64;
    OverflowPolicy overflow = OverflowPolicy::clip;
};

struct SamplerConfig {
    int n_steps = 200;
    double t_max = 3.0;
    double t0 = 1e-3;
    SamplerKind kind = SamplerKind::sde;
    std::optional<Truncation> truncation;

    void validate() const;
};

// Default radius sqrt(2 log(N K)) + 2.
double default_truncation_radius(std::size_t n_pseudo, std::size_t k_tasks);

class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Euler-Maruyama on dX = (X + 2 s(X, y, T - tau)) dtau + sqrt(2) dW from
// X_0 ~ N(0, I), uniform steps, stopped at forward time t0. One column per
// condition in `y`.
Mat reverse_sde_sample(const ScoreField& score, const Mat& y, const SamplerConfig& cfg, Rng& rng);
Vec reverse_sde_sample(const ScoreField& score, const Vec& y, const SamplerConfig& cfg, Rng& rng);

// Classical RK4 on the probability-flow ODE dX = (X + s(X, y, T - tau)) dtau.
Mat reverse_ode_sample(const ScoreField& score, const Mat& y, const SamplerConfig& cfg, Rng& rng);
// Deterministic integration from a given initial state.
Mat integrate_flow_ode(const ScoreField& score, const Mat& x_init, const Mat& y, const SamplerConfig& cfg);

// Dispatches on cfg.kind (no truncation).
Mat sample_model(const ScoreField& score, const Mat& y, const SamplerConfig& cfg, Rng& rng);

struct TruncatedBatch {
    Mat x;
    std::vector<char> accepted;  // per column
    std::vector<int> retries;    // per column, redraws after the first attempt
    std::size_t attempts = 0;
    std::size_t accepted_count = 0;
    std::size_t clipped = 0;

    double acceptance_rate() const {
        return attempts ? static_cast<double>(accepted_count) / static_cast<double>(attempts) : 0.0;
    }
};

// Rejection sampling into B_R: each column is redrawn until ||x||_inf <= R or
// max_retries is exhausted, then the overflow policy applies.
TruncatedBatch sample_truncated(const ScoreField& score, const Mat& y, const SamplerConfig& cfg, Rng& rng);

}  // namespace semidiff
