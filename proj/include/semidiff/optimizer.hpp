#pragma once

#include "semidiff/types.hpp"

#include <cstdint>
#include <string>

namespace semidiff {

struct OptimizerConfig {
    std::string algorithm = "adam";
    double lr = 5e-3;
    double lr_final_frac = 0.05;  // cosine decay to lr * lr_final_frac
    int steps = 2000;
    int batch_size = 64;
    int n_mc = 8;                 // draws per data point per step, resampled each step
    int eval_every = 50;
    double holdout_frac = 0.1;
    int holdout_mc = 16;          // frozen draws per held-out point
    double tau_start = 0.5;       // smoothed-Chebyshev temperature schedule
    double tau_end = 0.01;
    bool smooth_chebyshev = true; // false: exact argmax subgradient
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
    double lr_at(int step) const;
    double tau_at(int step) const;  // geometric annealing
};

class Adam {
public:
    Adam(Eigen::Index n, const OptimizerConfig& cfg);
    void step(Vec& params, const Vec& grad, double lr);

private:
    Vec m_, v_;
    double beta1_, beta2_, eps_;
    long t_ = 0;
};

}  // namespace semidiff
