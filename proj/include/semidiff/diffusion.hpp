#pragma once

#include "semidiff/rng.hpp"
#include "semidiff/types.hpp"

#include <cstddef>
#include <span>

namespace semidiff {

// Variance-preserving OU forward process dX = -X dt + sqrt(2) dW.
double alpha(double t);   // e^{-t}
double sigma2(double t);  // 1 - e^{-2t}

struct Schedule {
    double t0 = 1e-3;     // early-stopping time
    double t_max = 3.0;   // terminal time
    int n_mc = 8;         // (t, x_t) draws per data point per loss evaluation

    void validate() const;
    double sample_time(Rng& rng) const;  // Unif[t0, t_max]
};

struct LossEstimate {
    double value = 0.0;
    double std_err = 0.0;
    std::size_t n_draws = 0;

    static LossEstimate from_terms(std::span<const double> terms);
    static LossEstimate from_terms(const Vec& terms);
};

Vec sample_forward(const Vec& x0, double t, Rng& rng);

// Score of the transition kernel, -(x_t - alpha_t x0) / sigma_t^2.
Vec kernel_score(const Vec& x_t, const Vec& x0, double t);

// A frozen set of denoising draws: column j is (x_t, y, t, kernel score) built
// from data column source(j).
struct DsmDraws {
    Mat x_t;
    Mat y;
    Vec t;
    Mat target;
    std::vector<Eigen::Index> source;

    Eigen::Index size() const { return t.size(); }
};

// n_mc draws per column of (x0, y). Draw order is column-major in the data:
// all draws of column 0 first.
DsmDraws draw_dsm(const Mat& x0, const Mat& y, const Schedule& sched, int n_mc, Rng& rng);

// Per-draw squared error ||s(x_t, y, t) - target||^2.
Vec dsm_terms(const ScoreField& s, const DsmDraws& draws);

// Per-data-point mean over its n_mc draws.
Vec dsm_point_means(const Vec& terms, const DsmDraws& draws, Eigen::Index n_points);

// Monte Carlo estimate of l(x, y, s) with sched.n_mc draws.
LossEstimate dsm_loss(const Vec& x, const Vec& y, const ScoreField& s, const Schedule& sched,
                      Rng& rng);

}  // namespace semidiff
