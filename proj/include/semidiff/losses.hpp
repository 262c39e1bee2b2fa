#pragma once

#include "semidiff/datasets.hpp"
#include "semidiff/diffusion.hpp"
#include "semidiff/task.hpp"

namespace semidiff {

// Monte Carlo estimate of L_P(s) = E ||s(x_t, y, t) - grad log p_t(x_t | y)||^2
// with the task's closed-form score.
LossEstimate population_error(const ConditionalTask& task, const ScoreField& s, const Schedule& sched,
                              std::size_t n_draws, Rng& rng);

// Paired DSM estimate of E[l(s) - l(s_star)] on the same draws; the Monte
// Carlo face of the DSM identity.
LossEstimate dsm_excess(const ConditionalTask& task, const ScoreField& s, const Schedule& sched,
                        std::size_t n_draws, Rng& rng);

// Per-point paired differences l(x, y, f) - l(x, y, h) with shared (t, noise)
// draws for both terms.
Vec stage2_terms(const ScoreField& f, const ScoreField& specialist, const DsmDraws& draws,
                 Eigen::Index n_points);

// (1/N) sum_i [l(x_i, y_i, f) - l(x_i, y_i, h)] over a pseudo dataset, with
// sched.n_mc shared draws per point. May be negative.
LossEstimate stage2_task_loss(const PseudoDataset& pseudo, const ScoreField& f, const ScoreField& specialist,
                              const Schedule& sched, Rng& rng);

}  // namespace semidiff
