#include "semidiff/losses.hpp"

#include <stdexcept>

namespace semidiff {

LossEstimate population_error(const ConditionalTask& task, const ScoreField& s, const Schedule& sched,
                              std::size_t n_draws, Rng& rng) {
    sched.validate();
    if (n_draws == 0) throw std::invalid_argument("population_error: n_draws must be positive");
    const auto n = static_cast<Eigen::Index>(n_draws);
    const auto [x0, y] = task.sample_pairs(n, rng);
    const DsmDraws d = draw_dsm(x0, y, sched, 1, rng);
    const Mat truth = task.oracle_score(d.x_t, d.y, d.t);
    const Mat model = s(d.x_t, d.y, d.t);
    return LossEstimate::from_terms(Vec((model - truth).colwise().squaredNorm().transpose()));
}

LossEstimate dsm_excess(const ConditionalTask& task, const ScoreField& s, const Schedule& sched,
                        std::size_t n_draws, Rng& rng) {
    sched.validate();
    if (n_draws == 0) throw std::invalid_argument("dsm_excess: n_draws must be positive");
    const auto [x0, y] = task.sample_pairs(static_cast<Eigen::Index>(n_draws), rng);
    const DsmDraws d = draw_dsm(x0, y, sched, 1, rng);
    const Vec model = dsm_terms(s, d);
    const Vec oracle = dsm_terms(task.oracle_field(), d);
    return LossEstimate::from_terms(Vec(model - oracle));
}

Vec stage2_terms(const ScoreField& f, const ScoreField& specialist, const DsmDraws& draws,
                 Eigen::Index n_points) {
    const Vec diff = dsm_terms(f, draws) - dsm_terms(specialist, draws);
    return dsm_point_means(diff, draws, n_points);
}

LossEstimate stage2_task_loss(const PseudoDataset& pseudo, const ScoreField& f, const ScoreField& specialist,
                              const Schedule& sched, Rng& rng) {
    sched.validate();
    if (pseudo.size() == 0) throw std::invalid_argument("stage2_task_loss: empty pseudo dataset");
    const DsmDraws d = draw_dsm(pseudo.x, pseudo.y, sched, sched.n_mc, rng);
    return LossEstimate::from_terms(stage2_terms(f, specialist, d, pseudo.size()));
}

}  // namespace semidiff
