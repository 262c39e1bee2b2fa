#include "semidiff/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace semidiff {

double alpha(double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("alpha: time must be non-negative");
    return std::exp(-t);
}

double sigma2(double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("sigma2: time must be non-negative");
    return -std::expm1(-2.0 * t);
}

void Schedule::validate() const {
    if (!(t0 > 0.0) || !(t0 < t_max))
        throw std::invalid_argument("schedule: require 0 < t0 < t_max");
    if (n_mc < 1) throw std::invalid_argument("schedule: n_mc must be positive");
}

double Schedule::sample_time(Rng& rng) const { return uniform(t0, t_max, rng); }

LossEstimate LossEstimate::from_terms(std::span<const double> terms) {
    LossEstimate est;
    est.n_draws = terms.size();
    if (terms.empty()) return est;
    double mean = 0.0;
    for (double v : terms) mean += v;
    mean /= static_cast<double>(terms.size());
    double ss = 0.0;
    for (double v : terms) ss += (v - mean) * (v - mean);
    est.value = mean;
    if (terms.size() > 1) {
        const double var = ss / static_cast<double>(terms.size() - 1);
        est.std_err = std::sqrt(var / static_cast<double>(terms.size()));
    }
    return est;
}

LossEstimate LossEstimate::from_terms(const Vec& terms) {
    return from_terms(std::span<const double>(terms.data(), static_cast<std::size_t>(terms.size())));
}

Vec sample_forward(const Vec& x0, double t, Rng& rng) {
    const double a = alpha(t);
    const double s = std::sqrt(sigma2(t));
    return a * x0 + s * standard_normal(x0.size(), 1, rng).col(0);
}

Vec kernel_score(const Vec& x_t, const Vec& x0, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("kernel_score: requires t > 0");
    return -(x_t - alpha(t) * x0) / sigma2(t);
}

DsmDraws draw_dsm(const Mat& x0, const Mat& y, const Schedule& sched, int n_mc, Rng& rng) {
    if (x0.cols() != y.cols()) throw std::invalid_argument("draw_dsm: x and y column mismatch");
    if (n_mc < 1) throw std::invalid_argument("draw_dsm: n_mc must be positive");
    const Eigen::Index n = x0.cols();
    const Eigen::Index total = n * n_mc;
    DsmDraws d;
    d.x_t.resize(x0.rows(), total);
    d.y.resize(y.rows(), total);
    d.t.resize(total);
    d.target.resize(x0.rows(), total);
    d.source.resize(static_cast<std::size_t>(total));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int m = 0; m < n_mc; ++m, ++col) {
            const double t = sched.sample_time(rng);
            const double a = std::exp(-t);
            const double s = std::sqrt(-std::expm1(-2.0 * t));
            for (Eigen::Index r = 0; r < x0.rows(); ++r) {
                const double eps = normal(rng);
                d.x_t(r, col) = a * x0(r, i) + s * eps;
                d.target(r, col) = -eps / s;
            }
            d.y.col(col) = y.col(i);
            d.t(col) = t;
            d.source[static_cast<std::size_t>(col)] = i;
        }
    }
    return d;
}

Vec dsm_terms(const ScoreField& s, const DsmDraws& draws) {
    const Mat out = s(draws.x_t, draws.y, draws.t);
    return (out - draws.target).colwise().squaredNorm().transpose();
}

Vec dsm_point_means(const Vec& terms, const DsmDraws& draws, Eigen::Index n_points) {
    Vec sum = Vec::Zero(n_points);
    Vec count = Vec::Zero(n_points);
    for (Eigen::Index j = 0; j < terms.size(); ++j) {
        const auto i = draws.source[static_cast<std::size_t>(j)];
        sum(i) += terms(j);
        count(i) += 1.0;
    }
    return sum.cwiseQuotient(count.cwiseMax(1.0));
}

LossEstimate dsm_loss(const Vec& x, const Vec& y, const ScoreField& s, const Schedule& sched,
                      Rng& rng) {
    sched.validate();
    const DsmDraws draws = draw_dsm(x, y, sched, sched.n_mc, rng);
    return LossEstimate::from_terms(dsm_terms(s, draws));
}

}  // namespace semidiff
