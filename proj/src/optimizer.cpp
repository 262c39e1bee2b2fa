#include "semidiff/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace semidiff {

void OptimizerConfig::validate() const {
    if (algorithm != "adam") throw std::invalid_argument("optimizer: unsupported algorithm '" + algorithm + "'");
    if (!(lr > 0.0)) throw std::invalid_argument("optimizer: step size must be positive");
    if (steps < 0) throw std::invalid_argument("optimizer: steps must be non-negative");
    if (batch_size < 1 || n_mc < 1 || eval_every < 1 || holdout_mc < 1)
        throw std::invalid_argument("optimizer: batch_size, n_mc, eval_every, holdout_mc must be positive");
    if (!(holdout_frac >= 0.0 && holdout_frac < 1.0))
        throw std::invalid_argument("optimizer: holdout_frac must lie in [0, 1)");
    if (!(lr_final_frac > 0.0 && lr_final_frac <= 1.0))
        throw std::invalid_argument("optimizer: lr_final_frac must lie in (0, 1]");
    if (!(tau_start > 0.0 && tau_end > 0.0)) throw std::invalid_argument("optimizer: tau schedule must be positive");
}

double OptimizerConfig::lr_at(int step) const {
    if (steps <= 1) return lr;
    const double frac = static_cast<double>(step) / static_cast<double>(steps - 1);
    const double cos_w = 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
    return lr * (lr_final_frac + (1.0 - lr_final_frac) * cos_w);
}

double OptimizerConfig::tau_at(int step) const {
    if (steps <= 1) return tau_end;
    const double frac = static_cast<double>(step) / static_cast<double>(steps - 1);
    return tau_start * std::pow(tau_end / tau_start, frac);
}

Adam::Adam(Eigen::Index n, const OptimizerConfig& cfg)
    : m_(Vec::Zero(n)), v_(Vec::Zero(n)), beta1_(cfg.beta1), beta2_(cfg.beta2), eps_(cfg.eps) {}

void Adam::step(Vec& params, const Vec& grad, double lr) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

}  // namespace semidiff
