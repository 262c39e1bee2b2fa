#include "semidiff/sampler.hpp"

#include <cmath>
#include <sstream>

namespace semidiff {

namespace {

void check_finite(const Mat& x, int step) {
    if (!x.allFinite()) {
        std::ostringstream os;
        os << "sampler: non-finite state at step " << step << " (score blow-up)";
        throw SamplingError(os.str());
    }
}

}  // namespace

void SamplerConfig::validate() const {
    if (n_steps < 10) throw std::invalid_argument("sampler: n_steps must be >= 10");
    if (!(t0 > 0.0) || !(t0 < t_max)) throw std::invalid_argument("sampler: require 0 < t0 < t_max");
    if (truncation) {
        if (!(truncation->radius >= 1.0)) throw std::invalid_argument("sampler: truncation radius must be >= 1");
        if (truncation->max_retries < 0) throw std::invalid_argument("sampler: max_retries must be >= 0");
    }
}

double default_truncation_radius(std::size_t n_pseudo, std::size_t k_tasks) {
    const double nk = std::max<double>(2.0, static_cast<double>(n_pseudo) * static_cast<double>(k_tasks));
    return std::sqrt(2.0 * std::log(nk)) + 2.0;
}

Mat reverse_sde_sample(const ScoreField& score, const Mat& y, const SamplerConfig& cfg, Rng& rng) {
    cfg.validate();
    const Eigen::Index B = y.cols();
    const double h = (cfg.t_max - cfg.t0) / cfg.n_steps;
    const double noise = std::sqrt(2.0 * h);
    Mat x = standard_normal(score.d_x, B, rng);
    Vec t(B);
    for (int k = 0; k < cfg.n_steps; ++k) {
        t.setConstant(cfg.t_max - k * h);
        const Mat s = score(x, y, t);
        x += h * (x + 2.0 * s) + noise * standard_normal(score.d_x, B, rng);
        check_finite(x, k);
    }
    return x;
}

Vec reverse_sde_sample(const ScoreField& score, const Vec& y, const SamplerConfig& cfg, Rng& rng) {
    return reverse_sde_sample(score, Mat(y), cfg, rng).col(0);
}

Mat integrate_flow_ode(const ScoreField& score, const Mat& x_init, const Mat& y, const SamplerConfig& cfg) {
    cfg.validate();
    const Eigen::Index B = y.cols();
    const double h = (cfg.t_max - cfg.t0) / cfg.n_steps;
    Mat x = x_init;
    Vec t(B);
    auto drift = [&](const Mat& state, double forward_time) {
        t.setConstant(forward_time);
        return Mat(state + score(state, y, t));
    };
    for (int k = 0; k < cfg.n_steps; ++k) {
        const double tf = cfg.t_max - k * h;
        const Mat k1 = drift(x, tf);
        const Mat k2 = drift(x + 0.5 * h * k1, tf - 0.5 * h);
        const Mat k3 = drift(x + 0.5 * h * k2, tf - 0.5 * h);
        const Mat k4 = drift(x + h * k3, tf - h);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(x, k);
    }
    return x;
}

Mat reverse_ode_sample(const ScoreField& score, const Mat& y, const SamplerConfig& cfg, Rng& rng) {
    const Mat x0 = standard_normal(score.d_x, y.cols(), rng);
    return integrate_flow_ode(score, x0, y, cfg);
}

Mat sample_model(const ScoreField& score, const Mat& y, const SamplerConfig& cfg, Rng& rng) {
    return cfg.kind == SamplerKind::sde ? reverse_sde_sample(score, y, cfg, rng)
                                        : reverse_ode_sample(score, y, cfg, rng);
}

TruncatedBatch sample_truncated(const ScoreField& score, const Mat& y, const SamplerConfig& cfg, Rng& rng) {
    if (!cfg.truncation) throw std::invalid_argument("sample_truncated: truncation not configured");
    const Truncation& tr = *cfg.truncation;
    const Eigen::Index B = y.cols();
    TruncatedBatch out;
    out.x = Mat::Zero(score.d_x, B);
    out.accepted.assign(static_cast<std::size_t>(B), 0);
    out.retries.assign(static_cast<std::size_t>(B), 0);

    std::vector<Eigen::Index> pending(static_cast<std::size_t>(B));
    for (Eigen::Index i = 0; i < B; ++i) pending[static_cast<std::size_t>(i)] = i;
    Mat last = Mat::Zero(score.d_x, B);
    for (int round = 0; round <= tr.max_retries && !pending.empty(); ++round) {
        Mat ys(y.rows(), static_cast<Eigen::Index>(pending.size()));
        for (std::size_t j = 0; j < pending.size(); ++j) ys.col(static_cast<Eigen::Index>(j)) = y.col(pending[j]);
        const Mat xs = sample_model(score, ys, cfg, rng);
        out.attempts += pending.size();
        std::vector<Eigen::Index> still;
        for (std::size_t j = 0; j < pending.size(); ++j) {
            const Eigen::Index i = pending[j];
            const auto col = xs.col(static_cast<Eigen::Index>(j));
            out.retries[static_cast<std::size_t>(i)] = round;
            if (col.cwiseAbs().maxCoeff() <= tr.radius) {
                out.x.col(i) = col;
                out.accepted[static_cast<std::size_t>(i)] = 1;
                ++out.accepted_count;
            } else {
                last.col(i) = col;
                still.push_back(i);
            }
        }
        pending = std::move(still);
    }
    if (!pending.empty()) {
        if (tr.overflow == OverflowPolicy::fail) {
            std::ostringstream os;
            os << "sample_truncated: retries exhausted for condition y = [" << y.col(pending.front()).transpose()
               << "]";
            throw SamplingError(os.str());
        }
        for (Eigen::Index i : pending) {
            out.x.col(i) = last.col(i).cwiseMax(-tr.radius).cwiseMin(tr.radius);
            ++out.clipped;
        }
    }
    return out;
}

}  // namespace semidiff
