#include "semidiff/task.hpp"

#include "semidiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace semidiff {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) : x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n)) {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p1 = 1.0, p2 = 0.0;
                for (int j = 1; j <= n; ++j) {
                    const double p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
                }
                pp = n * (z * p1 - p2) / (z * z - 1.0);
                const double dz = p1 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            x[static_cast<std::size_t>(i)] = -z;
            x[static_cast<std::size_t>(n - 1 - i)] = z;
            w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] =
                2.0 / ((1.0 - z * z) * pp * pp);
        }
    }
};

const GaussLegendre& gl32() {
    static const GaussLegendre rule(32);
    return rule;
}

double sample_truncated_normal01(double mean, double sd, Rng& rng) {
    std::normal_distribution<double> normal(mean, sd);
    for (int i = 0; i < 100000; ++i) {
        const double v = normal(rng);
        if (v >= 0.0 && v <= 1.0) return v;
    }
    throw std::runtime_error("condition marginal: truncated gaussian has negligible mass on [0,1]");
}

bool is_spd(const Mat& m) {
    if (m.rows() != m.cols()) return false;
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    Eigen::LLT<Mat> llt(m);
    return llt.info() == Eigen::Success;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Vec ConditionMarginal::sample(int d_y, Rng& rng) const {
    Vec y(d_y);
    if (kind == Kind::uniform) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < d_y; ++i) y(i) = u(rng);
        return y;
    }
    for (int i = 0; i < d_y; ++i) y(i) = sample_truncated_normal01(mean(i), std(i), rng);
    return y;
}

ConditionalTask::ConditionalTask(int d_x, int d_y, std::vector<GaussianComponent> components,
                                 ConditionMarginal marginal, std::string name)
    : d_x_(d_x), d_y_(d_y), components_(std::move(components)), marginal_(std::move(marginal)),
      name_(std::move(name)) {
    if (d_x < 1 || d_y < 1) throw std::invalid_argument("task: dimensions must be positive");
    if (components_.empty()) throw std::invalid_argument("task: at least one component required");
    double wsum = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0)) throw std::invalid_argument("task: component weights must be positive");
        wsum += c.weight;
        if (c.mean.A.rows() != d_x || c.mean.A.cols() != d_y || c.mean.b.size() != d_x)
            throw std::invalid_argument("task: mean map has wrong shape");
        if (c.cov.rows() != d_x || !is_spd(c.cov))
            throw std::invalid_argument("task: covariance must be symmetric positive definite");
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("task: weights must sum to 1");
    if (marginal_.kind == ConditionMarginal::Kind::truncated_gaussian) {
        if (marginal_.mean.size() != d_y || marginal_.std.size() != d_y || (marginal_.std.array() <= 0).any())
            throw std::invalid_argument("task: truncated gaussian marginal needs d_y means and positive stds");
    }

    double lambda_max = 0.0;
    for (const auto& c : components_) {
        chol_.emplace_back(c.cov);
        const Mat& L = chol_.back().matrixL();
        const double log_det = 2.0 * L.diagonal().array().log().sum();
        log_norm_.push_back(-0.5 * (d_x_ * kLog2Pi + log_det));
        Eigen::SelfAdjointEigenSolver<Mat> es(c.cov);
        lambda_max = std::max(lambda_max, es.eigenvalues().maxCoeff());
    }

    // KL and envelope bounds are maximized over the vertices of [0,1]^{d_y}.
    const int n_vertices = 1 << std::min(d_y_, 20);
    double kl_max = 0.0;
    double c1 = 0.0;
    for (int v = 0; v < n_vertices; ++v) {
        Vec y(d_y_);
        for (int i = 0; i < d_y_; ++i) y(i) = (v >> i) & 1;
        double kl = 0.0;
        for (std::size_t j = 0; j < components_.size(); ++j) {
            const auto& c = components_[j];
            const Vec m = c.mean(y);
            const double log_det = -2.0 * log_norm_[j] - d_x_ * kLog2Pi;
            kl += c.weight * 0.5 * (c.cov.trace() + m.squaredNorm() - d_x_ - log_det);
            c1 = std::max(c1, std::exp(log_norm_[j] + m.squaredNorm() / (2.0 * lambda_max)));
        }
        kl_max = std::max(kl_max, kl);
    }
    kl_bound_ = kl_max;
    envelope_ = {c1, 1.0 / (4.0 * lambda_max)};
}

ConditionalTask ConditionalTask::gaussian(AffineMap mean, Mat cov, ConditionMarginal marginal,
                                          std::string name) {
    const int d_x = static_cast<int>(mean.b.size());
    const int d_y = static_cast<int>(mean.A.cols());
    return ConditionalTask(d_x, d_y, {GaussianComponent{1.0, std::move(mean), std::move(cov)}},
                           std::move(marginal), std::move(name));
}

Vec ConditionalTask::sample_condition(Rng& rng) const { return marginal_.sample(d_y_, rng); }

Mat ConditionalTask::sample_conditions(Eigen::Index n, Rng& rng) const {
    Mat y(d_y_, n);
    for (Eigen::Index i = 0; i < n; ++i) y.col(i) = sample_condition(rng);
    return y;
}

Vec ConditionalTask::sample_x(const Vec& y, Rng& rng) const {
    std::size_t j = 0;
    if (components_.size() > 1) {
        double u = uniform(0.0, 1.0, rng);
        for (j = 0; j + 1 < components_.size(); ++j) {
            u -= components_[j].weight;
            if (u < 0.0) break;
        }
    }
    const Vec z = standard_normal(d_x_, 1, rng).col(0);
    return components_[j].mean(y) + chol_[j].matrixL() * z;
}

std::pair<Mat, Mat> ConditionalTask::sample_pairs(Eigen::Index n, Rng& rng) const {
    Mat x(d_x_, n), y(d_y_, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y.col(i) = sample_condition(rng);
        x.col(i) = sample_x(y.col(i), rng);
    }
    return {std::move(x), std::move(y)};
}

double ConditionalTask::log_density(const Vec& x, const Vec& y) const {
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(components_.size());
    for (std::size_t j = 0; j < components_.size(); ++j) {
        const Vec r = x - components_[j].mean(y);
        const Vec z = chol_[j].matrixL().solve(r);
        terms[j] = std::log(components_[j].weight) + log_norm_[j] - 0.5 * z.squaredNorm();
        m = std::max(m, terms[j]);
    }
    double s = 0.0;
    for (double v : terms) s += std::exp(v - m);
    return m + std::log(s);
}

double ConditionalTask::density(const Vec& x, const Vec& y) const { return std::exp(log_density(x, y)); }

double ConditionalTask::box_mass(const Vec& lo, const Vec& hi, const Vec& y) const {
    if (d_x_ > 2) throw std::invalid_argument("box_mass: supported for d_x <= 2");
    double total = 0.0;
    for (std::size_t j = 0; j < components_.size(); ++j) {
        const auto& c = components_[j];
        const Vec m = c.mean(y);
        if (d_x_ == 1) {
            const double s = std::sqrt(c.cov(0, 0));
            total += c.weight * (normal_cdf((hi(0) - m(0)) / s) - normal_cdf((lo(0) - m(0)) / s));
            continue;
        }
        // x1 marginal integrated by quadrature, x2 | x1 in closed form.
        const double s11 = c.cov(0, 0), s12 = c.cov(0, 1), s22 = c.cov(1, 1);
        const double sd1 = std::sqrt(s11);
        const double cond_sd = std::sqrt(s22 - s12 * s12 / s11);
        const double a = std::max(lo(0), m(0) - 10.0 * sd1);
        const double b = std::min(hi(0), m(0) + 10.0 * sd1);
        if (a >= b) continue;
        const auto& gl = gl32();
        const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
        double acc = 0.0;
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            const double x1 = mid + half * gl.x[q];
            const double pdf1 = std::exp(-0.5 * (x1 - m(0)) * (x1 - m(0)) / s11) /
                                (sd1 * std::sqrt(2.0 * std::numbers::pi));
            const double cm = m(1) + s12 / s11 * (x1 - m(0));
            acc += gl.w[q] * pdf1 *
                   (normal_cdf((hi(1) - cm) / cond_sd) - normal_cdf((lo(1) - cm) / cond_sd));
        }
        total += c.weight * half * acc;
    }
    return total;
}

NoisedMixture noised_conditional(const ConditionalTask& task, const Vec& y, double t) {
    const double a = alpha(t), s2 = sigma2(t);
    NoisedMixture out;
    const auto I = Mat::Identity(task.d_x(), task.d_x());
    for (const auto& c : task.components()) {
        out.weight.push_back(c.weight);
        out.mean.push_back(a * c.mean(y));
        out.cov.push_back(a * a * c.cov + s2 * I);
    }
    return out;
}

Mat ConditionalTask::oracle_score(const Mat& x, const Mat& y, const Vec& t) const {
    if (x.rows() != d_x_ || y.rows() != d_y_ || x.cols() != y.cols() || t.size() != x.cols())
        throw std::invalid_argument("oracle_score: shape mismatch");
    const std::size_t K = components_.size();
    Mat out(d_x_, x.cols());
    const Mat I = Mat::Identity(d_x_, d_x_);
    double cached_t = std::numeric_limits<double>::quiet_NaN();
    std::vector<Eigen::LLT<Mat>> cov_llt;
    std::vector<double> log_norm(K);
    std::vector<double> logits(K);
    std::vector<Vec> grads(K);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        const double ti = t(i);
        if (!(ti >= 0.0)) throw std::invalid_argument("oracle_score: time must be non-negative");
        const double a = std::exp(-ti);
        if (ti != cached_t) {
            cov_llt.clear();
            const double s2 = -std::expm1(-2.0 * ti);
            for (std::size_t j = 0; j < K; ++j) {
                cov_llt.emplace_back(a * a * components_[j].cov + s2 * I);
                const Mat& L = cov_llt.back().matrixL();
                log_norm[j] = -L.diagonal().array().log().sum();
            }
            cached_t = ti;
        }
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < K; ++j) {
            const Vec r = x.col(i) - a * components_[j].mean(y.col(i));
            const Vec prec_r = cov_llt[j].solve(r);
            grads[j] = -prec_r;
            logits[j] = std::log(components_[j].weight) + log_norm[j] - 0.5 * r.dot(prec_r);
            m = std::max(m, logits[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < K; ++j) z += std::exp(logits[j] - m);
        Vec acc = Vec::Zero(d_x_);
        for (std::size_t j = 0; j < K; ++j) acc += std::exp(logits[j] - m) / z * grads[j];
        out.col(i) = acc;
    }
    return out;
}

Vec ConditionalTask::oracle_score(const Vec& x, const Vec& y, double t) const {
    Vec tt(1);
    tt(0) = t;
    return oracle_score(Mat(x), Mat(y), tt).col(0);
}

ScoreField ConditionalTask::oracle_field() const {
    ConditionalTask copy = *this;
    return ScoreField{d_x_, d_y_, [copy](const Mat& x, const Mat& y, const Vec& t) {
                          return copy.oracle_score(x, y, t);
                      }};
}

Vec ConditionalTask::conditional_mean(const Vec& y) const {
    Vec m = Vec::Zero(d_x_);
    for (const auto& c : components_) m += c.weight * c.mean(y);
    return m;
}

Vec ConditionalTask::conditional_std(const Vec& y) const {
    const Vec mu = conditional_mean(y);
    Mat second = Mat::Zero(d_x_, d_x_);
    for (const auto& c : components_) {
        const Vec m = c.mean(y);
        second += c.weight * (c.cov + m * m.transpose());
    }
    return (second - mu * mu.transpose()).diagonal().cwiseSqrt();
}

std::pair<double, double> ConditionalTask::score_growth() const {
    // C(t) = a^2 Sigma + (1 - a^2) I with a = e^{-t} in (0, 1); scan a on a grid
    // including both ends and y over the vertices of the unit box (the norm of an
    // affine map is convex in y).
    double m0 = 0.0, m1 = 0.0;
    const int n_vertices = 1 << d_y_;
    for (const auto& c : components_) {
        const Eigen::SelfAdjointEigenSolver<Mat> eig(c.cov);
        m1 = std::max({m1, 1.0, 1.0 / eig.eigenvalues().minCoeff()});
        for (int i = 0; i <= 200; ++i) {
            const double a = i / 200.0;
            const Mat C = a * a * c.cov + (1.0 - a * a) * Mat::Identity(d_x_, d_x_);
            const Eigen::LLT<Mat> llt(C);
            for (int v = 0; v < n_vertices; ++v) {
                Vec y(d_y_);
                for (int k = 0; k < d_y_; ++k) y(k) = (v >> k) & 1;
                m0 = std::max(m0, llt.solve(a * c.mean(y)).norm());
            }
        }
    }
    return {m0, m1};
}

}  // namespace semidiff
