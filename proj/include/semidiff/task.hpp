#pragma once

#include "semidiff/rng.hpp"
#include "semidiff/types.hpp"

#include <string>
#include <vector>

namespace semidiff {

// mean(y) = A y + b
struct AffineMap {
    Mat A;
    Vec b;

    Vec operator()(const Vec& y) const { return A * y + b; }
    Mat apply(const Mat& y) const { return (A * y).colwise() + b; }
};

struct GaussianComponent {
    double weight = 1.0;
    AffineMap mean;
    Mat cov;
};

// Law of the condition y on [0,1]^{d_y}.
struct ConditionMarginal {
    enum class Kind { uniform, truncated_gaussian };
    Kind kind = Kind::uniform;
    Vec mean;  // truncated_gaussian only, per coordinate
    Vec std;

    Vec sample(int d_y, Rng& rng) const;
};

// Sub-gaussian envelope p(x|y) <= c1 exp(-c2 ||x||^2), certified for all y.
struct TailEnvelope {
    double c1 = 0.0;
    double c2 = 0.0;
};

// Synthetic joint law over (x, y): y from the condition marginal, x | y a
// Gaussian mixture with affine component means.
class ConditionalTask {
public:
    ConditionalTask(int d_x, int d_y, std::vector<GaussianComponent> components,
                    ConditionMarginal marginal = {}, std::string name = {});

    // Single Gaussian conditional x | y ~ N(A y + b, cov).
    static ConditionalTask gaussian(AffineMap mean, Mat cov, ConditionMarginal marginal = {},
                                    std::string name = {});

    int d_x() const { return d_x_; }
    int d_y() const { return d_y_; }
    const std::string& name() const { return name_; }
    const std::vector<GaussianComponent>& components() const { return components_; }
    const ConditionMarginal& marginal() const { return marginal_; }

    Vec sample_condition(Rng& rng) const;
    Mat sample_conditions(Eigen::Index n, Rng& rng) const;
    Vec sample_x(const Vec& y, Rng& rng) const;
    // n i.i.d. pairs; returns (x, y) column-paired.
    std::pair<Mat, Mat> sample_pairs(Eigen::Index n, Rng& rng) const;

    double log_density(const Vec& x, const Vec& y) const;
    double density(const Vec& x, const Vec& y) const;
    // Mass of the conditional on the box [lo, hi] (d_x <= 2).
    double box_mass(const Vec& lo, const Vec& hi, const Vec& y) const;

    // Exact score of the forward-noised conditional p_t(x|y), batched.
    Mat oracle_score(const Mat& x, const Mat& y, const Vec& t) const;
    Vec oracle_score(const Vec& x, const Vec& y, double t) const;
    ScoreField oracle_field() const;

    // Conditional mean / per-coordinate std of x | y.
    Vec conditional_mean(const Vec& y) const;
    Vec conditional_std(const Vec& y) const;

    // Linear-growth caps (m0, m1) that the noised score never exceeds for any
    // t > 0 and y in [0,1]^{d_y}: a model class with smaller caps cannot contain
    // the true score. Exact for single Gaussians, sufficient for mixtures.
    std::pair<double, double> score_growth() const;

    // Upper bound on KL(P(.|y) || N(0, I)) over y in [0,1]^{d_y}.
    double kl_bound() const { return kl_bound_; }
    const TailEnvelope& envelope() const { return envelope_; }

private:
    int d_x_;
    int d_y_;
    std::vector<GaussianComponent> components_;
    ConditionMarginal marginal_;
    std::string name_;
    std::vector<Eigen::LLT<Mat>> chol_;
    std::vector<double> log_norm_;  // log of the Gaussian normalizer per component
    double kl_bound_ = 0.0;
    TailEnvelope envelope_;
};

// The forward-noised law of a single condition, p_t(.|y), as a Gaussian mixture.
struct NoisedMixture {
    std::vector<double> weight;
    std::vector<Vec> mean;
    std::vector<Mat> cov;
};
NoisedMixture noised_conditional(const ConditionalTask& task, const Vec& y, double t);

double normal_cdf(double z);

}  // namespace semidiff
