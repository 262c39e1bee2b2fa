#pragma once

#include "semidiff/rng.hpp"
#include "semidiff/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semidiff {

enum class ModelFamily { specialist, generalist };

std::string to_string(ModelFamily f);
ModelFamily model_family_from_string(const std::string& s);

// Linear growth envelope ||s(x, y, t)|| <= m0 + m1 ||x||.
struct GrowthCaps {
    double m0 = 4.0;
    double m1 = 4.0;
};

struct ModelClassSpec {
    ModelFamily family = ModelFamily::specialist;
    int d_x = 1;
    int d_y = 1;
    std::vector<int> widths{8};  // hidden layer widths; depth = widths.size()
    GrowthCaps caps;
    std::uint64_t init_seed = 0;
    double init_scale = 1.0;

    int depth() const { return static_cast<int>(widths.size()); }
    int input_dim() const { return d_x + d_y + 3; }
    void validate() const;
};

// Exact trainable-parameter count of the architecture.
std::size_t capacity_report(const ModelClassSpec& spec);

// Network inputs: x, y and the time features (t, e^{-t}, 1/sigma_t).
Mat model_features(const Mat& x, const Mat& y, const Vec& t);

// Squared-error regression batch: loss = (1/B) sum_i w_i ||s(x_i, y_i, t_i) - target_i||^2.
struct RegressionBatch {
    Mat x;
    Mat y;
    Vec t;
    Mat target;
    Vec weight;  // empty means all ones
};

struct GradResult {
    double loss = 0.0;
    Vec grad;
    Vec sq_err;  // unweighted ||s - target||^2 per column
};

// Score network s(x, y, t) = m0 * v / sqrt(1 + ||v||^2) - m1 * x .* sigmoid(w), where
// (v, w) are linear heads on a tanh MLP trunk. The envelope holds for any
// parameter values.
class ScoreModel {
public:
    ScoreModel(ModelClassSpec spec, Vec params);

    static ScoreModel initialize(const ModelClassSpec& spec);
    static ScoreModel zeros(const ModelClassSpec& spec);

    const ModelClassSpec& spec() const { return spec_; }
    const Vec& params() const { return params_; }
    std::size_t capacity() const { return static_cast<std::size_t>(params_.size()); }

    Mat eval(const Mat& x, const Mat& y, const Vec& t) const;
    Vec eval(const Vec& x, const Vec& y, double t) const;
    ScoreField field() const;

    // Value and exact gradient of the batch loss with respect to params.
    GradResult loss_grad(const RegressionBatch& batch) const;

    // Backpropagates an upstream gradient dL/d(output) (d_x x B).
    Vec backward(const Mat& x, const Mat& y, const Vec& t, const Mat& upstream) const;

    ScoreModel with_params(Vec params) const { return ScoreModel(spec_, std::move(params)); }

private:
    struct Cache;
    Mat forward(const Mat& x, const Mat& y, const Vec& t, Cache* cache) const;
    Vec backprop(const Cache& cache, const Mat& x, const Mat& upstream) const;

    ModelClassSpec spec_;
    Vec params_;
};

GradResult model_grad(const ScoreModel& s, const RegressionBatch& batch);

}  // namespace semidiff
