#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace semidiff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A score field s(x, y, t) evaluated on a batch. Columns of `x` (d_x x B) and
// `y` (d_y x B) are paired; `t` holds one forward time per column.
struct ScoreField {
    int d_x = 0;
    int d_y = 0;
    std::function<Mat(const Mat& x, const Mat& y, const Vec& t)> eval;

    Mat operator()(const Mat& x, const Mat& y, const Vec& t) const { return eval(x, y, t); }
    Vec operator()(const Vec& x, const Vec& y, double t) const;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace semidiff
