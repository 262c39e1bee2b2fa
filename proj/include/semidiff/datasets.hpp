#pragma once

#include "semidiff/sampler.hpp"
#include "semidiff/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace semidiff {

// Paired samples (x_i, y_i) from one task.
struct LabeledDataset {
    int task = 0;
    Mat x;
    Mat y;

    Eigen::Index size() const { return x.cols(); }
    void validate() const;
};

// Unpaired conditions from one task's condition marginal.
struct ConditionPool {
    int task = 0;
    Mat y;

    Eigen::Index size() const { return y.cols(); }
};

struct PseudoProvenance {
    std::string specialist_id;
    SamplerConfig sampler;
    std::size_t attempts = 0;
    std::size_t accepted = 0;
    std::size_t clipped = 0;

    double acceptance_rate() const {
        return attempts ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0;
    }
};

struct PseudoDataset {
    int task = 0;
    Mat x;
    Mat y;
    std::vector<char> accepted;
    std::vector<int> retries;
    PseudoProvenance provenance;

    Eigen::Index size() const { return x.cols(); }
    PseudoDataset head(Eigen::Index n) const;
};

// Columnar CSV: task,y0..,x0..,accepted,retries
void write_pseudo_csv(const PseudoDataset& data, const std::string& path);
PseudoDataset read_pseudo_csv(const std::string& path);

}  // namespace semidiff
