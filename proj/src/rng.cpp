#include "semidiff/rng.hpp"

#include <vector>

namespace semidiff {

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * stream.size());
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto s : stream) push(s + 0x9e3779b97f4a7c15ull);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
    Rng rng = make_rng(seed, stream);
    return rng();
}

Mat standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
    return out;
}

double uniform(double lo, double hi, Rng& rng) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec ScoreField::operator()(const Vec& x, const Vec& y, double t) const {
    Vec tt(1);
    tt(0) = t;
    return eval(x, y, tt).col(0);
}

}  // namespace semidiff
