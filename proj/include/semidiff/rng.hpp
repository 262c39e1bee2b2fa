#pragma once

#include "semidiff/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace semidiff {

using Rng = std::mt19937_64;

// Derives an independent stream from a run seed and a path of stream ids,
// e.g. make_rng(seed, {stage, task, index}).
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

// A 64-bit seed derived from a stream path, for seeding nested components.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

Mat standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);
double uniform(double lo, double hi, Rng& rng);

}  // namespace semidiff
