#pragma once

#include <cstdint>
#include <vector>

#include "qdens/problem.hpp"

namespace qdens {

// I.i.d. uniform draws from the problem's feature intervals. Sample i is a
// pure function of (problem, seed, i): the master seed spawns one child seed
// per sample index.
std::vector<Eigen::VectorXd> sample_features(const FermionProblem& problem, int count,
                                             std::uint64_t seed);

// Map raw features onto [0,1] with the declared (not empirical) intervals.
Eigen::VectorXd rescale_features(const Eigen::VectorXd& raw,
                                 const std::vector<FeatureRange>& ranges);

// Draw, rescale and evaluate `count` potential samples.
std::vector<PotentialSample> make_samples(const FermionProblem& problem,
                                          const SpatialGrid& grid, int count,
                                          std::uint64_t seed);

} // namespace qdens
