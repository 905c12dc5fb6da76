#include "qdens/sampling.hpp"

#include <stdexcept>

#include "qdens/rng.hpp"

namespace qdens {

std::vector<Eigen::VectorXd> sample_features(const FermionProblem& problem, int count,
                                             std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("sample_features: negative count");
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    const int nf = problem.num_features();
    for (int i = 0; i < count; ++i) {
        SplitMix64 g(spawn_seed(seed, static_cast<std::uint64_t>(i)));
        Eigen::VectorXd raw(nf);
        for (int f = 0; f < nf; ++f) {
            const auto& r = problem.feature_ranges[f];
            raw[f] = g.uniform(r.lo, r.hi);
        }
        out.push_back(std::move(raw));
    }
    return out;
}

Eigen::VectorXd rescale_features(const Eigen::VectorXd& raw,
                                 const std::vector<FeatureRange>& ranges) {
    if (raw.size() != static_cast<Eigen::Index>(ranges.size()))
        throw std::invalid_argument("rescale_features: size mismatch");
    Eigen::VectorXd v(raw.size());
    for (Eigen::Index f = 0; f < raw.size(); ++f) {
        const auto& r = ranges[f];
        if (raw[f] < r.lo || raw[f] > r.hi)
            throw std::invalid_argument("rescale_features: feature outside declared range");
        v[f] = (raw[f] - r.lo) / (r.hi - r.lo);
    }
    return v;
}

std::vector<PotentialSample> make_samples(const FermionProblem& problem,
                                          const SpatialGrid& grid, int count,
                                          std::uint64_t seed) {
    auto raws = sample_features(problem, count, seed);
    std::vector<PotentialSample> samples;
    samples.reserve(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) {
        PotentialSample s;
        s.sample_id = static_cast<int>(i);
        s.raw = raws[i];
        s.rescaled = rescale_features(s.raw, problem.feature_ranges);
        s.values = problem.evaluate_potential(s.raw, grid);
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace qdens
