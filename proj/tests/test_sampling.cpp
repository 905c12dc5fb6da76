#include <doctest.h>

#include "qdens/rng.hpp"
#include "qdens/sampling.hpp"

using namespace qdens;

TEST_CASE("samples respect the declared ranges") {
    const auto problem = FermionProblem::h2();
    for (const auto& raw : sample_features(problem, 200, 7)) {
        CHECK(raw[0] >= -0.5);
        CHECK(raw[0] <= 0.5);
        CHECK(raw[1] >= -0.5);
        CHECK(raw[1] <= 0.5);
    }
}

TEST_CASE("count zero gives an empty list") {
    CHECK(sample_features(FermionProblem::h2(), 0, 7).empty());
    CHECK_THROWS_AS(sample_features(FermionProblem::h2(), -1, 7), std::invalid_argument);
}

TEST_CASE("sampling is reproducible and batch-size independent") {
    const auto problem = FermionProblem::triple_well();
    const auto a = sample_features(problem, 5, 1234);
    const auto b = sample_features(problem, 5, 1234);
    const auto c = sample_features(problem, 3, 1234);
    for (int i = 0; i < 5; ++i)
        for (int f = 0; f < 4; ++f) CHECK(a[i][f] == b[i][f]); // bit-identical
    for (int i = 0; i < 3; ++i)
        for (int f = 0; f < 4; ++f) CHECK(a[i][f] == c[i][f]);
    const auto d = sample_features(problem, 5, 1235);
    CHECK(a[0][0] != d[0][0]);
}

TEST_CASE("rescaling maps the declared interval onto [0,1]") {
    std::vector<FeatureRange> ranges = {{-0.5, 0.5}, {0.8, 1.6}, {0.2, 0.5}};
    Eigen::VectorXd raw(3);
    raw << -0.5, 1.2, 0.5;
    Eigen::VectorXd v = rescale_features(raw, ranges);
    CHECK(v[0] == doctest::Approx(0.0));
    CHECK(v[1] == doctest::Approx(0.5));
    CHECK(v[2] == doctest::Approx(1.0));
}

TEST_CASE("rescaling rejects out-of-range values") {
    std::vector<FeatureRange> ranges = {{0.0, 1.0}};
    Eigen::VectorXd raw(1);
    raw << 1.5;
    CHECK_THROWS_AS(rescale_features(raw, ranges), std::invalid_argument);
}

TEST_CASE("every made sample carries rescaled features in [0,1]") {
    const auto problem = FermionProblem::triple_well();
    SpatialGrid grid(10.0, 200, Boundary::PBC);
    for (const auto& s : make_samples(problem, grid, 50, 99)) {
        CHECK(s.rescaled.minCoeff() >= 0.0);
        CHECK(s.rescaled.maxCoeff() <= 1.0);
        CHECK(s.values.size() == grid.num_points());
    }
}

TEST_CASE("spawned seeds differ across indices") {
    CHECK(spawn_seed(42, 0) != spawn_seed(42, 1));
    CHECK(spawn_seed(42, 0) != spawn_seed(43, 0));
    CHECK(spawn_seed(42, 7) == spawn_seed(42, 7));
}
