#include <doctest.h>

#include "qdens/problem.hpp"

using namespace qdens;

namespace {
SpatialGrid h2_grid() { return {10.0, 201, Boundary::OBC}; }
SpatialGrid tw_grid() { return {10.0, 200, Boundary::PBC}; }
} // namespace

TEST_CASE("h2 potential at reference points") {
    const auto grid = h2_grid();
    Eigen::VectorXd v = eval_h2_potential(0.0, 0.0, 4.0, 6.0, grid);
    CHECK(v[100] == doctest::Approx(-1.0).epsilon(1e-14));            // x = 5
    CHECK(v[0] == doctest::Approx(-1.0 / 5.0 - 1.0 / 7.0).epsilon(1e-14)); // x = 0
}

TEST_CASE("h2 potential is mirror symmetric about the midpoint") {
    const auto grid = h2_grid();
    Eigen::VectorXd v = eval_h2_potential(0.0, 0.0, 4.0, 6.0, grid);
    for (int s = 0; s <= 100; ++s)
        CHECK(v[100 - s] == doctest::Approx(v[100 + s]).epsilon(1e-14));
}

TEST_CASE("h2 potential is negative with exactly two local minima") {
    const auto grid = h2_grid();
    const auto problem = FermionProblem::h2();
    Eigen::VectorXd raw(2);
    for (auto [dxa, dxb] : {std::pair{-0.5, 0.5}, {0.3, -0.2}, {0.0, 0.0}}) {
        raw << dxa, dxb;
        Eigen::VectorXd v = problem.evaluate_potential(raw, grid);
        CHECK(v.maxCoeff() < 0.0);
        std::vector<int> minima;
        for (int i = 1; i + 1 < grid.num_points(); ++i)
            if (v[i] < v[i - 1] && v[i] < v[i + 1]) minima.push_back(i);
        REQUIRE(minima.size() == 2);
        CHECK(std::abs(grid.node(minima[0]) - (4.0 + dxa)) <= grid.spacing());
        CHECK(std::abs(grid.node(minima[1]) - (6.0 + dxb)) <= grid.spacing());
    }
}

TEST_CASE("triple well piecewise cases") {
    const auto grid = tw_grid();
    const auto problem = FermionProblem::triple_well();
    // h1=1.0, h2=1.2, delta1=0.4, delta2=0.3
    Eigen::VectorXd v = eval_triple_well(1.0, 1.2, 0.4, 0.3, problem, grid);
    CHECK(v[100] == doctest::Approx(-0.2));  // x = 5, between the barriers
    CHECK(v[4] == doctest::Approx(5.0));     // x = 0.2 <= x0
    CHECK(v[70] == doctest::Approx(1.0));    // x = 3.5 inside barrier 1
    CHECK(v[130] == doctest::Approx(1.2));   // x = 6.5 inside barrier 2
    CHECK(v[195] == doctest::Approx(5.0));   // x = 9.75 > x3
}

TEST_CASE("triple well values belong to the allowed set") {
    const auto grid = tw_grid();
    const auto problem = FermionProblem::triple_well();
    Eigen::VectorXd v = eval_triple_well(0.9, 1.5, 0.25, 0.45, problem, grid);
    for (int i = 0; i < grid.num_points(); ++i) {
        const double x = v[i];
        const bool allowed = x == 5.0 || x == 0.0 || x == 0.9 || x == -0.2 || x == 1.5;
        CHECK(allowed);
    }
}

TEST_CASE("triple well rejects overlapping regions") {
    const auto grid = tw_grid();
    auto problem = FermionProblem::triple_well();
    // delta1 wide enough to cross x0
    CHECK_THROWS_AS(eval_triple_well(1.0, 1.0, 6.1, 0.3, problem, grid),
                    std::invalid_argument);
    // barriers crossing each other
    CHECK_THROWS_AS(eval_triple_well(1.0, 1.0, 3.1, 3.1, problem, grid),
                    std::invalid_argument);
}

TEST_CASE("problem json round trip") {
    for (const auto& problem : {FermionProblem::h2(), FermionProblem::triple_well()}) {
        const auto round = FermionProblem::from_json(problem.to_json());
        CHECK(round.kind == problem.kind);
        CHECK(round.mass == problem.mass);
        CHECK(round.boundary == problem.boundary);
        REQUIRE(round.feature_ranges.size() == problem.feature_ranges.size());
        for (std::size_t f = 0; f < round.feature_ranges.size(); ++f) {
            CHECK(round.feature_ranges[f].lo == problem.feature_ranges[f].lo);
            CHECK(round.feature_ranges[f].hi == problem.feature_ranges[f].hi);
        }
    }
}
