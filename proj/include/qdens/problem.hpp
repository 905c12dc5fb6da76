#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qdens/grid.hpp"

namespace qdens {

enum class ProblemKind { H2, TripleWell };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

struct FeatureRange {
    double lo = 0.0;
    double hi = 1.0;
};

// Definition of one two-fermion problem: fixed potential parameters plus the
// intervals from which the variable features are drawn. All quantities in
// atomic units.
struct FermionProblem {
    ProblemKind kind = ProblemKind::H2;
    double mass = 1.0; // both fermions share one mass
    Boundary boundary = Boundary::OBC;
    double domain_length = 10.0;

    // H2: nominal nuclei positions; features are the displacements.
    double xa0 = 4.0;
    double xb0 = 6.0;

    // Triple well: region edges, outer walls, central floor.
    double x0 = 0.5, x1 = 3.5, x2 = 6.5, x3 = 9.5;
    double h0 = 5.0, h3 = 5.0;
    double d = -0.2;

    std::vector<FeatureRange> feature_ranges;

    static FermionProblem h2();
    static FermionProblem triple_well();
    // Triple well with custom draw intervals for (h1, h2) and (delta1, delta2).
    static FermionProblem triple_well_with_ranges(FeatureRange heights, FeatureRange widths);

    int num_features() const { return static_cast<int>(feature_ranges.size()); }
    int default_num_points() const { return boundary == Boundary::OBC ? 201 : 200; }

    // Pointwise evaluation of V_k on the grid for one raw feature vector.
    Eigen::VectorXd evaluate_potential(const Eigen::VectorXd& raw, const SpatialGrid& grid) const;

    nlohmann::json to_json() const;
    static FermionProblem from_json(const nlohmann::json& j);
};

// Two softened-Coulomb wells at xa0+dxa and xb0+dxb.
Eigen::VectorXd eval_h2_potential(double dxa, double dxb, double xa0, double xb0,
                                  const SpatialGrid& grid);

// Piecewise-constant triple well; cases applied in the listed order with
// "x <= edge" boundaries. Throws if a barrier interval leaves (x0, x3).
Eigen::VectorXd eval_triple_well(double h1, double h2, double delta1, double delta2,
                                 const FermionProblem& p, const SpatialGrid& grid);

// One drawn configuration of the external potential.
struct PotentialSample {
    int sample_id = 0;
    Eigen::VectorXd raw;      // features in physical units
    Eigen::VectorXd rescaled; // features mapped to [0,1]
    Eigen::VectorXd values;   // V_k on the grid nodes
};

} // namespace qdens
