#pragma once

#include <Eigen/Dense>

#include "qdens/grid.hpp"
#include "qdens/problem.hpp"

namespace qdens {

// Three single-well confinement potentials, one per spatial region. Wall
// height is h_basis; the triple-well center region keeps its floor d.
struct RegionPotentials {
    Eigen::VectorXd left;
    Eigen::VectorXd center;
    Eigen::VectorXd right;
};

RegionPotentials build_region_potentials(const FermionProblem& problem,
                                         const SpatialGrid& grid, double height = 20.0);

// Orthonormal truncated expansion basis: lowest region eigenstates,
// concatenated L|C|R and orthonormalized by modified Gram-Schmidt in the grid
// quadrature inner product. Sign pinned so each function's
// largest-magnitude component is positive.
class ExpansionBasis {
public:
    ExpansionBasis(Eigen::MatrixXd functions, int n_left, int n_center, int n_right,
                   double height, SpatialGrid grid);

    int size() const { return static_cast<int>(functions_.rows()); }
    int n_left() const { return n_left_; }
    int n_center() const { return n_center_; }
    int n_right() const { return n_right_; }
    double height() const { return height_; }
    const SpatialGrid& grid() const { return grid_; }

    // Row l is the l-th basis function sampled on the grid.
    const Eigen::MatrixXd& functions() const { return functions_; }
    Eigen::VectorXd function(int l) const { return functions_.row(l); }

private:
    Eigen::MatrixXd functions_;
    int n_left_, n_center_, n_right_;
    double height_;
    SpatialGrid grid_;
};

ExpansionBasis build_truncated_basis(const FermionProblem& problem, const SpatialGrid& grid,
                                     int n_left, int n_center, int n_right,
                                     double height = 20.0);

// Expansion coefficients u_l = <Psi_l, n> under grid quadrature.
Eigen::VectorXd project_density(const Eigen::VectorXd& density, const ExpansionBasis& basis,
                                const SpatialGrid& grid);

// sum_l u_l Psi_l(x); may dip slightly negative, no clipping.
Eigen::VectorXd reconstruct_density(const Eigen::VectorXd& u, const ExpansionBasis& basis);

} // namespace qdens
