#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qdens/grid.hpp"

namespace qdens {

// Raised when an iterative solver runs out of its iteration budget. Carries
// the last residual (SCF) or duality gap (SVR).
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Dense single-particle Hamiltonian: 3-point kinetic stencil plus diagonal
// potential. OBC treats the wavefunction as vanishing outside the grid; PBC
// wraps the stencil.
struct SingleParticleOperator {
    Eigen::MatrixXd matrix;
    double mass = 1.0;
    Boundary boundary = Boundary::OBC;
};

SingleParticleOperator build_single_particle_hamiltonian(const SpatialGrid& grid,
                                                         const Eigen::VectorXd& potential,
                                                         double mass);

// Lowest `count` eigenpairs; orbitals are columns, normalized in the grid
// quadrature norm. Uses the tridiagonal fast path under OBC.
struct EigenStates {
    Eigen::VectorXd energies;
    Eigen::MatrixXd orbitals;
};

EigenStates lowest_eigenstates(const SingleParticleOperator& op, const SpatialGrid& grid,
                               int count);

// V_H(x) = integral dx' n(x') / (|x-x'| + 1), quadrature on the grid.
// `ring_metric` replaces |x-x'| by the periodic distance (PBC only).
Eigen::VectorXd hartree_potential(const Eigen::VectorXd& density, const SpatialGrid& grid,
                                  bool ring_metric = false);

// 1D LDA: V_xc = (-1.19 + 1.77 n - 1.37 n^2) n^0.604, extended by 0 at n = 0.
Eigen::VectorXd xc_potential_lda(const Eigen::VectorXd& density);

struct ScfSettings {
    double mixing_alpha = 0.3;
    int memory = 5; // Pulay history length
    double tolerance = 1e-6; // L1 density change
    int max_iterations = 500;
    bool interaction = true; // false: drop Hartree and xc (bare problem)
    bool hartree_ring_metric = false;
};

struct PulayResult {
    Eigen::VectorXd density;
    Eigen::VectorXd coefficients;
    bool fallback = false; // singular Gram system, plain mixing used
};

// Next-iteration density from the stored history: coefficients minimize the
// norm of the combined residual subject to summing to one, then
// n_next = sum_m c_m (n_m + alpha R_m) with R_m = n_m^KS - n_m.
PulayResult pulay_mix(const std::vector<Eigen::VectorXd>& densities,
                      const std::vector<Eigen::VectorXd>& ks_densities,
                      const SpatialGrid& grid, const ScfSettings& settings);

struct DensityProfile {
    Eigen::VectorXd values;
    double particle_number = 2.0;
};

struct ScfResult {
    DensityProfile density;
    int iterations = 0;
    double residual = 0.0;
    int pulay_fallbacks = 0;
};

// Self-consistent solve; density is built from the two lowest KS orbitals.
// Starts from the bare-potential density unless `initial_density` is given.
ScfResult solve_ks(const SpatialGrid& grid, const Eigen::VectorXd& external_potential,
                   double mass, const ScfSettings& settings,
                   const Eigen::VectorXd* initial_density = nullptr);

} // namespace qdens
