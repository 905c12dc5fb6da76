#include "qdens/basis.hpp"

#include <stdexcept>
#include <string>

#include "qdens/ksdft.hpp"

namespace qdens {

namespace {

// Fill a region potential from a piecewise case list evaluated top-down,
// mirroring the "value if x <= edge" style of the well definitions.
template <typename F>
Eigen::VectorXd piecewise(const SpatialGrid& grid, F f) {
    Eigen::VectorXd v(grid.num_points());
    for (int i = 0; i < grid.num_points(); ++i) v[i] = f(grid.node(i));
    return v;
}

void fix_sign(Eigen::VectorXd& psi) {
    Eigen::Index imax = 0;
    psi.cwiseAbs().maxCoeff(&imax);
    if (psi[imax] < 0.0) psi = -psi;
}

} // namespace

RegionPotentials build_region_potentials(const FermionProblem& p, const SpatialGrid& grid,
                                         double height) {
    RegionPotentials out;
    if (p.kind == ProblemKind::H2) {
        // Wells closed at the nominal nuclei positions.
        const double xa = p.xa0, xb = p.xb0;
        out.left = piecewise(grid, [&](double x) { return x <= xa ? 0.0 : height; });
        out.center = piecewise(grid, [&](double x) {
            if (x < xa) return height;
            return x <= xb ? 0.0 : height;
        });
        out.right = piecewise(grid, [&](double x) { return x < xb ? height : 0.0; });
    } else {
        // Walls closed at the region edges; the center keeps its floor d.
        out.left = piecewise(grid, [&](double x) {
            if (x <= p.x0) return height;
            return x < p.x1 ? 0.0 : height;
        });
        out.center = piecewise(grid, [&](double x) {
            if (x <= p.x1) return height;
            return x < p.x2 ? p.d : height;
        });
        out.right = piecewise(grid, [&](double x) {
            if (x <= p.x2) return height;
            return x < p.x3 ? 0.0 : height;
        });
    }
    return out;
}

ExpansionBasis::ExpansionBasis(Eigen::MatrixXd functions, int n_left, int n_center,
                               int n_right, double height, SpatialGrid grid)
    : functions_(std::move(functions)),
      n_left_(n_left),
      n_center_(n_center),
      n_right_(n_right),
      height_(height),
      grid_(grid) {}

ExpansionBasis build_truncated_basis(const FermionProblem& problem, const SpatialGrid& grid,
                                     int n_left, int n_center, int n_right, double height) {
    const int n_trunc = n_left + n_center + n_right;
    if (n_left < 1 || n_center < 1 || n_right < 1)
        throw std::invalid_argument("build_truncated_basis: region sizes must be positive");
    if (n_trunc > grid.num_points())
        throw std::invalid_argument("build_truncated_basis: basis larger than grid");

    const auto regions = build_region_potentials(problem, grid, height);

    Eigen::MatrixXd raw(n_trunc, grid.num_points());
    int row = 0;
    const std::pair<const Eigen::VectorXd*, int> blocks[] = {
        {&regions.left, n_left}, {&regions.center, n_center}, {&regions.right, n_right}};
    for (const auto& [pot, count] : blocks) {
        auto op = build_single_particle_hamiltonian(grid, *pot, problem.mass);
        auto states = lowest_eigenstates(op, grid, count);
        for (int c = 0; c < count; ++c) {
            Eigen::VectorXd psi = states.orbitals.col(c);
            fix_sign(psi);
            raw.row(row++) = psi;
        }
    }

    // Modified Gram-Schmidt in the quadrature inner product.
    Eigen::MatrixXd ortho(n_trunc, grid.num_points());
    for (int l = 0; l < n_trunc; ++l) {
        Eigen::VectorXd psi = raw.row(l);
        for (int j = 0; j < l; ++j) {
            const Eigen::VectorXd prev = ortho.row(j);
            psi -= grid.inner(prev, psi) * prev;
        }
        const double nrm = grid.norm(psi);
        if (nrm < 1e-10)
            throw std::runtime_error(
                "build_truncated_basis: Gram-Schmidt degeneracy at index " +
                std::to_string(l));
        psi /= nrm;
        fix_sign(psi);
        ortho.row(l) = psi;
    }

    return ExpansionBasis(std::move(ortho), n_left, n_center, n_right, height, grid);
}

Eigen::VectorXd project_density(const Eigen::VectorXd& density, const ExpansionBasis& basis,
                                const SpatialGrid& grid) {
    if (!grid.same_as(basis.grid()) || density.size() != grid.num_points())
        throw std::invalid_argument("project_density: grid mismatch");
    Eigen::VectorXd u(basis.size());
    for (int l = 0; l < basis.size(); ++l)
        u[l] = grid.inner(basis.function(l), density);
    return u;
}

Eigen::VectorXd reconstruct_density(const Eigen::VectorXd& u, const ExpansionBasis& basis) {
    if (u.size() != basis.size())
        throw std::invalid_argument("reconstruct_density: coefficient count mismatch");
    return basis.functions().transpose() * u;
}

} // namespace qdens
