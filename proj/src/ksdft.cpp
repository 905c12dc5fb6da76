#include "qdens/ksdft.hpp"

#include <cmath>
#include <deque>

namespace qdens {

SingleParticleOperator build_single_particle_hamiltonian(const SpatialGrid& grid,
                                                         const Eigen::VectorXd& potential,
                                                         double mass) {
    if (!(mass > 0.0))
        throw std::invalid_argument("build_single_particle_hamiltonian: mass must be positive");
    if (potential.size() != grid.num_points())
        throw std::invalid_argument("build_single_particle_hamiltonian: potential/grid mismatch");

    const int n = grid.num_points();
    const double k = 1.0 / (2.0 * mass * grid.spacing() * grid.spacing());

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        h(i, i) = 2.0 * k + potential[i];
        if (i + 1 < n) {
            h(i, i + 1) = -k;
            h(i + 1, i) = -k;
        }
    }
    if (grid.boundary() == Boundary::PBC) {
        h(0, n - 1) += -k;
        h(n - 1, 0) += -k;
    }
    return {std::move(h), mass, grid.boundary()};
}

EigenStates lowest_eigenstates(const SingleParticleOperator& op, const SpatialGrid& grid,
                               int count) {
    const int n = static_cast<int>(op.matrix.rows());
    if (count < 1 || count > n)
        throw std::invalid_argument("lowest_eigenstates: bad count");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    if (op.boundary == Boundary::OBC) {
        // Tridiagonal fast path.
        Eigen::VectorXd diag = op.matrix.diagonal();
        Eigen::VectorXd sub(n - 1);
        for (int i = 0; i < n - 1; ++i) sub[i] = op.matrix(i + 1, i);
        solver.computeFromTridiagonal(diag, sub);
    } else {
        solver.compute(op.matrix);
    }
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("lowest_eigenstates: eigensolver failed");

    EigenStates out;
    out.energies = solver.eigenvalues().head(count);
    out.orbitals.resize(n, count);
    for (int c = 0; c < count; ++c) {
        Eigen::VectorXd phi = solver.eigenvectors().col(c);
        phi /= grid.norm(phi);
        out.orbitals.col(c) = phi;
    }
    return out;
}

Eigen::VectorXd hartree_potential(const Eigen::VectorXd& density, const SpatialGrid& grid,
                                  bool ring_metric) {
    if (density.size() != grid.num_points())
        throw std::invalid_argument("hartree_potential: density/grid mismatch");
    const int n = grid.num_points();
    const Eigen::VectorXd w = grid.quadrature_weights();
    const double lx = grid.length();

    Eigen::VectorXd vh(n);
    for (int i = 0; i < n; ++i) {
        const double xi = grid.node(i);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            double dist = std::abs(xi - grid.node(j));
            if (ring_metric) dist = std::min(dist, lx - dist);
            acc += w[j] * density[j] / (dist + 1.0);
        }
        vh[i] = acc;
    }
    return vh;
}

Eigen::VectorXd xc_potential_lda(const Eigen::VectorXd& density) {
    Eigen::VectorXd vxc(density.size());
    for (Eigen::Index i = 0; i < density.size(); ++i) {
        const double n = density[i];
        if (n < 0.0)
            throw std::invalid_argument("xc_potential_lda: negative density");
        vxc[i] = n == 0.0 ? 0.0
                          : (-1.19 + 1.77 * n - 1.37 * n * n) * std::pow(n, 0.604);
    }
    return vxc;
}

PulayResult pulay_mix(const std::vector<Eigen::VectorXd>& densities,
                      const std::vector<Eigen::VectorXd>& ks_densities,
                      const SpatialGrid& grid, const ScfSettings& settings) {
    const int m = static_cast<int>(densities.size());
    if (m == 0 || ks_densities.size() != densities.size())
        throw std::invalid_argument("pulay_mix: bad history");
    if (m > settings.memory)
        throw std::invalid_argument("pulay_mix: history longer than memory");

    std::vector<Eigen::VectorXd> residuals(m);
    for (int i = 0; i < m; ++i) residuals[i] = ks_densities[i] - densities[i];

    Eigen::VectorXd c;
    bool fallback = false;
    if (m == 1) {
        c = Eigen::VectorXd::Ones(1);
    } else {
        // Bordered Gram system: minimize |sum c_m R_m|^2 with sum c_m = 1.
        Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 1, m + 1);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                sys(i, j) = grid.inner(residuals[i], residuals[j]);
        sys.block(0, m, m, 1).setOnes();
        sys.block(m, 0, 1, m).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
        rhs[m] = 1.0;

        Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
        if (lu.isInvertible()) {
            Eigen::VectorXd sol = lu.solve(rhs);
            c = sol.head(m);
            if (!c.allFinite() || c.cwiseAbs().maxCoeff() > 1e6) fallback = true;
        } else {
            fallback = true;
        }
    }

    PulayResult out;
    if (fallback) {
        // Plain linear mixing of the latest pair.
        out.density = densities.back() + settings.mixing_alpha * residuals.back();
        out.coefficients = Eigen::VectorXd::Zero(m);
        out.coefficients[m - 1] = 1.0;
        out.fallback = true;
        return out;
    }

    Eigen::VectorXd next = Eigen::VectorXd::Zero(densities[0].size());
    for (int i = 0; i < m; ++i)
        next += c[i] * (densities[i] + settings.mixing_alpha * residuals[i]);
    out.density = std::move(next);
    out.coefficients = std::move(c);
    return out;
}

namespace {

Eigen::VectorXd density_from_orbitals(const EigenStates& states) {
    return states.orbitals.col(0).cwiseAbs2() + states.orbitals.col(1).cwiseAbs2();
}

} // namespace

ScfResult solve_ks(const SpatialGrid& grid, const Eigen::VectorXd& external_potential,
                   double mass, const ScfSettings& settings,
                   const Eigen::VectorXd* initial_density) {
    if (!(settings.mixing_alpha > 0.0 && settings.mixing_alpha <= 1.0))
        throw std::invalid_argument("solve_ks: mixing_alpha outside (0,1]");
    if (settings.memory < 1) throw std::invalid_argument("solve_ks: memory < 1");
    if (!(settings.tolerance > 0.0)) throw std::invalid_argument("solve_ks: tolerance <= 0");

    Eigen::VectorXd n_cur;
    if (initial_density) {
        n_cur = *initial_density;
    } else {
        auto bare = build_single_particle_hamiltonian(grid, external_potential, mass);
        n_cur = density_from_orbitals(lowest_eigenstates(bare, grid, 2));
    }

    std::deque<Eigen::VectorXd> hist_n, hist_ks;
    ScfResult result;

    for (int s = 1; s <= settings.max_iterations; ++s) {
        Eigen::VectorXd v_ks = external_potential;
        if (settings.interaction) {
            const Eigen::VectorXd n_pos = n_cur.cwiseMax(0.0);
            v_ks += hartree_potential(n_pos, grid, settings.hartree_ring_metric);
            v_ks += xc_potential_lda(n_pos);
        }
        auto op = build_single_particle_hamiltonian(grid, v_ks, mass);
        auto states = lowest_eigenstates(op, grid, 2);
        Eigen::VectorXd n_ks = density_from_orbitals(states);

        hist_n.push_back(n_cur);
        hist_ks.push_back(n_ks);
        if (static_cast<int>(hist_n.size()) > settings.memory) {
            hist_n.pop_front();
            hist_ks.pop_front();
        }

        auto mixed = pulay_mix({hist_n.begin(), hist_n.end()},
                               {hist_ks.begin(), hist_ks.end()}, grid, settings);
        if (mixed.fallback) ++result.pulay_fallbacks;

        const double residual = grid.l1_distance(mixed.density, n_cur);
        if (residual < settings.tolerance) {
            result.density = {std::move(n_ks), 2.0};
            result.iterations = s;
            result.residual = residual;
            return result;
        }
        n_cur = std::move(mixed.density);
        result.residual = residual;
    }
    throw ConvergenceError("solve_ks: SCF did not converge within max_iterations",
                           result.residual);
}

} // namespace qdens
