#include "qdens/reservoir.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qdens {

double nn_interaction(double side, double c6) {
    if (!(side > 0.0)) throw std::invalid_argument("nn_interaction: side must be positive");
    return c6 / std::pow(side, 6);
}

double side_from_vnn(double vnn, double c6) {
    if (!(vnn > 0.0)) throw std::invalid_argument("side_from_vnn: vnn must be positive");
    return std::pow(c6 / vnn, 1.0 / 6.0);
}

std::vector<std::array<double, 2>> square_geometry(double side) {
    if (!(side > 0.0)) throw std::invalid_argument("square_geometry: side must be positive");
    return {{0.0, 0.0}, {side, 0.0}, {0.0, side}, {side, side}};
}

ReservoirConfig ReservoirConfig::for_problem(ProblemKind kind, double vnn,
                                             double omega_glob, double delta_glob,
                                             double delta_loc, double v_homo, double c6) {
    ReservoirConfig cfg;
    // With the interaction coefficient switched off the geometry is
    // irrelevant; any positive side works.
    cfg.positions = square_geometry(c6 != 0.0 ? side_from_vnn(vnn, c6) : 1.0);
    cfg.omega_glob = omega_glob;
    cfg.delta_glob = delta_glob;
    cfg.delta_loc = delta_loc;
    cfg.v_homo = v_homo;
    cfg.c6 = c6;
    cfg.addressed_sites =
        kind == ProblemKind::H2 ? std::vector<int>{0, 2} : std::vector<int>{0, 1, 2, 3};
    return cfg;
}

double ReservoirConfig::omega_max() const {
    const double other = delta_glob == 0.0 ? delta_loc : delta_glob;
    return std::sqrt(omega_glob * omega_glob + other * other);
}

Eigen::VectorXd site_detunings(const ReservoirConfig& config, const Eigen::VectorXd& v) {
    if (v.size() != static_cast<Eigen::Index>(config.addressed_sites.size()))
        throw std::invalid_argument("site_detunings: feature count mismatch");
    for (Eigen::Index f = 0; f < v.size(); ++f)
        if (v[f] < 0.0 || v[f] > 1.0)
            throw std::invalid_argument("site_detunings: rescaled feature outside [0,1]");

    Eigen::VectorXd delta =
        Eigen::VectorXd::Constant(config.num_qubits,
                                  config.delta_glob + config.v_homo * config.delta_loc);
    for (std::size_t f = 0; f < config.addressed_sites.size(); ++f) {
        const int site = config.addressed_sites[f];
        delta[site] = config.delta_glob + v[static_cast<Eigen::Index>(f)] * config.delta_loc;
    }
    return delta;
}

Eigen::MatrixXd build_reservoir_hamiltonian(const ReservoirConfig& config,
                                            const Eigen::VectorXd& v) {
    const int nq = config.num_qubits;
    if (static_cast<int>(config.positions.size()) != nq)
        throw std::invalid_argument("build_reservoir_hamiltonian: positions/qubits mismatch");
    const int dim = config.hilbert_dim();
    const Eigen::VectorXd delta = site_detunings(config, v);

    Eigen::MatrixXd vdw = Eigen::MatrixXd::Zero(nq, nq);
    for (int i = 0; i < nq; ++i)
        for (int j = i + 1; j < nq; ++j) {
            const double dx = config.positions[i][0] - config.positions[j][0];
            const double dy = config.positions[i][1] - config.positions[j][1];
            vdw(i, j) = config.c6 / std::pow(std::hypot(dx, dy), 6);
        }

    // Site j occupies bit (nq-1-j): site 0 is the most significant digit.
    const auto occupied = [nq](int basis, int site) {
        return (basis >> (nq - 1 - site)) & 1;
    };

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int b = 0; b < dim; ++b) {
        double diag = 0.0;
        for (int j = 0; j < nq; ++j) {
            if (!occupied(b, j)) continue;
            diag -= delta[j];
            for (int i = 0; i < j; ++i)
                if (occupied(b, i)) diag += vdw(i, j);
        }
        h(b, b) = diag;
        for (int j = 0; j < nq; ++j)
            h(b, b ^ (1 << (nq - 1 - j))) += config.omega_glob / 2.0;
    }
    return h;
}

ReservoirPropagator::ReservoirPropagator(const Eigen::MatrixXd& hamiltonian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("ReservoirPropagator: eigensolver failed");
    evals_ = solver.eigenvalues();
    evecs_ = solver.eigenvectors();
    ground_overlaps_ = evecs_.row(0).transpose(); // <k|g...g>
}

Eigen::VectorXcd ReservoirPropagator::state_at(double t) const {
    if (t < 0.0) throw std::invalid_argument("state_at: negative time");
    const Eigen::Index dim = evals_.size();
    if (t == 0.0) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
        psi[0] = 1.0;
        return psi;
    }
    Eigen::VectorXcd phases(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const double angle = -evals_[k] * t;
        phases[k] = ground_overlaps_[k] *
                    std::complex<double>(std::cos(angle), std::sin(angle));
    }
    return evecs_ * phases;
}

Eigen::VectorXcd evolve(const Eigen::MatrixXd& hamiltonian, double t) {
    return ReservoirPropagator(hamiltonian).state_at(t);
}

MeasurementVector measure(const Eigen::VectorXcd& state, double tstar) {
    const int dim = static_cast<int>(state.size());
    const int nq = static_cast<int>(std::round(std::log2(dim)));
    if ((1 << nq) != dim) throw std::invalid_argument("measure: dimension not a power of 2");
    if (std::abs(state.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("measure: state not normalized");

    // sigma^z values are diagonal in the product basis, so expectations are
    // probability-weighted sums of +-1.
    Eigen::VectorXd sz = Eigen::VectorXd::Zero(nq);
    Eigen::MatrixXd szsz = Eigen::MatrixXd::Zero(nq, nq);
    for (int b = 0; b < dim; ++b) {
        const double p = std::norm(state[b]);
        for (int j = 0; j < nq; ++j) {
            const double zj = ((b >> (nq - 1 - j)) & 1) ? 1.0 : -1.0;
            sz[j] += p * zj;
            for (int i = 0; i < j; ++i) {
                const double zi = ((b >> (nq - 1 - i)) & 1) ? 1.0 : -1.0;
                szsz(i, j) += p * zi * zj;
            }
        }
    }

    MeasurementVector out;
    out.tstar = tstar;
    int idx = 0;
    for (int j = 0; j < nq; ++j) out.m[idx++] = sz[j];
    for (int i = 0; i < nq; ++i)
        for (int j = i + 1; j < nq; ++j) out.m[idx++] = szsz(i, j);
    return out;
}

MeasurementTable embed_samples(const ReservoirConfig& config,
                               const std::vector<Eigen::VectorXd>& rescaled_features,
                               const std::vector<double>& times) {
    if (rescaled_features.empty() || times.empty())
        throw std::invalid_argument("embed_samples: empty samples or times");
    MeasurementTable table;
    table.num_samples = static_cast<int>(rescaled_features.size());
    table.times = times;
    table.rows.reserve(rescaled_features.size() * times.size());
    for (const auto& v : rescaled_features) {
        ReservoirPropagator prop(build_reservoir_hamiltonian(config, v));
        for (double t : times) table.rows.push_back(measure(prop.state_at(t), t));
    }
    return table;
}

} // namespace qdens
