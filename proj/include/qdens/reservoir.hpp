#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "qdens/problem.hpp"

namespace qdens {

// Pairwise van der Waals coupling for atoms a distance `side` apart.
double nn_interaction(double side, double c6);
double side_from_vnn(double vnn, double c6);

// Square of side a: q0=(0,0), q1=(a,0), q2=(0,a), q3=(a,a). Sites 0 and 2
// are nearest neighbors; (0,3) and (1,2) are the diagonals.
std::vector<std::array<double, 2>> square_geometry(double side);

// Four-qubit Rydberg reservoir. Rescaled potential features enter the local
// detunings of the addressed sites; the remaining sites sit at v_homo.
// Frequencies in rad/us, distances in um.
struct ReservoirConfig {
    int num_qubits = 4;
    std::vector<std::array<double, 2>> positions;
    double omega_glob = 5.0;
    double delta_glob = 0.0;
    double delta_loc = -3.5;
    double c6 = 865723.02; // rad um^6 / us
    double v_homo = 0.5;
    std::vector<int> addressed_sites;

    static ReservoirConfig for_problem(ProblemKind kind, double vnn, double omega_glob,
                                       double delta_glob, double delta_loc,
                                       double v_homo = 0.5, double c6 = 865723.02);

    // Bloch precession frequency used to rescale measurement times.
    double omega_max() const;

    int hilbert_dim() const { return 1 << num_qubits; }
};

// Per-site detunings for one rescaled feature vector.
Eigen::VectorXd site_detunings(const ReservoirConfig& config, const Eigen::VectorXd& v);

// H = (Omega/2) sum sigma^x_j - sum Delta_j n_j + sum_{i<j} C6/d_ij^6 n_i n_j.
// Product basis ordered with site 0 as the most significant digit, g -> 0.
// The matrix is real symmetric.
Eigen::MatrixXd build_reservoir_hamiltonian(const ReservoirConfig& config,
                                            const Eigen::VectorXd& v);

// Exact propagator from |g...g> via one eigendecomposition, reusable across
// measurement times.
class ReservoirPropagator {
public:
    explicit ReservoirPropagator(const Eigen::MatrixXd& hamiltonian);
    Eigen::VectorXcd state_at(double t) const;

private:
    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_;
    Eigen::VectorXd ground_overlaps_; // evecs^T |g...g>
};

Eigen::VectorXcd evolve(const Eigen::MatrixXd& hamiltonian, double t);

// Measurement vector: 4 magnetizations then the 6 ordered pair correlators
// (01,02,03,12,13,23), with sigma^z = 2n - 1.
struct MeasurementVector {
    std::array<double, 10> m{};
    double tstar = 0.0;

    Eigen::VectorXd as_vector() const {
        return Eigen::Map<const Eigen::VectorXd>(m.data(), 10);
    }
};

MeasurementVector measure(const Eigen::VectorXcd& state, double tstar);

// Rows ordered sample-major, then by time index.
struct MeasurementTable {
    int num_samples = 0;
    std::vector<double> times;
    std::vector<MeasurementVector> rows;

    const MeasurementVector& at(int sample, int time_index) const {
        return rows[static_cast<std::size_t>(sample) * times.size() + time_index];
    }
};

MeasurementTable embed_samples(const ReservoirConfig& config,
                               const std::vector<Eigen::VectorXd>& rescaled_features,
                               const std::vector<double>& times);

} // namespace qdens
