#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qdens/reservoir.hpp"

namespace qdens {

enum class KernelKind { Linear, RBF, PQK };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);

struct GramMatrix {
    Eigen::MatrixXd k;
    KernelKind kind = KernelKind::Linear;
    double gamma = 0.0;                                  // RBF only
    double tstar = std::numeric_limits<double>::quiet_NaN(); // PQK only
};

GramMatrix gram_linear(const Eigen::MatrixXd& rows);
GramMatrix gram_rbf(const Eigen::MatrixXd& rows, double gamma);
// Linear kernel on measurement vectors; all rows must share one t*.
GramMatrix gram_pqk(const std::vector<MeasurementVector>& rows);

// Inputs a kernel is built from: one row per sample (rescaled features for
// linear/RBF, measurement vectors for PQK).
struct KernelData {
    KernelKind kind = KernelKind::Linear;
    Eigen::MatrixXd rows;
    double tstar = std::numeric_limits<double>::quiet_NaN();

    static KernelData classical(KernelKind kind, const Eigen::MatrixXd& feature_rows);
    static KernelData pqk(const std::vector<MeasurementVector>& rows);

    GramMatrix gram(double gamma) const;
    // Kernel evaluations of one query row against every stored row.
    Eigen::VectorXd kernel_row(const Eigen::VectorXd& query, double gamma) const;
};

// epsilon-SVR dual solution for one target; deltas are alpha_k - alpha*_k.
struct SvrModel {
    Eigen::VectorXd deltas;
    double bias = 0.0;
    std::vector<int> support_indices;
    double c = 1.0;
    double epsilon = 0.0;
    double gamma = 0.0;
    KernelKind kind = KernelKind::Linear;
    int target_index = 0;
    std::vector<int> training_ids;

    nlohmann::json to_json() const;
};

// Sequential-minimal-optimization solve of the dual
//   max -1/2 d^T K d - eps sum|d| + y^T d,  sum d = 0, |d_k| <= C.
// Terminates when the maximal KKT violation and the duality gap are both
// below tolerance; throws ConvergenceError otherwise.
SvrModel train_svr(const GramMatrix& gram, const Eigen::VectorXd& y, double c,
                   double epsilon);

double predict(const SvrModel& model, const Eigen::VectorXd& k_row);

struct HyperparameterGrid {
    std::vector<double> c_values = {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0};
    std::vector<double> epsilon_values = {0.0001, 0.001, 0.01, 0.1};
    std::vector<double> gamma_values = {0.1, 1.0, 10.0}; // fixed RBF entries
    int folds = 5;
};

// Fixed entries plus the data-dependent 1/(N_f sigma_avg^2) and 1/N_f.
std::vector<double> rbf_gamma_grid(const Eigen::MatrixXd& feature_rows,
                                   const std::vector<double>& fixed);

struct GridSearchResult {
    double c = 1.0;
    double epsilon = 0.0;
    double gamma = 0.0;
    double cv_error = 0.0;
};

// k-fold cross-validation over the Cartesian grid, scored by mean absolute
// error; ties resolve toward smaller C, then larger epsilon, then smaller
// gamma. Fold assignment is a seeded shuffle.
GridSearchResult grid_search(const KernelData& data, const Eigen::VectorXd& y,
                             const HyperparameterGrid& grid, std::uint64_t seed);

// One independent grid search + final fit per target column.
std::vector<SvrModel> train_multi(const KernelData& data, const Eigen::MatrixXd& targets,
                                  const HyperparameterGrid& grid, std::uint64_t seed);

} // namespace qdens
