#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdens/basis.hpp"
#include "qdens/ksdft.hpp"
#include "qdens/reservoir.hpp"
#include "qdens/sampling.hpp"
#include "qdens/svr.hpp"

namespace qdens {

inline constexpr const char* kProjectVersion = "0.1.0";

// Measurement-time grid, either uniform in scaled units t*Omega_max or an
// explicit list in microseconds.
struct TimeGridSpec {
    int count = 48;
    double omega_t_min = 0.05 * 3.14159265358979323846;
    double omega_t_max = 2.0 * 3.14159265358979323846;
    std::vector<double> explicit_times;

    std::vector<double> materialize(double omega_max) const;

    nlohmann::json to_json() const;
    static TimeGridSpec from_json(const nlohmann::json& j);
};

// Full description of one experiment; every run artifact is a pure function
// of this struct.
struct ExperimentConfig {
    FermionProblem problem = FermionProblem::h2();
    int num_points = 201;

    ScfSettings scf;

    int basis_n_left = 10;
    int basis_n_center = 10;
    int basis_n_right = 10;
    double basis_height = 20.0;

    double omega_glob = 5.0;
    double delta_glob = 0.0;
    double delta_loc = -3.5;
    double v_homo = 0.5;
    double vnn = 4.0;
    double c6 = 865723.02;

    std::vector<KernelKind> kernels = {KernelKind::Linear, KernelKind::RBF,
                                       KernelKind::PQK};
    HyperparameterGrid hyper;
    // Select hyperparameters on the hidden set instead of by cross-validation.
    bool select_on_hidden = false;

    int n_train = 20;
    int n_hidden = 20;
    int num_replicas = 20;

    TimeGridSpec times;
    std::uint64_t seed = 20250810;

    // Optional study inputs.
    std::vector<int> train_sizes;
    std::vector<double> vnn_list;
    struct IntervalSet {
        FeatureRange heights;
        FeatureRange widths;
    };
    std::vector<IntervalSet> interval_sets;

    SpatialGrid make_grid() const;
    ReservoirConfig make_reservoir() const;
    void validate() const;

    nlohmann::json to_json() const;
    // Accepts either a bare config or a manifest wrapping one under "config".
    static ExperimentConfig from_json(const nlohmann::json& j);
};

// Everything produced for one replica, kept for export.
struct ReplicaData {
    std::vector<PotentialSample> samples;
    Eigen::MatrixXd densities;    // samples x grid nodes
    Eigen::MatrixXd coefficients; // samples x N_trunc
    std::vector<int> scf_iterations;
    std::vector<double> scf_residuals;
    MeasurementTable measurements; // empty when PQK is not requested
};

struct ErrorCell {
    KernelKind kernel = KernelKind::Linear;
    double tstar = std::numeric_limits<double>::quiet_NaN(); // NaN: t*-independent
    int replica = 0;
    double error = 0.0;
};

struct ErrorReport {
    ExperimentConfig config;
    double omega_max = 0.0;
    std::vector<double> times;
    std::vector<ErrorCell> cells;
    std::vector<std::optional<ReplicaData>> replicas;
    std::map<int, std::string> replica_errors;

    struct Aggregate {
        KernelKind kernel;
        double tstar;
        double mean = 0.0;
        double stdev = 0.0;
        std::vector<double> per_replica; // NaN marks a missing cell
    };
    // Baselines first, then PQK ordered by time.
    std::vector<Aggregate> aggregate() const;
};

// Mean L1 distance between reconstructions of predicted and reference
// coefficient rows.
double compute_error(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference,
                     const ExpansionBasis& basis, const SpatialGrid& grid);

ErrorReport run_experiment(const ExperimentConfig& config);

// Samples, densities and coefficients only; no kernel training.
ErrorReport generate_datasets(const ExperimentConfig& config);

// PQK error across the time grid plus the two classical baselines.
ErrorReport sweep_measurement_time(const ExperimentConfig& config);

// |M^z_1 - M^z_3| over the time grid for one extreme sample on the addressed
// sites. Requires a two-site encoding.
std::vector<std::pair<double, double>> magnetization_difference(
    const ExperimentConfig& config, const Eigen::VectorXd& v_addressed);

struct ScalingEntry {
    int n_train = 0;
    ErrorReport report;
};
std::vector<ScalingEntry> scaling_study(const ExperimentConfig& config,
                                        const std::vector<int>& train_sizes);

struct IntervalEntry {
    ExperimentConfig::IntervalSet set;
    ErrorReport report;
};
std::vector<IntervalEntry> interval_study(
    const ExperimentConfig& config,
    const std::vector<ExperimentConfig::IntervalSet>& sets);

// Models trained at one measurement time on replica 0, with hidden-set
// predictions per kernel.
struct TrainingOutput {
    ExperimentConfig config;
    double tstar = 0.0;
    ReplicaData data;
    std::vector<std::pair<KernelKind, std::vector<SvrModel>>> models;
    std::map<std::string, Eigen::MatrixXd> predicted; // kernel name -> hidden coeffs
    std::map<std::string, double> errors;
};
TrainingOutput train_models(const ExperimentConfig& config);

// CSV/JSON export. Re-running from the emitted manifest reproduces every
// CSV byte-identically; only the manifest timestamp differs.
void export_report(const ErrorReport& report, const std::filesystem::path& dir);
void export_scaling(const std::vector<ScalingEntry>& entries, const ExperimentConfig& config,
                    const std::filesystem::path& dir);
void export_intervals(const std::vector<IntervalEntry>& entries,
                      const ExperimentConfig& config, const std::filesystem::path& dir);
void export_magnetization(const std::vector<std::vector<std::pair<double, double>>>& series,
                          const std::vector<double>& vnn_values,
                          const ExperimentConfig& config, const std::filesystem::path& dir);
void export_training(const TrainingOutput& out, const std::filesystem::path& dir);
void export_basis(const ExpansionBasis& basis, const ExperimentConfig& config,
                  const std::filesystem::path& dir);
void write_manifest(const ExperimentConfig& config, const std::filesystem::path& dir,
                    const std::map<int, std::string>& replica_errors = {});

// Named figure-reproduction configurations.
std::vector<std::string> preset_names();
nlohmann::json preset_config(const std::string& name);

} // namespace qdens
