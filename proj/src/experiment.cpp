#include <algorithm>
#include <cmath>
#include <iostream>

#include "qdens/pipeline.hpp"
#include "qdens/rng.hpp"

namespace qdens {

namespace {

constexpr std::uint64_t kCvStream = 1ULL << 40;

// Cross-kernel rows between hidden queries and the training rows, cached per
// gamma so every coefficient regression reuses them.
class CrossKernel {
public:
    CrossKernel(const KernelData& train, Eigen::MatrixXd hidden_rows)
        : train_(train), hidden_(std::move(hidden_rows)) {}

    const Eigen::MatrixXd& at(double gamma) const {
        auto it = cache_.find(gamma);
        if (it != cache_.end()) return it->second;
        Eigen::MatrixXd rows(hidden_.rows(), train_.rows.rows());
        for (Eigen::Index h = 0; h < hidden_.rows(); ++h)
            rows.row(h) = train_.kernel_row(hidden_.row(h).transpose(), gamma).transpose();
        return cache_.emplace(gamma, std::move(rows)).first->second;
    }

private:
    const KernelData& train_;
    Eigen::MatrixXd hidden_;
    mutable std::map<double, Eigen::MatrixXd> cache_;
};

// Train per coefficient and predict the hidden rows. Hyperparameters come
// from k-fold CV by default, or from hidden-set error when selecting on the
// hidden set is requested.
Eigen::MatrixXd fit_predict(const KernelData& train_data, const Eigen::MatrixXd& u_train,
                            const Eigen::MatrixXd& hidden_rows,
                            const Eigen::MatrixXd& u_hidden,
                            const HyperparameterGrid& grid, bool select_on_hidden,
                            std::uint64_t cv_seed) {
    const CrossKernel cross(train_data, hidden_rows);
    Eigen::MatrixXd predicted(u_hidden.rows(), u_train.cols());

    if (!select_on_hidden) {
        const auto models = train_multi(train_data, u_train, grid, cv_seed);
        for (const auto& model : models) {
            const Eigen::MatrixXd& rows = cross.at(model.gamma);
            for (Eigen::Index h = 0; h < rows.rows(); ++h)
                predicted(h, model.target_index) = predict(model, rows.row(h).transpose());
        }
        return predicted;
    }

    std::vector<double> gammas = train_data.kind == KernelKind::RBF
                                     ? rbf_gamma_grid(train_data.rows, grid.gamma_values)
                                     : std::vector<double>{0.0};
    std::sort(gammas.begin(), gammas.end());
    std::vector<std::pair<double, GramMatrix>> grams;
    for (double g : gammas) grams.emplace_back(g, train_data.gram(g));

    std::vector<double> cs = grid.c_values;
    std::sort(cs.begin(), cs.end());
    std::vector<double> eps = grid.epsilon_values;
    std::sort(eps.begin(), eps.end(), std::greater<>());

    for (Eigen::Index l = 0; l < u_train.cols(); ++l) {
        double best_err = std::numeric_limits<double>::infinity();
        Eigen::VectorXd best_pred;
        for (double c : cs)
            for (double e : eps)
                for (const auto& [gamma, gram] : grams) {
                    const SvrModel model = train_svr(gram, u_train.col(l), c, e);
                    const Eigen::MatrixXd& rows = cross.at(gamma);
                    Eigen::VectorXd pred(rows.rows());
                    for (Eigen::Index h = 0; h < rows.rows(); ++h)
                        pred[h] = predict(model, rows.row(h).transpose());
                    const double err = (pred - u_hidden.col(l)).cwiseAbs().mean();
                    if (err < best_err) {
                        best_err = err;
                        best_pred = pred;
                    }
                }
        predicted.col(l) = best_pred;
    }
    return predicted;
}

struct ReplicaResult {
    ReplicaData data;
    std::vector<ErrorCell> cells;
};

ReplicaResult run_replica(const ExperimentConfig& cfg, const SpatialGrid& grid,
                          const ExpansionBasis& basis, const ReservoirConfig& reservoir,
                          const std::vector<double>& times, int replica,
                          bool with_kernels) {
    const std::uint64_t rseed = spawn_seed(cfg.seed, static_cast<std::uint64_t>(replica));
    const int n_samples = cfg.n_train + cfg.n_hidden;

    ReplicaResult out;
    ReplicaData& data = out.data;
    data.samples = make_samples(cfg.problem, grid, n_samples, rseed);

    data.densities.resize(n_samples, grid.num_points());
    data.coefficients.resize(n_samples, basis.size());
    data.scf_iterations.resize(n_samples);
    data.scf_residuals.resize(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const ScfResult scf = solve_ks(grid, data.samples[i].values, cfg.problem.mass, cfg.scf);
        data.densities.row(i) = scf.density.values;
        data.coefficients.row(i) = project_density(scf.density.values, basis, grid);
        data.scf_iterations[i] = scf.iterations;
        data.scf_residuals[i] = scf.residual;
    }

    if (!with_kernels) return out;

    const int nf = cfg.problem.num_features();
    Eigen::MatrixXd v_train(cfg.n_train, nf), v_hidden(cfg.n_hidden, nf);
    for (int i = 0; i < cfg.n_train; ++i) v_train.row(i) = data.samples[i].rescaled;
    for (int i = 0; i < cfg.n_hidden; ++i)
        v_hidden.row(i) = data.samples[cfg.n_train + i].rescaled;
    const Eigen::MatrixXd u_train = data.coefficients.topRows(cfg.n_train);
    const Eigen::MatrixXd u_hidden = data.coefficients.bottomRows(cfg.n_hidden);

    const bool need_pqk = std::find(cfg.kernels.begin(), cfg.kernels.end(),
                                    KernelKind::PQK) != cfg.kernels.end();
    if (need_pqk) {
        std::vector<Eigen::VectorXd> all_v;
        all_v.reserve(n_samples);
        for (const auto& s : data.samples) all_v.push_back(s.rescaled);
        data.measurements = embed_samples(reservoir, all_v, times);
    }

    const std::uint64_t cv_seed = spawn_seed(rseed, kCvStream);
    for (KernelKind kernel : cfg.kernels) {
        if (kernel == KernelKind::PQK) {
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                std::vector<MeasurementVector> train_rows, hidden_rows;
                for (int i = 0; i < cfg.n_train; ++i)
                    train_rows.push_back(data.measurements.at(i, static_cast<int>(ti)));
                for (int i = 0; i < cfg.n_hidden; ++i)
                    hidden_rows.push_back(
                        data.measurements.at(cfg.n_train + i, static_cast<int>(ti)));
                const KernelData kd = KernelData::pqk(train_rows);
                Eigen::MatrixXd h_rows(cfg.n_hidden, 10);
                for (int i = 0; i < cfg.n_hidden; ++i)
                    h_rows.row(i) = hidden_rows[static_cast<std::size_t>(i)].as_vector();
                const Eigen::MatrixXd pred = fit_predict(
                    kd, u_train, h_rows, u_hidden, cfg.hyper, cfg.select_on_hidden, cv_seed);
                out.cells.push_back(
                    {kernel, times[ti], replica, compute_error(pred, u_hidden, basis, grid)});
            }
        } else {
            const KernelData kd = KernelData::classical(kernel, v_train);
            const Eigen::MatrixXd pred = fit_predict(kd, u_train, v_hidden, u_hidden,
                                                     cfg.hyper, cfg.select_on_hidden, cv_seed);
            out.cells.push_back({kernel, std::numeric_limits<double>::quiet_NaN(), replica,
                                 compute_error(pred, u_hidden, basis, grid)});
        }
    }
    return out;
}

} // namespace

double compute_error(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& reference,
                     const ExpansionBasis& basis, const SpatialGrid& grid) {
    if (predicted.rows() != reference.rows() || predicted.cols() != reference.cols())
        throw std::invalid_argument("compute_error: shape mismatch");
    if (predicted.cols() != basis.size())
        throw std::invalid_argument("compute_error: coefficient count mismatch");
    if (predicted.rows() == 0) throw std::invalid_argument("compute_error: no samples");

    double total = 0.0;
    for (Eigen::Index k = 0; k < predicted.rows(); ++k) {
        const Eigen::VectorXd n_ml = reconstruct_density(predicted.row(k), basis);
        const Eigen::VectorXd n_ref = reconstruct_density(reference.row(k), basis);
        total += grid.l1_distance(n_ml, n_ref);
    }
    return total / static_cast<double>(predicted.rows());
}

namespace {

ErrorReport run_replicas(const ExperimentConfig& cfg, bool with_kernels) {
    cfg.validate();
    const SpatialGrid grid = cfg.make_grid();
    const ExpansionBasis basis =
        build_truncated_basis(cfg.problem, grid, cfg.basis_n_left, cfg.basis_n_center,
                              cfg.basis_n_right, cfg.basis_height);
    const ReservoirConfig reservoir = cfg.make_reservoir();

    ErrorReport report;
    report.config = cfg;
    report.omega_max = reservoir.omega_max();
    report.times = cfg.times.materialize(report.omega_max);
    report.replicas.resize(cfg.num_replicas);

    for (int r = 0; r < cfg.num_replicas; ++r) {
        try {
            ReplicaResult result =
                run_replica(cfg, grid, basis, reservoir, report.times, r, with_kernels);
            report.replicas[r] = std::move(result.data);
            report.cells.insert(report.cells.end(), result.cells.begin(),
                                result.cells.end());
        } catch (const std::exception& e) {
            std::cerr << "replica " << r << " aborted: " << e.what() << "\n";
            report.replica_errors[r] = e.what();
        }
    }
    return report;
}

} // namespace

ErrorReport run_experiment(const ExperimentConfig& cfg) { return run_replicas(cfg, true); }

ErrorReport generate_datasets(const ExperimentConfig& cfg) {
    return run_replicas(cfg, false);
}

ErrorReport sweep_measurement_time(const ExperimentConfig& cfg) {
    if (cfg.times.explicit_times.empty() && cfg.times.count < 1)
        throw std::invalid_argument("sweep_measurement_time: empty time grid");
    ExperimentConfig sweep = cfg;
    sweep.kernels = {KernelKind::Linear, KernelKind::RBF, KernelKind::PQK};
    return run_experiment(sweep);
}

std::vector<ErrorReport::Aggregate> ErrorReport::aggregate() const {
    // Canonical row order: linear, rbf, then PQK by time index.
    std::vector<std::pair<KernelKind, double>> keys;
    for (KernelKind k : {KernelKind::Linear, KernelKind::RBF}) {
        const bool present = std::any_of(cells.begin(), cells.end(), [&](const ErrorCell& c) {
            return c.kernel == k;
        });
        if (present) keys.emplace_back(k, std::numeric_limits<double>::quiet_NaN());
    }
    const bool has_pqk = std::any_of(cells.begin(), cells.end(), [](const ErrorCell& c) {
        return c.kernel == KernelKind::PQK;
    });
    if (has_pqk)
        for (double t : times) keys.emplace_back(KernelKind::PQK, t);

    std::vector<Aggregate> out;
    const int nr = config.num_replicas;
    for (const auto& [kernel, tstar] : keys) {
        Aggregate agg;
        agg.kernel = kernel;
        agg.tstar = tstar;
        agg.per_replica.assign(nr, std::numeric_limits<double>::quiet_NaN());
        for (const ErrorCell& c : cells) {
            if (c.kernel != kernel) continue;
            if (kernel == KernelKind::PQK && c.tstar != tstar) continue;
            agg.per_replica[c.replica] = c.error;
        }
        double sum = 0.0;
        int n = 0;
        for (double v : agg.per_replica)
            if (std::isfinite(v)) {
                sum += v;
                ++n;
            }
        agg.mean = n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
        double ss = 0.0;
        for (double v : agg.per_replica)
            if (std::isfinite(v)) ss += (v - agg.mean) * (v - agg.mean);
        agg.stdev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        out.push_back(std::move(agg));
    }
    return out;
}

std::vector<std::pair<double, double>> magnetization_difference(
    const ExperimentConfig& cfg, const Eigen::VectorXd& v_addressed) {
    const ReservoirConfig reservoir = cfg.make_reservoir();
    if (reservoir.addressed_sites.size() != 2)
        throw std::invalid_argument(
            "magnetization_difference: requires a two-site encoding");
    const std::vector<double> times = cfg.times.materialize(reservoir.omega_max());
    const ReservoirPropagator prop(build_reservoir_hamiltonian(reservoir, v_addressed));
    std::vector<std::pair<double, double>> series;
    series.reserve(times.size());
    for (double t : times) {
        const MeasurementVector m = measure(prop.state_at(t), t);
        series.emplace_back(t, std::abs(m.m[1] - m.m[3]));
    }
    return series;
}

std::vector<ScalingEntry> scaling_study(const ExperimentConfig& cfg,
                                        const std::vector<int>& train_sizes) {
    if (train_sizes.empty()) throw std::invalid_argument("scaling_study: no sizes");
    std::vector<ScalingEntry> out;
    for (int size : train_sizes) {
        if (size < 1) throw std::invalid_argument("scaling_study: bad train size");
        ExperimentConfig run = cfg;
        run.n_train = size;
        out.push_back({size, run_experiment(run)});
    }
    return out;
}

std::vector<IntervalEntry> interval_study(
    const ExperimentConfig& cfg, const std::vector<ExperimentConfig::IntervalSet>& sets) {
    if (cfg.problem.kind != ProblemKind::TripleWell)
        throw std::invalid_argument("interval_study: triple-well problem required");
    if (sets.empty()) throw std::invalid_argument("interval_study: no interval sets");
    std::vector<IntervalEntry> out;
    for (const auto& set : sets) {
        ExperimentConfig run = cfg;
        run.problem = FermionProblem::triple_well_with_ranges(set.heights, set.widths);
        out.push_back({set, sweep_measurement_time(run)});
    }
    return out;
}

TrainingOutput train_models(const ExperimentConfig& cfg) {
    cfg.validate();
    const SpatialGrid grid = cfg.make_grid();
    const ExpansionBasis basis =
        build_truncated_basis(cfg.problem, grid, cfg.basis_n_left, cfg.basis_n_center,
                              cfg.basis_n_right, cfg.basis_height);
    const ReservoirConfig reservoir = cfg.make_reservoir();
    const std::vector<double> times = cfg.times.materialize(reservoir.omega_max());

    TrainingOutput out;
    out.config = cfg;
    out.tstar = times.front();

    const std::uint64_t rseed = spawn_seed(cfg.seed, 0);
    const int n_samples = cfg.n_train + cfg.n_hidden;
    ReplicaData& data = out.data;
    data.samples = make_samples(cfg.problem, grid, n_samples, rseed);
    data.densities.resize(n_samples, grid.num_points());
    data.coefficients.resize(n_samples, basis.size());
    data.scf_iterations.resize(n_samples);
    data.scf_residuals.resize(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const ScfResult scf = solve_ks(grid, data.samples[i].values, cfg.problem.mass, cfg.scf);
        data.densities.row(i) = scf.density.values;
        data.coefficients.row(i) = project_density(scf.density.values, basis, grid);
        data.scf_iterations[i] = scf.iterations;
        data.scf_residuals[i] = scf.residual;
    }

    const int nf = cfg.problem.num_features();
    Eigen::MatrixXd v_train(cfg.n_train, nf), v_hidden(cfg.n_hidden, nf);
    for (int i = 0; i < cfg.n_train; ++i) v_train.row(i) = data.samples[i].rescaled;
    for (int i = 0; i < cfg.n_hidden; ++i)
        v_hidden.row(i) = data.samples[cfg.n_train + i].rescaled;
    const Eigen::MatrixXd u_train = data.coefficients.topRows(cfg.n_train);
    const Eigen::MatrixXd u_hidden = data.coefficients.bottomRows(cfg.n_hidden);
    const std::uint64_t cv_seed = spawn_seed(rseed, kCvStream);

    for (KernelKind kernel : cfg.kernels) {
        KernelData kd = KernelData::classical(KernelKind::Linear, v_train);
        Eigen::MatrixXd h_rows = v_hidden;
        if (kernel == KernelKind::PQK) {
            std::vector<Eigen::VectorXd> all_v;
            for (const auto& s : data.samples) all_v.push_back(s.rescaled);
            data.measurements = embed_samples(reservoir, all_v, {out.tstar});
            std::vector<MeasurementVector> train_rows;
            for (int i = 0; i < cfg.n_train; ++i)
                train_rows.push_back(data.measurements.at(i, 0));
            kd = KernelData::pqk(train_rows);
            h_rows.resize(cfg.n_hidden, 10);
            for (int i = 0; i < cfg.n_hidden; ++i)
                h_rows.row(i) = data.measurements.at(cfg.n_train + i, 0).as_vector();
        } else {
            kd = KernelData::classical(kernel, v_train);
        }
        auto models = train_multi(kd, u_train, cfg.hyper, cv_seed);
        const CrossKernel cross(kd, h_rows);
        Eigen::MatrixXd pred(cfg.n_hidden, basis.size());
        for (const auto& model : models) {
            const Eigen::MatrixXd& rows = cross.at(model.gamma);
            for (Eigen::Index h = 0; h < rows.rows(); ++h)
                pred(h, model.target_index) = predict(model, rows.row(h).transpose());
        }
        out.errors[to_string(kernel)] = compute_error(pred, u_hidden, basis, grid);
        out.predicted[to_string(kernel)] = std::move(pred);
        out.models.emplace_back(kernel, std::move(models));
    }
    return out;
}

} // namespace qdens
