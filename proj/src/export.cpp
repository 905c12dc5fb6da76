#include <chrono>
#include <fstream>

#include "qdens/csv.hpp"
#include "qdens/pipeline.hpp"
#include "qdens/rng.hpp"

namespace qdens {

namespace {

namespace fs = std::filesystem;

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json(const nlohmann::json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
}

std::string replica_name(int r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "replica_%03d.csv", r);
    return buf;
}

void write_samples_csv(const std::vector<PotentialSample>& samples, int nf,
                       const fs::path& path) {
    CsvWriter csv(path);
    std::vector<std::string> header = {"sample_id"};
    for (int f = 0; f < nf; ++f) header.push_back("raw_" + std::to_string(f));
    for (int f = 0; f < nf; ++f) header.push_back("v_" + std::to_string(f));
    csv.row(header);
    for (const auto& s : samples) {
        std::vector<std::string> row = {std::to_string(s.sample_id)};
        for (int f = 0; f < nf; ++f) row.push_back(format_full(s.raw[f]));
        for (int f = 0; f < nf; ++f) row.push_back(format_full(s.rescaled[f]));
        csv.row(row);
    }
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& value_prefix,
                      const fs::path& path) {
    CsvWriter csv(path);
    std::vector<std::string> header = {"sample_id"};
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        header.push_back(value_prefix + std::to_string(c));
    csv.row(header);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<std::string> row = {std::to_string(r)};
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(format_full(m(r, c)));
        csv.row(row);
    }
}

void write_measurements_csv(const MeasurementTable& table, const fs::path& path) {
    static const char* kNames[10] = {"mz0",   "mz1",   "mz2",   "mz3",   "czz01",
                                     "czz02", "czz03", "czz12", "czz13", "czz23"};
    CsvWriter csv(path);
    std::vector<std::string> header = {"sample_id", "tstar"};
    for (const char* n : kNames) header.emplace_back(n);
    csv.row(header);
    for (int s = 0; s < table.num_samples; ++s)
        for (std::size_t ti = 0; ti < table.times.size(); ++ti) {
            const MeasurementVector& m = table.at(s, static_cast<int>(ti));
            std::vector<std::string> row = {std::to_string(s), format_full(m.tstar)};
            for (double v : m.m) row.push_back(format_full(v));
            csv.row(row);
        }
}

void write_error_curves(const ErrorReport& report, const fs::path& path) {
    CsvWriter csv(path);
    std::vector<std::string> header = {"kernel", "tstar", "mean", "std"};
    for (int r = 0; r < report.config.num_replicas; ++r)
        header.push_back("rep_" + std::to_string(r));
    csv.row(header);
    for (const auto& agg : report.aggregate()) {
        std::vector<std::string> row = {to_string(agg.kernel),
                                        std::isnan(agg.tstar) ? "" : format_full(agg.tstar),
                                        format_full(agg.mean), format_full(agg.stdev)};
        for (double v : agg.per_replica)
            row.push_back(std::isfinite(v) ? format_full(v) : "");
        csv.row(row);
    }
}

nlohmann::json scf_sidecar(const ErrorReport& report) {
    nlohmann::json j;
    j["settings"] = {{"mixing_alpha", report.config.scf.mixing_alpha},
                     {"memory", report.config.scf.memory},
                     {"tolerance", report.config.scf.tolerance},
                     {"max_iterations", report.config.scf.max_iterations}};
    j["master_seed"] = report.config.seed;
    nlohmann::json reps = nlohmann::json::array();
    for (std::size_t r = 0; r < report.replicas.size(); ++r) {
        nlohmann::json rep;
        rep["replica"] = r;
        rep["seed"] = spawn_seed(report.config.seed, r);
        if (report.replicas[r]) {
            rep["iterations"] = report.replicas[r]->scf_iterations;
            rep["residuals"] = report.replicas[r]->scf_residuals;
        } else {
            rep["error"] = report.replica_errors.count(static_cast<int>(r))
                               ? report.replica_errors.at(static_cast<int>(r))
                               : "missing";
        }
        reps.push_back(rep);
    }
    j["replicas"] = reps;
    return j;
}

} // namespace

void write_manifest(const ExperimentConfig& config, const fs::path& dir,
                    const std::map<int, std::string>& replica_errors) {
    nlohmann::json j;
    j["version"] = kProjectVersion;
    j["generated_at"] = timestamp_utc();
    j["config"] = config.to_json();
    j["omega_max"] = config.make_reservoir().omega_max();
    nlohmann::json seeds = nlohmann::json::array();
    for (int r = 0; r < config.num_replicas; ++r)
        seeds.push_back(spawn_seed(config.seed, static_cast<std::uint64_t>(r)));
    j["replica_seeds"] = seeds;
    if (!replica_errors.empty()) {
        nlohmann::json errs;
        for (const auto& [r, msg] : replica_errors) errs[std::to_string(r)] = msg;
        j["replica_errors"] = errs;
    }
    write_json(j, dir / "manifest.json");
}

void export_report(const ErrorReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(report.config, dir, report.replica_errors);
    if (report.cells.empty() && report.replicas.empty()) return;

    if (!report.cells.empty()) write_error_curves(report, dir / "error_curves.csv");

    const bool any_data =
        std::any_of(report.replicas.begin(), report.replicas.end(),
                    [](const auto& r) { return r.has_value(); });
    if (!any_data) return;

    fs::create_directories(dir / "samples");
    fs::create_directories(dir / "densities");
    fs::create_directories(dir / "coefficients");
    const int nf = report.config.problem.num_features();
    bool any_measurements = false;
    for (std::size_t r = 0; r < report.replicas.size(); ++r) {
        if (!report.replicas[r]) continue;
        const ReplicaData& data = *report.replicas[r];
        const int ri = static_cast<int>(r);
        write_samples_csv(data.samples, nf, dir / "samples" / replica_name(ri));
        write_matrix_csv(data.densities, "n_", dir / "densities" / replica_name(ri));
        write_matrix_csv(data.coefficients, "u_", dir / "coefficients" / replica_name(ri));
        if (data.measurements.num_samples > 0) {
            if (!any_measurements) fs::create_directories(dir / "measurements");
            any_measurements = true;
            write_measurements_csv(data.measurements,
                                   dir / "measurements" / replica_name(ri));
        }
    }
    write_json(scf_sidecar(report), dir / "densities" / "scf_log.json");
}

void export_scaling(const std::vector<ScalingEntry>& entries, const ExperimentConfig& config,
                    const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(config, dir);
    CsvWriter csv(dir / "scaling.csv");
    const int nr = config.num_replicas;
    std::vector<std::string> header = {"n_train", "kernel", "tstar", "mean", "std"};
    for (int r = 0; r < nr; ++r) header.push_back("rep_" + std::to_string(r));
    csv.row(header);
    for (const auto& entry : entries)
        for (const auto& agg : entry.report.aggregate()) {
            std::vector<std::string> row = {
                std::to_string(entry.n_train), to_string(agg.kernel),
                std::isnan(agg.tstar) ? "" : format_full(agg.tstar),
                format_full(agg.mean), format_full(agg.stdev)};
            for (double v : agg.per_replica)
                row.push_back(std::isfinite(v) ? format_full(v) : "");
            csv.row(row);
        }
}

void export_intervals(const std::vector<IntervalEntry>& entries,
                      const ExperimentConfig& config, const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(config, dir);
    CsvWriter csv(dir / "intervals.csv");
    std::vector<std::string> header = {"interval_set", "h_lo",   "h_hi", "w_lo",
                                       "w_hi",         "kernel", "tstar", "mean",
                                       "std"};
    for (int r = 0; r < config.num_replicas; ++r)
        header.push_back("rep_" + std::to_string(r));
    csv.row(header);
    for (std::size_t s = 0; s < entries.size(); ++s) {
        const auto& entry = entries[s];
        for (const auto& agg : entry.report.aggregate()) {
            std::vector<std::string> row = {
                std::to_string(s),
                format_full(entry.set.heights.lo),
                format_full(entry.set.heights.hi),
                format_full(entry.set.widths.lo),
                format_full(entry.set.widths.hi),
                to_string(agg.kernel),
                std::isnan(agg.tstar) ? "" : format_full(agg.tstar),
                format_full(agg.mean),
                format_full(agg.stdev)};
            for (double v : agg.per_replica)
                row.push_back(std::isfinite(v) ? format_full(v) : "");
            csv.row(row);
        }
    }
}

void export_magnetization(const std::vector<std::vector<std::pair<double, double>>>& series,
                          const std::vector<double>& vnn_values,
                          const ExperimentConfig& config, const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(config, dir);
    CsvWriter csv(dir / "magnetization.csv");
    csv.row({"vnn", "tstar", "abs_mz1_minus_mz3"});
    for (std::size_t i = 0; i < series.size(); ++i)
        for (const auto& [t, dm] : series[i])
            csv.row({format_full(vnn_values[i]), format_full(t), format_full(dm)});
}

void export_training(const TrainingOutput& out, const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(out.config, dir);
    fs::create_directories(dir / "models");

    const int nf = out.config.problem.num_features();
    write_samples_csv(out.data.samples, nf, dir / "samples.csv");
    write_matrix_csv(out.data.densities, "n_", dir / "densities.csv");
    write_matrix_csv(out.data.coefficients, "u_", dir / "coefficients.csv");
    if (out.data.measurements.num_samples > 0)
        write_measurements_csv(out.data.measurements, dir / "measurements.csv");

    CsvWriter err(dir / "training_errors.csv");
    err.row({"kernel", "tstar", "error"});
    for (const auto& [kernel, models] : out.models) {
        const std::string name = to_string(kernel);
        err.row({name, format_full(out.tstar), format_full(out.errors.at(name))});
        write_matrix_csv(out.predicted.at(name), "u_",
                         dir / ("predicted_coefficients_" + name + ".csv"));
        for (const auto& model : models) {
            nlohmann::json j = model.to_json();
            if (kernel == KernelKind::PQK) j["tstar"] = out.tstar;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%s_l%02d.json", name.c_str(),
                          model.target_index);
            write_json(j, dir / "models" / buf);
        }
    }
}

void export_basis(const ExpansionBasis& basis, const ExperimentConfig& config,
                  const fs::path& dir) {
    fs::create_directories(dir);
    write_manifest(config, dir);
    {
        CsvWriter csv(dir / "basis.csv");
        std::vector<std::string> header = {"basis_index"};
        for (int i = 0; i < basis.grid().num_points(); ++i)
            header.push_back("x_" + std::to_string(i));
        csv.row(header);
        for (int l = 0; l < basis.size(); ++l) {
            std::vector<std::string> row = {std::to_string(l)};
            const Eigen::VectorXd f = basis.function(l);
            for (Eigen::Index i = 0; i < f.size(); ++i) row.push_back(format_full(f[i]));
            csv.row(row);
        }
    }
    nlohmann::json meta;
    meta["n_left"] = basis.n_left();
    meta["n_center"] = basis.n_center();
    meta["n_right"] = basis.n_right();
    meta["n_trunc"] = basis.size();
    meta["height"] = basis.height();
    meta["grid"] = {{"length", basis.grid().length()},
                    {"num_points", basis.grid().num_points()},
                    {"boundary", basis.grid().boundary() == Boundary::OBC ? "obc" : "pbc"}};
    write_json(meta, dir / "basis_meta.json");
}

} // namespace qdens
