// Command-line driver: dataset generation, basis construction, reservoir
// embedding, training, and the measurement-time / scaling / interval studies.
// Exit codes: 0 success, 2 invalid configuration, 3 convergence failure.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qdens/csv.hpp"
#include "qdens/pipeline.hpp"
#include "qdens/rng.hpp"

namespace fs = std::filesystem;
using namespace qdens;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "experiment config or manifest JSON");
    cmd->add_option("--preset", opt.preset, "named figure preset");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "override the master seed");
}

ExperimentConfig load_config(const CommonOptions& opt) {
    nlohmann::json j;
    if (!opt.preset.empty()) {
        j = preset_config(opt.preset);
        if (!opt.config_path.empty())
            throw std::invalid_argument("pass either --config or --preset, not both");
    } else if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw std::invalid_argument("cannot read config: " + opt.config_path);
        in >> j;
    } else {
        throw std::invalid_argument("one of --config or --preset is required");
    }
    if (opt.seed >= 0) {
        if (j.contains("config"))
            j["config"]["seed"] = static_cast<std::uint64_t>(opt.seed);
        else
            j["seed"] = static_cast<std::uint64_t>(opt.seed);
    }
    return ExperimentConfig::from_json(j);
}

void cmd_generate_data(const ExperimentConfig& cfg, const fs::path& out) {
    export_report(generate_datasets(cfg), out);
    std::cout << "wrote samples/densities/coefficients for " << cfg.num_replicas
              << " replicas to " << out << "\n";
}

void cmd_build_basis(const ExperimentConfig& cfg, const fs::path& out) {
    const SpatialGrid grid = cfg.make_grid();
    const ExpansionBasis basis =
        build_truncated_basis(cfg.problem, grid, cfg.basis_n_left, cfg.basis_n_center,
                              cfg.basis_n_right, cfg.basis_height);
    export_basis(basis, cfg, out);
    std::cout << "wrote basis (" << basis.size() << " functions) to " << out << "\n";
}

void cmd_embed(const ExperimentConfig& cfg, const fs::path& out) {
    const SpatialGrid grid = cfg.make_grid();
    const ReservoirConfig reservoir = cfg.make_reservoir();
    const std::vector<double> times = cfg.times.materialize(reservoir.omega_max());
    fs::create_directories(out / "measurements");
    write_manifest(cfg, out);
    for (int r = 0; r < cfg.num_replicas; ++r) {
        const auto samples = make_samples(cfg.problem, grid, cfg.n_train + cfg.n_hidden,
                                          spawn_seed(cfg.seed, r));
        std::vector<Eigen::VectorXd> v;
        for (const auto& s : samples) v.push_back(s.rescaled);
        const MeasurementTable table = embed_samples(reservoir, v, times);

        char buf[32];
        std::snprintf(buf, sizeof(buf), "replica_%03d.csv", r);
        CsvWriter csv(out / "measurements" / buf);
        csv.row({"sample_id", "tstar", "mz0", "mz1", "mz2", "mz3", "czz01", "czz02",
                 "czz03", "czz12", "czz13", "czz23"});
        for (int s = 0; s < table.num_samples; ++s)
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                const MeasurementVector& m = table.at(s, static_cast<int>(ti));
                std::vector<std::string> row = {std::to_string(s), format_full(m.tstar)};
                for (double x : m.m) row.push_back(format_full(x));
                csv.row(row);
            }
    }
    std::cout << "wrote measurement tables for " << cfg.num_replicas << " replicas to "
              << out << "\n";
}

void cmd_train(const ExperimentConfig& cfg, const fs::path& out) {
    const TrainingOutput result = train_models(cfg);
    export_training(result, out);
    std::cout << "trained at t* = " << result.tstar << " us; errors:";
    for (const auto& [kernel, err] : result.errors) std::cout << " " << kernel << "=" << err;
    std::cout << "\nwrote models to " << out << "\n";
}

void cmd_sweep_time(const ExperimentConfig& cfg, const fs::path& out) {
    const ErrorReport report = sweep_measurement_time(cfg);
    export_report(report, out);
    std::cout << "wrote error curves (" << report.times.size() << " time points, "
              << cfg.num_replicas << " replicas) to " << out << "\n";
}

void cmd_report(const ExperimentConfig& cfg, const fs::path& out) {
    const ErrorReport report = run_experiment(cfg);
    export_report(report, out);
    std::cout << "wrote full report to " << out << "\n";
}

void cmd_scaling(const ExperimentConfig& cfg, const fs::path& out) {
    std::vector<int> sizes = cfg.train_sizes;
    if (sizes.empty()) sizes = {cfg.n_train};
    const auto entries = scaling_study(cfg, sizes);
    export_scaling(entries, cfg, out);
    std::cout << "wrote scaling table (" << sizes.size() << " sizes) to " << out << "\n";
}

void cmd_intervals(const ExperimentConfig& cfg, const fs::path& out) {
    auto sets = cfg.interval_sets;
    if (sets.empty())
        throw std::invalid_argument("intervals: config carries no interval_sets");
    const auto entries = interval_study(cfg, sets);
    export_intervals(entries, cfg, out);
    std::cout << "wrote interval curves (" << sets.size() << " sets) to " << out << "\n";
}

void cmd_diagnose_magnetization(const ExperimentConfig& cfg, const fs::path& out) {
    std::vector<double> vnns = cfg.vnn_list;
    if (vnns.empty()) vnns = {cfg.vnn};
    Eigen::VectorXd v(2);
    v << 1.0, 0.0; // extreme detunings on the two addressed sites
    std::vector<std::vector<std::pair<double, double>>> series;
    for (double vnn : vnns) {
        ExperimentConfig run = cfg;
        run.vnn = vnn;
        series.push_back(magnetization_difference(run, v));
    }
    export_magnetization(series, vnns, cfg, out);
    std::cout << "wrote magnetization differences for " << vnns.size()
              << " interaction values to " << out << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-fermion density prediction via reservoir kernel regression"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"generate-data", "draw samples and solve the self-consistent densities"},
        {"build-basis", "construct and export the expansion basis"},
        {"embed", "compute reservoir measurement tables"},
        {"train", "train kernel models at one measurement time"},
        {"sweep-time", "error versus measurement time with classical baselines"},
        {"scaling", "error versus number of training samples"},
        {"intervals", "error curves for each feature-interval set"},
        {"diagnose-magnetization", "non-addressed-site magnetization difference"},
        {"report", "full experiment report"},
    };

    std::map<std::string, CommonOptions> opts;
    for (const auto& [name, desc] : commands) add_common(app.add_subcommand(name, desc), opts[name]);

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();
    const CommonOptions& opt = opts[sub];

    try {
        const ExperimentConfig cfg = load_config(opt);
        const fs::path out = opt.out_dir;
        if (sub == "generate-data") cmd_generate_data(cfg, out);
        else if (sub == "build-basis") cmd_build_basis(cfg, out);
        else if (sub == "embed") cmd_embed(cfg, out);
        else if (sub == "train") cmd_train(cfg, out);
        else if (sub == "sweep-time") cmd_sweep_time(cfg, out);
        else if (sub == "scaling") cmd_scaling(cfg, out);
        else if (sub == "intervals") cmd_intervals(cfg, out);
        else if (sub == "diagnose-magnetization") cmd_diagnose_magnetization(cfg, out);
        else if (sub == "report") cmd_report(cfg, out);
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
