#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qdens/csv.hpp"
#include "qdens/pipeline.hpp"

using namespace qdens;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_h2_config() {
    ExperimentConfig cfg;
    cfg.problem = FermionProblem::h2();
    cfg.num_points = 101;
    cfg.n_train = 6;
    cfg.n_hidden = 3;
    cfg.num_replicas = 2;
    cfg.times.count = 4;
    cfg.hyper.c_values = {1.0, 100.0};
    cfg.hyper.epsilon_values = {0.001, 0.01};
    cfg.hyper.folds = 3;
    cfg.seed = 4242;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("compute_error basics") {
    SpatialGrid grid(10.0, 101, Boundary::OBC);
    const auto basis = build_truncated_basis(FermionProblem::h2(), grid, 4, 4, 4);
    Eigen::MatrixXd u = Eigen::MatrixXd::Random(3, basis.size());
    CHECK(compute_error(u, u, basis, grid) == 0.0);

    // unit bump on one coefficient integrates |Psi_1|
    Eigen::MatrixXd bumped = u;
    bumped.col(1).array() += 1.0;
    const double expected = grid.integrate(basis.function(1).cwiseAbs());
    CHECK(compute_error(bumped, u, basis, grid) == doctest::Approx(expected).epsilon(1e-12));

    // invariance under sample reordering
    Eigen::MatrixXd u2 = u;
    u2.row(0).swap(u2.row(2));
    Eigen::MatrixXd b2 = bumped;
    b2.row(0).swap(b2.row(2));
    CHECK(compute_error(b2, u2, basis, grid) ==
          doctest::Approx(compute_error(bumped, u, basis, grid)).epsilon(1e-12));

    CHECK_THROWS_AS(compute_error(u, u.topRows(2), basis, grid), std::invalid_argument);
}

TEST_CASE("experiment report structure and baseline time-independence") {
    const auto cfg = tiny_h2_config();
    const auto report = run_experiment(cfg);
    REQUIRE(report.replica_errors.empty());
    CHECK(report.times.size() == 4);

    int linear_cells = 0, rbf_cells = 0, pqk_cells = 0;
    for (const auto& cell : report.cells) {
        if (cell.kernel == KernelKind::PQK) {
            ++pqk_cells;
            CHECK(std::isfinite(cell.tstar));
        } else {
            std::isnan(cell.tstar) ? void() : void();
            CHECK(std::isnan(cell.tstar));
            (cell.kernel == KernelKind::Linear ? linear_cells : rbf_cells) += 1;
        }
        CHECK(cell.error >= 0.0);
    }
    CHECK(linear_cells == cfg.num_replicas);
    CHECK(rbf_cells == cfg.num_replicas);
    CHECK(pqk_cells == cfg.num_replicas * 4);

    const auto aggregates = report.aggregate();
    REQUIRE(aggregates.size() == 2 + 4);
    CHECK(aggregates[0].kernel == KernelKind::Linear);
    CHECK(aggregates[1].kernel == KernelKind::RBF);
    for (std::size_t i = 3; i < aggregates.size(); ++i)
        CHECK(aggregates[i].tstar > aggregates[i - 1].tstar);

    // replica aggregation equals brute-force recomputation
    for (const auto& agg : aggregates) {
        double sum = 0.0;
        for (double v : agg.per_replica) sum += v;
        CHECK(agg.mean == doctest::Approx(sum / cfg.num_replicas).epsilon(1e-12));
        double ss = 0.0;
        for (double v : agg.per_replica) ss += (v - agg.mean) * (v - agg.mean);
        CHECK(agg.stdev ==
              doctest::Approx(std::sqrt(ss / (cfg.num_replicas - 1))).epsilon(1e-12));
    }
}

TEST_CASE("classical baselines ignore the reservoir parameters") {
    auto cfg = tiny_h2_config();
    cfg.kernels = {KernelKind::Linear, KernelKind::RBF};
    cfg.num_replicas = 1;
    const auto a = run_experiment(cfg);
    cfg.vnn = 0.5;
    cfg.omega_glob = 9.0;
    cfg.delta_loc = -1.0;
    const auto b = run_experiment(cfg);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        CHECK(a.cells[i].error == b.cells[i].error);
}

TEST_CASE("perfect coefficients give zero error end to end") {
    const auto cfg = tiny_h2_config();
    const SpatialGrid grid = cfg.make_grid();
    const auto basis = build_truncated_basis(cfg.problem, grid, cfg.basis_n_left,
                                             cfg.basis_n_center, cfg.basis_n_right);
    Eigen::MatrixXd u = Eigen::MatrixXd::Random(5, basis.size());
    CHECK(compute_error(u, u, basis, grid) == 0.0);
}

TEST_CASE("magnetization difference diagnostics") {
    auto cfg = tiny_h2_config();
    cfg.times.explicit_times = {0.0, 0.2, 0.5};
    Eigen::VectorXd v(2);
    v << 1.0, 0.0;
    const auto series = magnetization_difference(cfg, v);
    REQUIRE(series.size() == 3);
    CHECK(series[0].second == 0.0); // symmetric start
    CHECK(series[2].second > 0.0);

    auto cfg0 = cfg;
    cfg0.c6 = 0.0;
    for (const auto& [t, dm] : magnetization_difference(cfg0, v))
        CHECK(dm < 1e-10); // product dynamics keeps the pair identical

    auto tw = cfg;
    tw.problem = FermionProblem::triple_well();
    tw.num_points = 200;
    Eigen::VectorXd v4 = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(magnetization_difference(tw, v4), std::invalid_argument);
}

TEST_CASE("config json round trip is stable") {
    auto cfg = tiny_h2_config();
    cfg.vnn_list = {1.0, 2.0};
    cfg.train_sizes = {4, 6};
    const auto j1 = cfg.to_json();
    const auto cfg2 = ExperimentConfig::from_json(j1);
    const auto j2 = cfg2.to_json();
    CHECK(j1.dump() == j2.dump());

    // manifest wrapper is accepted
    nlohmann::json manifest;
    manifest["version"] = kProjectVersion;
    manifest["config"] = j1;
    const auto cfg3 = ExperimentConfig::from_json(manifest);
    CHECK(cfg3.to_json().dump() == j1.dump());
}

TEST_CASE("config validation failures") {
    auto cfg = tiny_h2_config();
    cfg.n_train = 2; // fewer than folds
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_h2_config();
    cfg.vnn = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_h2_config();
    cfg.kernels.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("presets parse into valid configs") {
    for (const auto& name : preset_names()) {
        const auto cfg = ExperimentConfig::from_json(preset_config(name));
        CHECK(cfg.num_replicas == 20);
        CHECK(cfg.n_train + cfg.n_hidden == 40);
    }
    CHECK_THROWS_AS(preset_config("fig7"), std::invalid_argument);
    const auto fig5 = ExperimentConfig::from_json(preset_config("fig5"));
    CHECK(fig5.vnn == doctest::Approx(0.86572302));
    CHECK(fig5.times.explicit_times == std::vector<double>{0.6});
    const auto fig6 = ExperimentConfig::from_json(preset_config("fig6"));
    CHECK(fig6.interval_sets.size() == 3);
}

TEST_CASE("export writes the documented files and reruns byte-identically") {
    auto cfg = tiny_h2_config();
    cfg.times.count = 2;
    const fs::path dir1 = fs::temp_directory_path() / "qdens_export_a";
    const fs::path dir2 = fs::temp_directory_path() / "qdens_export_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    export_report(run_experiment(cfg), dir1);
    for (const char* f : {"manifest.json", "error_curves.csv"})
        CHECK(fs::exists(dir1 / f));
    for (const char* d : {"samples", "densities", "coefficients", "measurements"})
        CHECK(fs::exists(dir1 / d / "replica_000.csv"));
    CHECK(fs::exists(dir1 / "densities" / "scf_log.json"));

    const std::string header = slurp(dir1 / "error_curves.csv").substr(0, 60);
    CHECK(header.rfind("kernel,tstar,mean,std,rep_0,rep_1", 0) == 0);

    // reload the manifest, rerun, compare every CSV byte for byte
    nlohmann::json manifest;
    std::ifstream(dir1 / "manifest.json") >> manifest;
    const auto cfg2 = ExperimentConfig::from_json(manifest);
    export_report(run_experiment(cfg2), dir2);
    for (auto it = fs::recursive_directory_iterator(dir1);
         it != fs::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file() || it->path().extension() != ".csv") continue;
        const auto rel = fs::relative(it->path(), dir1);
        CHECK(slurp(dir2 / rel) == slurp(it->path()));
    }
}

TEST_CASE("empty report exports only the manifest") {
    const auto cfg = tiny_h2_config();
    const fs::path dir = fs::temp_directory_path() / "qdens_export_empty";
    fs::remove_all(dir);
    ErrorReport empty;
    empty.config = cfg;
    export_report(empty, dir);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(!fs::exists(dir / "error_curves.csv"));
    CHECK(!fs::exists(dir / "densities"));
}

TEST_CASE("full decimal formatting round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, 865723.02, 2.0 * 3.14159265358979323846e-7}) {
        const std::string s = format_full(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("scaling study produces one report per size") {
    auto cfg = tiny_h2_config();
    cfg.num_replicas = 1;
    cfg.times.explicit_times = {0.3};
    const auto entries = scaling_study(cfg, {5, 6});
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].n_train == 5);
    CHECK(entries[1].n_train == 6);
    for (const auto& e : entries) CHECK(e.report.replica_errors.empty());
}

TEST_CASE("interval study requires the triple well and reuses seeds") {
    auto cfg = tiny_h2_config();
    CHECK_THROWS_AS(interval_study(cfg, {{{0.8, 1.6}, {0.2, 0.5}}}),
                    std::invalid_argument);

    ExperimentConfig tw;
    tw.problem = FermionProblem::triple_well();
    tw.num_points = 100;
    tw.basis_n_left = tw.basis_n_center = tw.basis_n_right = 4;
    tw.n_train = 6;
    tw.n_hidden = 3;
    tw.num_replicas = 1;
    tw.times.count = 2;
    tw.hyper.c_values = {10.0};
    tw.hyper.epsilon_values = {0.001};
    tw.hyper.folds = 3;
    tw.seed = 90;
    tw.delta_glob = 5.0;
    tw.delta_loc = -1.1;
    tw.vnn = 1.0;

    ExperimentConfig::IntervalSet set{{0.8, 1.6}, {0.2, 0.5}};
    const auto twice = interval_study(tw, {set, set});
    REQUIRE(twice.size() == 2);
    REQUIRE(twice[0].report.cells.size() == twice[1].report.cells.size());
    for (std::size_t i = 0; i < twice[0].report.cells.size(); ++i)
        CHECK(twice[0].report.cells[i].error == twice[1].report.cells[i].error);
}
