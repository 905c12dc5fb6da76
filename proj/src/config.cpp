#include <cmath>
#include <stdexcept>

#include "qdens/pipeline.hpp"

namespace qdens {

std::vector<double> TimeGridSpec::materialize(double omega_max) const {
    if (!explicit_times.empty()) {
        for (std::size_t i = 1; i < explicit_times.size(); ++i)
            if (!(explicit_times[i] > explicit_times[i - 1]))
                throw std::invalid_argument("TimeGridSpec: explicit times must increase");
        return explicit_times;
    }
    if (count < 1) throw std::invalid_argument("TimeGridSpec: count must be positive");
    if (!(omega_max > 0.0)) throw std::invalid_argument("TimeGridSpec: omega_max <= 0");
    std::vector<double> t(count);
    if (count == 1) {
        t[0] = omega_t_min / omega_max;
        return t;
    }
    const double step = (omega_t_max - omega_t_min) / (count - 1);
    for (int i = 0; i < count; ++i) t[i] = (omega_t_min + step * i) / omega_max;
    return t;
}

nlohmann::json TimeGridSpec::to_json() const {
    nlohmann::json j;
    if (!explicit_times.empty()) {
        j["explicit"] = explicit_times;
    } else {
        j["count"] = count;
        j["omega_t_min"] = omega_t_min;
        j["omega_t_max"] = omega_t_max;
    }
    return j;
}

TimeGridSpec TimeGridSpec::from_json(const nlohmann::json& j) {
    TimeGridSpec t;
    if (j.contains("explicit")) {
        t.explicit_times = j.at("explicit").get<std::vector<double>>();
        return t;
    }
    t.count = j.value("count", t.count);
    t.omega_t_min = j.value("omega_t_min", t.omega_t_min);
    t.omega_t_max = j.value("omega_t_max", t.omega_t_max);
    return t;
}

SpatialGrid ExperimentConfig::make_grid() const {
    return SpatialGrid(problem.domain_length, num_points, problem.boundary);
}

ReservoirConfig ExperimentConfig::make_reservoir() const {
    return ReservoirConfig::for_problem(problem.kind, vnn, omega_glob, delta_glob,
                                        delta_loc, v_homo, c6);
}

void ExperimentConfig::validate() const {
    if (num_points < 3) throw std::invalid_argument("config: num_points < 3");
    if (n_train < 1 || n_hidden < 1)
        throw std::invalid_argument("config: need training and hidden samples");
    if (num_replicas < 1) throw std::invalid_argument("config: num_replicas < 1");
    if (basis_n_left < 1 || basis_n_center < 1 || basis_n_right < 1)
        throw std::invalid_argument("config: basis region sizes must be positive");
    if (basis_n_left + basis_n_center + basis_n_right > num_points)
        throw std::invalid_argument("config: basis larger than grid");
    if (!(vnn > 0.0)) throw std::invalid_argument("config: vnn must be positive");
    if (!(omega_glob != 0.0 || delta_glob != 0.0 || delta_loc != 0.0))
        throw std::invalid_argument("config: trivial reservoir drive");
    if (kernels.empty()) throw std::invalid_argument("config: no kernels selected");
    if (hyper.folds < 2) throw std::invalid_argument("config: folds < 2");
    if (!select_on_hidden && n_train < hyper.folds)
        throw std::invalid_argument("config: fewer training samples than folds");
    for (const auto& r : problem.feature_ranges)
        if (!(r.lo < r.hi)) throw std::invalid_argument("config: degenerate feature range");
    // Ensure the time grid spec is coherent.
    times.materialize(make_reservoir().omega_max());
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["problem"] = problem.to_json();
    j["grid"] = {{"num_points", num_points}};
    j["scf"] = {{"mixing_alpha", scf.mixing_alpha},
                {"memory", scf.memory},
                {"tolerance", scf.tolerance},
                {"max_iterations", scf.max_iterations},
                {"interaction", scf.interaction},
                {"hartree_ring_metric", scf.hartree_ring_metric}};
    j["basis"] = {{"n_left", basis_n_left},
                  {"n_center", basis_n_center},
                  {"n_right", basis_n_right},
                  {"height", basis_height}};
    j["reservoir"] = {{"omega_glob", omega_glob}, {"delta_glob", delta_glob},
                      {"delta_loc", delta_loc},   {"v_homo", v_homo},
                      {"vnn", vnn},               {"c6", c6}};
    nlohmann::json kern = nlohmann::json::array();
    for (auto k : kernels) kern.push_back(to_string(k));
    j["kernels"] = kern;
    j["svr"] = {{"c_grid", hyper.c_values},
                {"epsilon_grid", hyper.epsilon_values},
                {"gamma_grid", hyper.gamma_values},
                {"folds", hyper.folds},
                {"select_on_hidden", select_on_hidden}};
    j["samples"] = {{"n_train", n_train},
                    {"n_hidden", n_hidden},
                    {"replicas", num_replicas}};
    j["times"] = times.to_json();
    j["seed"] = seed;
    if (!train_sizes.empty()) j["train_sizes"] = train_sizes;
    if (!vnn_list.empty()) j["vnn_list"] = vnn_list;
    if (!interval_sets.empty()) {
        nlohmann::json sets = nlohmann::json::array();
        for (const auto& s : interval_sets)
            sets.push_back({{"heights", {s.heights.lo, s.heights.hi}},
                            {"widths", {s.widths.lo, s.widths.hi}}});
        j["interval_sets"] = sets;
    }
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& input) {
    const nlohmann::json& j =
        input.contains("config") && input.at("config").is_object() ? input.at("config")
                                                                   : input;
    ExperimentConfig cfg;
    if (j.contains("problem")) cfg.problem = FermionProblem::from_json(j.at("problem"));

    cfg.num_points = cfg.problem.default_num_points();
    if (j.contains("grid")) cfg.num_points = j.at("grid").value("num_points", cfg.num_points);

    if (j.contains("scf")) {
        const auto& s = j.at("scf");
        cfg.scf.mixing_alpha = s.value("mixing_alpha", cfg.scf.mixing_alpha);
        cfg.scf.memory = s.value("memory", cfg.scf.memory);
        cfg.scf.tolerance = s.value("tolerance", cfg.scf.tolerance);
        cfg.scf.max_iterations = s.value("max_iterations", cfg.scf.max_iterations);
        cfg.scf.interaction = s.value("interaction", cfg.scf.interaction);
        cfg.scf.hartree_ring_metric =
            s.value("hartree_ring_metric", cfg.scf.hartree_ring_metric);
    }

    const int default_region = cfg.problem.kind == ProblemKind::H2 ? 10 : 6;
    cfg.basis_n_left = cfg.basis_n_center = cfg.basis_n_right = default_region;
    if (j.contains("basis")) {
        const auto& b = j.at("basis");
        cfg.basis_n_left = b.value("n_left", cfg.basis_n_left);
        cfg.basis_n_center = b.value("n_center", cfg.basis_n_center);
        cfg.basis_n_right = b.value("n_right", cfg.basis_n_right);
        cfg.basis_height = b.value("height", cfg.basis_height);
    }

    if (j.contains("reservoir")) {
        const auto& r = j.at("reservoir");
        cfg.omega_glob = r.value("omega_glob", cfg.omega_glob);
        cfg.delta_glob = r.value("delta_glob", cfg.delta_glob);
        cfg.delta_loc = r.value("delta_loc", cfg.delta_loc);
        cfg.v_homo = r.value("v_homo", cfg.v_homo);
        cfg.c6 = r.value("c6", cfg.c6);
        if (r.contains("side_um"))
            cfg.vnn = nn_interaction(r.at("side_um").get<double>(), cfg.c6);
        cfg.vnn = r.value("vnn", cfg.vnn);
    }

    if (j.contains("kernels")) {
        cfg.kernels.clear();
        for (const auto& k : j.at("kernels"))
            cfg.kernels.push_back(kernel_kind_from_string(k.get<std::string>()));
    }

    if (j.contains("svr")) {
        const auto& s = j.at("svr");
        if (s.contains("c_grid")) cfg.hyper.c_values = s.at("c_grid").get<std::vector<double>>();
        if (s.contains("epsilon_grid"))
            cfg.hyper.epsilon_values = s.at("epsilon_grid").get<std::vector<double>>();
        if (s.contains("gamma_grid"))
            cfg.hyper.gamma_values = s.at("gamma_grid").get<std::vector<double>>();
        cfg.hyper.folds = s.value("folds", cfg.hyper.folds);
        cfg.select_on_hidden = s.value("select_on_hidden", cfg.select_on_hidden);
    }

    if (j.contains("samples")) {
        const auto& s = j.at("samples");
        cfg.n_train = s.value("n_train", cfg.n_train);
        cfg.n_hidden = s.value("n_hidden", cfg.n_hidden);
        cfg.num_replicas = s.value("replicas", cfg.num_replicas);
    }

    if (j.contains("times")) cfg.times = TimeGridSpec::from_json(j.at("times"));
    cfg.seed = j.value("seed", cfg.seed);

    if (j.contains("train_sizes"))
        cfg.train_sizes = j.at("train_sizes").get<std::vector<int>>();
    if (j.contains("vnn_list")) cfg.vnn_list = j.at("vnn_list").get<std::vector<double>>();
    if (j.contains("interval_sets")) {
        for (const auto& s : j.at("interval_sets")) {
            IntervalSet set;
            set.heights = {s.at("heights").at(0).get<double>(),
                           s.at("heights").at(1).get<double>()};
            set.widths = {s.at("widths").at(0).get<double>(),
                          s.at("widths").at(1).get<double>()};
            cfg.interval_sets.push_back(set);
        }
    }

    cfg.validate();
    return cfg;
}

} // namespace qdens
