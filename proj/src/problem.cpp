#include "qdens/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace qdens {

std::string to_string(ProblemKind kind) {
    return kind == ProblemKind::H2 ? "h2" : "triple_well";
}

ProblemKind problem_kind_from_string(const std::string& s) {
    if (s == "h2") return ProblemKind::H2;
    if (s == "triple_well") return ProblemKind::TripleWell;
    throw std::invalid_argument("unknown problem kind: " + s);
}

FermionProblem FermionProblem::h2() {
    FermionProblem p;
    p.kind = ProblemKind::H2;
    p.mass = 1.0;
    p.boundary = Boundary::OBC;
    p.feature_ranges = {{-0.5, 0.5}, {-0.5, 0.5}}; // dXA, dXB
    return p;
}

FermionProblem FermionProblem::triple_well() {
    return triple_well_with_ranges({0.8, 1.6}, {0.2, 0.5});
}

FermionProblem FermionProblem::triple_well_with_ranges(FeatureRange heights,
                                                       FeatureRange widths) {
    FermionProblem p;
    p.kind = ProblemKind::TripleWell;
    p.mass = 0.5;
    p.boundary = Boundary::PBC;
    p.feature_ranges = {heights, heights, widths, widths}; // h1, h2, delta1, delta2
    return p;
}

Eigen::VectorXd FermionProblem::evaluate_potential(const Eigen::VectorXd& raw,
                                                   const SpatialGrid& grid) const {
    if (raw.size() != num_features())
        throw std::invalid_argument("evaluate_potential: wrong feature count");
    if (kind == ProblemKind::H2)
        return eval_h2_potential(raw[0], raw[1], xa0, xb0, grid);
    return eval_triple_well(raw[0], raw[1], raw[2], raw[3], *this, grid);
}

Eigen::VectorXd eval_h2_potential(double dxa, double dxb, double xa0, double xb0,
                                  const SpatialGrid& grid) {
    const double xa = xa0 + dxa;
    const double xb = xb0 + dxb;
    Eigen::VectorXd v(grid.num_points());
    for (int i = 0; i < grid.num_points(); ++i) {
        const double x = grid.node(i);
        v[i] = -1.0 / (std::abs(x - xa) + 1.0) - 1.0 / (std::abs(x - xb) + 1.0);
    }
    return v;
}

Eigen::VectorXd eval_triple_well(double h1, double h2, double delta1, double delta2,
                                 const FermionProblem& p, const SpatialGrid& grid) {
    const double a1 = p.x1 - delta1 / 2.0, b1 = p.x1 + delta1 / 2.0;
    const double a2 = p.x2 - delta2 / 2.0, b2 = p.x2 + delta2 / 2.0;
    if (!(p.x0 < a1 && b1 < a2 && b2 < p.x3))
        throw std::invalid_argument("eval_triple_well: barrier regions overlap domain edges");

    Eigen::VectorXd v(grid.num_points());
    for (int i = 0; i < grid.num_points(); ++i) {
        const double x = grid.node(i);
        double val;
        if (x <= p.x0) val = p.h0;
        else if (x <= a1) val = 0.0;
        else if (x <= b1) val = h1;
        else if (x <= a2) val = p.d;
        else if (x <= b2) val = h2;
        else if (x <= p.x3) val = 0.0;
        else val = p.h3;
        v[i] = val;
    }
    return v;
}

nlohmann::json FermionProblem::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["mass"] = mass;
    j["boundary"] = boundary == Boundary::OBC ? "obc" : "pbc";
    j["domain_length"] = domain_length;
    if (kind == ProblemKind::H2) {
        j["xa0"] = xa0;
        j["xb0"] = xb0;
    } else {
        j["x0"] = x0;
        j["x1"] = x1;
        j["x2"] = x2;
        j["x3"] = x3;
        j["h0"] = h0;
        j["h3"] = h3;
        j["d"] = d;
    }
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& r : feature_ranges) ranges.push_back({r.lo, r.hi});
    j["feature_ranges"] = ranges;
    return j;
}

FermionProblem FermionProblem::from_json(const nlohmann::json& j) {
    const auto kind = problem_kind_from_string(j.at("kind").get<std::string>());
    FermionProblem p = kind == ProblemKind::H2 ? h2() : triple_well();
    p.mass = j.value("mass", p.mass);
    if (j.contains("boundary"))
        p.boundary = j.at("boundary").get<std::string>() == "pbc" ? Boundary::PBC
                                                                  : Boundary::OBC;
    p.domain_length = j.value("domain_length", p.domain_length);
    p.xa0 = j.value("xa0", p.xa0);
    p.xb0 = j.value("xb0", p.xb0);
    p.x0 = j.value("x0", p.x0);
    p.x1 = j.value("x1", p.x1);
    p.x2 = j.value("x2", p.x2);
    p.x3 = j.value("x3", p.x3);
    p.h0 = j.value("h0", p.h0);
    p.h3 = j.value("h3", p.h3);
    p.d = j.value("d", p.d);
    if (j.contains("feature_ranges")) {
        p.feature_ranges.clear();
        for (const auto& r : j.at("feature_ranges"))
            p.feature_ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    }
    if (p.feature_ranges.empty())
        throw std::invalid_argument("FermionProblem: empty feature ranges");
    for (const auto& r : p.feature_ranges)
        if (!(r.lo < r.hi))
            throw std::invalid_argument("FermionProblem: degenerate feature range");
    return p;
}

} // namespace qdens
