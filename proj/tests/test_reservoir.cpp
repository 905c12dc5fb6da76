#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "qdens/reservoir.hpp"
#include "qdens/rng.hpp"

using namespace qdens;

namespace {
constexpr double kPi = 3.14159265358979323846;

ReservoirConfig fig2_config(double vnn) {
    return ReservoirConfig::for_problem(ProblemKind::H2, vnn, 5.0, 0.0, -3.5, 0.5);
}
} // namespace

TEST_CASE("square geometry distances") {
    const auto q = square_geometry(7.0);
    const auto dist = [&](int i, int j) {
        return std::hypot(q[i][0] - q[j][0], q[i][1] - q[j][1]);
    };
    for (auto [i, j] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}})
        CHECK(dist(i, j) == doctest::Approx(7.0));
    for (auto [i, j] : {std::pair{0, 3}, {1, 2}})
        CHECK(dist(i, j) == doctest::Approx(7.0 * std::sqrt(2.0)));
    CHECK(dist(0, 2) == doctest::Approx(7.0)); // addressed pair is nearest-neighbor
}

TEST_CASE("nn interaction and its inverse") {
    CHECK(nn_interaction(10.0, 865723.02) == doctest::Approx(0.86572302).epsilon(1e-12));
    const double a = side_from_vnn(4.0, 865723.02);
    CHECK(nn_interaction(a, 865723.02) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(nn_interaction(2.0 * a, 865723.02) == doctest::Approx(4.0 / 64.0).epsilon(1e-10));
}

TEST_CASE("detunings follow the local encoding") {
    const auto cfg = fig2_config(4.0);
    Eigen::VectorXd v(2);
    v << 1.0, 0.0;
    const Eigen::VectorXd delta = site_detunings(cfg, v);
    CHECK(delta[0] == doctest::Approx(-3.5));  // delta_glob + 1 * delta_loc
    CHECK(delta[2] == doctest::Approx(0.0));   // delta_glob
    CHECK(delta[1] == doctest::Approx(-1.75)); // homogeneous v = 0.5
    CHECK(delta[3] == doctest::Approx(-1.75));
    Eigen::VectorXd bad(2);
    bad << 1.2, 0.0;
    CHECK_THROWS_AS(site_detunings(cfg, bad), std::invalid_argument);
    CHECK_THROWS_AS(site_detunings(cfg, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("hamiltonian is diagonal when the drive is off") {
    auto cfg = fig2_config(4.0);
    cfg.omega_glob = 0.0;
    Eigen::VectorXd v(2);
    v << 0.3, 0.7;
    const Eigen::MatrixXd h = build_reservoir_hamiltonian(cfg, v);
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b)
            if (a != b) CHECK(h(a, b) == 0.0);
}

TEST_CASE("fully excited diagonal element counts all pairs") {
    const auto cfg = fig2_config(4.0);
    Eigen::VectorXd v(2);
    v << 0.25, 0.75;
    const Eigen::MatrixXd h = build_reservoir_hamiltonian(cfg, v);
    const Eigen::VectorXd delta = site_detunings(cfg, v);
    // 4 edges at V_NN plus 2 diagonals at V_NN/8
    const double expected = -delta.sum() + 4.0 * (4.0 + 2.0 / 8.0);
    CHECK(h(15, 15) == doctest::Approx(expected).epsilon(1e-12));
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("evolution preserves the norm and starts at the ground state") {
    const auto cfg = fig2_config(2.0);
    Eigen::VectorXd v(2);
    v << 0.6, 0.1;
    ReservoirPropagator prop(build_reservoir_hamiltonian(cfg, v));
    const Eigen::VectorXcd psi0 = prop.state_at(0.0);
    CHECK(psi0[0] == std::complex<double>(1.0, 0.0));
    CHECK(psi0.tail(15).cwiseAbs().maxCoeff() == 0.0);
    for (double t : {0.1, 0.5, 2.0, 7.3})
        CHECK(std::abs(prop.state_at(t).norm() - 1.0) < 1e-12);
    CHECK_THROWS_AS(prop.state_at(-0.1), std::invalid_argument);
}

TEST_CASE("isolated resonant qubits show the rabi magnetization") {
    ReservoirConfig cfg = fig2_config(4.0);
    cfg.c6 = 0.0;
    cfg.delta_glob = 0.0;
    cfg.delta_loc = 0.0;
    cfg.v_homo = 0.0;
    cfg.omega_glob = 5.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
    ReservoirPropagator prop(build_reservoir_hamiltonian(cfg, v));
    for (double t : {0.05, 0.21, 0.9}) {
        const MeasurementVector m = measure(prop.state_at(t), t);
        for (int j = 0; j < 4; ++j)
            CHECK(m.m[j] == doctest::Approx(-std::cos(5.0 * t)).epsilon(1e-10));
    }
}

TEST_CASE("propagator matches the fixed-step integrator oracle") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        ReservoirConfig cfg = ReservoirConfig::for_problem(
            trial % 2 == 0 ? ProblemKind::H2 : ProblemKind::TripleWell,
            rng.uniform(0.5, 8.0), rng.uniform(1.0, 8.0), rng.uniform(-2.0, 5.0),
            rng.uniform(-4.0, -0.5), rng.next_double());
        Eigen::VectorXd v(cfg.addressed_sites.size());
        for (int f = 0; f < v.size(); ++f) v[f] = rng.next_double();
        const Eigen::MatrixXd h = build_reservoir_hamiltonian(cfg, v);
        const double t = 2.0 * kPi / cfg.omega_max() * rng.next_double();
        const Eigen::VectorXcd direct = evolve(h, t);
        const Eigen::VectorXcd stepped = oracles::rk4_evolve(h, t, 20000);
        CHECK((direct - stepped).norm() < 1e-8);
    }
}

TEST_CASE("measurement of the initial state") {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(16);
    psi[0] = 1.0;
    const MeasurementVector m = measure(psi, 0.0);
    for (int j = 0; j < 4; ++j) CHECK(m.m[j] == -1.0);
    for (int p = 4; p < 10; ++p) CHECK(m.m[p] == 1.0);
}

TEST_CASE("measurement values stay in [-1,1] and reject unnormalized states") {
    const auto cfg = fig2_config(4.0);
    Eigen::VectorXd v(2);
    v << 0.9, 0.2;
    ReservoirPropagator prop(build_reservoir_hamiltonian(cfg, v));
    const MeasurementVector m = measure(prop.state_at(0.77), 0.77);
    for (double x : m.m) {
        CHECK(x >= -1.0);
        CHECK(x <= 1.0);
    }
    Eigen::VectorXcd bad = Eigen::VectorXcd::Zero(16);
    bad[0] = 0.7;
    CHECK_THROWS_AS(measure(bad, 0.0), std::invalid_argument);
}

TEST_CASE("non-interacting h2 encoding factorizes to seven distinct values") {
    ReservoirConfig cfg = fig2_config(4.0);
    cfg.c6 = 0.0;
    Eigen::VectorXd v(2);
    v << 0.8, 0.3;
    ReservoirPropagator prop(build_reservoir_hamiltonian(cfg, v));
    for (double t : {0.3, 0.8, 1.7}) {
        const MeasurementVector m = measure(prop.state_at(t), t);
        CHECK(std::abs(m.m[1] - m.m[3]) < 1e-10);                 // mz1 = mz3
        CHECK(std::abs(m.m[4] - m.m[6]) < 1e-10);                 // czz01 = czz03
        CHECK(std::abs(m.m[7] - m.m[9]) < 1e-10);                 // czz12 = czz23
        CHECK(std::abs(m.m[4] - m.m[0] * m.m[1]) < 1e-10);        // factorization
        CHECK(std::abs(m.m[8] - m.m[1] * m.m[3]) < 1e-10);
        std::set<long long> distinct;
        for (double x : m.m) distinct.insert(std::llround(x * 1e10));
        CHECK(distinct.size() == 7);
    }
}

TEST_CASE("swapping the addressed features reflects the measurement vector") {
    const auto cfg = fig2_config(3.0);
    Eigen::VectorXd v(2), w(2);
    v << 0.85, 0.15;
    w << 0.15, 0.85;
    const auto table = embed_samples(cfg, {v, w}, {0.4, 1.1});
    for (int ti = 0; ti < 2; ++ti) {
        const auto& a = table.at(0, ti).m;
        const auto& b = table.at(1, ti).m;
        // site relabeling 0<->2, 1<->3
        CHECK(a[0] == doctest::Approx(b[2]).epsilon(1e-10));
        CHECK(a[1] == doctest::Approx(b[3]).epsilon(1e-10));
        CHECK(a[4] == doctest::Approx(b[9]).epsilon(1e-10)); // 01 -> 23
        CHECK(a[5] == doctest::Approx(b[5]).epsilon(1e-10)); // 02 -> 02
        CHECK(a[6] == doctest::Approx(b[7]).epsilon(1e-10)); // 03 -> 12
        CHECK(a[8] == doctest::Approx(b[8]).epsilon(1e-10)); // 13 -> 13
    }
}

TEST_CASE("information spread grows with the interaction") {
    // |mz1 - mz3| at t*Omega_max = pi/2 for the extreme sample, ordered in V_NN
    Eigen::VectorXd v(2);
    v << 1.0, 0.0;
    double previous = -1.0;
    for (double vnn : {1.0, 2.0, 4.0, 8.0}) {
        const auto cfg = fig2_config(vnn);
        const double t = 0.5 * kPi / cfg.omega_max();
        ReservoirPropagator prop(build_reservoir_hamiltonian(cfg, v));
        const MeasurementVector m = measure(prop.state_at(t), t);
        const double dm = std::abs(m.m[1] - m.m[3]);
        CHECK(dm > previous);
        previous = dm;
    }
}

TEST_CASE("embedding table shape, determinism and t=0 row") {
    const auto cfg = fig2_config(4.0);
    std::vector<Eigen::VectorXd> vs;
    SplitMix64 rng(55);
    for (int s = 0; s < 3; ++s) {
        Eigen::VectorXd v(2);
        v << rng.next_double(), rng.next_double();
        vs.push_back(v);
    }
    vs.push_back(vs[0]); // duplicate sample
    const std::vector<double> times = {0.0, 0.3, 0.9};
    const auto table = embed_samples(cfg, vs, times);
    CHECK(table.rows.size() == vs.size() * times.size());
    for (int j = 0; j < 4; ++j) CHECK(table.at(0, 0).m[j] == -1.0);
    for (int p = 4; p < 10; ++p) CHECK(table.at(0, 0).m[p] == 1.0);
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        for (int c = 0; c < 10; ++c)
            CHECK(table.at(0, ti).m[c] == table.at(3, ti).m[c]); // identical inputs
}
