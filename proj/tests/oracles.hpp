#pragma once

// Independent reference implementations used only by tests. These verify the
// production paths without sharing code with them.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Fixed-step fourth-order integrator for d/dt psi = -i H psi from |0...0>.
inline Eigen::VectorXcd rk4_evolve(const Eigen::MatrixXd& h, double t, int steps) {
    const Eigen::Index dim = h.rows();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi[0] = 1.0;
    if (t == 0.0) return psi;
    const std::complex<double> mi(0.0, -1.0);
    const double dt = t / steps;
    for (int s = 0; s < steps; ++s) {
        const Eigen::VectorXcd k1 = mi * (h * psi);
        const Eigen::VectorXcd k2 = mi * (h * (psi + 0.5 * dt * k1));
        const Eigen::VectorXcd k3 = mi * (h * (psi + 0.5 * dt * k2));
        const Eigen::VectorXcd k4 = mi * (h * (psi + dt * k3));
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return psi;
}

// Projection onto {0 <= b <= c} intersected with {u^T b = 0} by bisecting the
// shift along u.
inline Eigen::VectorXd project_box_hyperplane(const Eigen::VectorXd& z,
                                              const Eigen::VectorXd& u, double c) {
    const auto clipped_sum = [&](double lambda) {
        double s = 0.0;
        for (Eigen::Index t = 0; t < z.size(); ++t) {
            const double v = std::clamp(z[t] - lambda * u[t], 0.0, c);
            s += u[t] * v;
        }
        return s;
    };
    double lo = -(z.cwiseAbs().maxCoeff() + c + 1.0);
    double hi = -lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (clipped_sum(mid) > 0.0 ? lo : hi) = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    Eigen::VectorXd out(z.size());
    for (Eigen::Index t = 0; t < z.size(); ++t)
        out[t] = std::clamp(z[t] - lambda * u[t], 0.0, c);
    return out;
}

// Dense projected-gradient reference for the epsilon-SVR dual, in the
// (alpha, alpha*) split so the objective is smooth. Returns deltas.
inline Eigen::VectorXd qp_reference_svr(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                                        double c, double epsilon,
                                        double tol = 1e-10, long max_iter = 4000000) {
    const Eigen::Index n = y.size();
    const Eigen::Index nn = 2 * n;
    Eigen::MatrixXd q(nn, nn);
    q.topLeftCorner(n, n) = k;
    q.bottomRightCorner(n, n) = k;
    q.topRightCorner(n, n) = -k;
    q.bottomLeftCorner(n, n) = -k;
    Eigen::VectorXd p(nn), u(nn);
    p.head(n) = Eigen::VectorXd::Constant(n, epsilon) - y;
    p.tail(n) = Eigen::VectorXd::Constant(n, epsilon) + y;
    u.head(n).setOnes();
    u.tail(n) = -Eigen::VectorXd::Ones(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    const double lip = 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-12);
    const double step = 1.0 / lip;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(nn);
    for (long it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd grad = q * beta + p;
        const Eigen::VectorXd next = project_box_hyperplane(beta - step * grad, u, c);
        const double move = (next - beta).cwiseAbs().maxCoeff();
        beta = next;
        if (move < tol) break;
    }
    return beta.head(n) - beta.tail(n);
}

inline double svr_dual_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& deltas,
                                 const Eigen::VectorXd& y, double epsilon) {
    return -0.5 * deltas.dot(k * deltas) - epsilon * deltas.lpNorm<1>() + y.dot(deltas);
}

// Coarse-to-fine lattice search for the constrained Pulay coefficients:
// minimize |sum c_m R_m|^2 with sum c_m = 1.
inline Eigen::VectorXd pulay_bruteforce(const std::vector<Eigen::VectorXd>& residuals,
                                        const Eigen::VectorXd& weights) {
    const int m = static_cast<int>(residuals.size());
    Eigen::MatrixXd gram(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            gram(i, j) = residuals[i].cwiseProduct(weights).dot(residuals[j]);

    const auto value = [&](const Eigen::VectorXd& c) { return c.dot(gram * c); };

    Eigen::VectorXd best = Eigen::VectorXd::Zero(m);
    best[m - 1] = 1.0;
    double span = 4.0;
    for (int stage = 0; stage < 12; ++stage) {
        const int steps = 24;
        const double h = span / steps;
        Eigen::VectorXd center = best;
        // Scan the first m-1 coordinates; the last is fixed by the constraint.
        std::vector<int> idx(m - 1, -steps / 2);
        bool done = m == 1;
        while (!done) {
            Eigen::VectorXd c(m);
            double sum = 0.0;
            for (int i = 0; i < m - 1; ++i) {
                c[i] = center[i] + idx[i] * h;
                sum += c[i];
            }
            c[m - 1] = 1.0 - sum;
            if (value(c) < value(best)) best = c;
            int pos = 0;
            while (pos < m - 1 && ++idx[pos] > steps / 2) idx[pos++] = -steps / 2;
            if (pos == m - 1) done = true;
        }
        span = 4.0 * h;
    }
    return best;
}

} // namespace oracles
