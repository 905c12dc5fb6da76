#include "qdens/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qdens/ksdft.hpp"
#include "qdens/rng.hpp"

namespace qdens {

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Linear: return "linear";
        case KernelKind::RBF: return "rbf";
        case KernelKind::PQK: return "pqk";
    }
    return "linear";
}

KernelKind kernel_kind_from_string(const std::string& s) {
    if (s == "linear") return KernelKind::Linear;
    if (s == "rbf") return KernelKind::RBF;
    if (s == "pqk") return KernelKind::PQK;
    throw std::invalid_argument("unknown kernel kind: " + s);
}

GramMatrix gram_linear(const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0) throw std::invalid_argument("gram_linear: empty input");
    return {rows * rows.transpose(), KernelKind::Linear, 0.0,
            std::numeric_limits<double>::quiet_NaN()};
}

GramMatrix gram_rbf(const Eigen::MatrixXd& rows, double gamma) {
    if (rows.rows() == 0) throw std::invalid_argument("gram_rbf: empty input");
    if (!(gamma > 0.0)) throw std::invalid_argument("gram_rbf: gamma must be positive");
    const Eigen::Index n = rows.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d2 = (rows.row(i) - rows.row(j)).squaredNorm();
            k(i, j) = k(j, i) = std::exp(-gamma * d2);
        }
    }
    return {std::move(k), KernelKind::RBF, gamma,
            std::numeric_limits<double>::quiet_NaN()};
}

GramMatrix gram_pqk(const std::vector<MeasurementVector>& rows) {
    if (rows.empty()) throw std::invalid_argument("gram_pqk: empty input");
    const double t = rows.front().tstar;
    Eigen::MatrixXd m(rows.size(), 10);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].tstar != t)
            throw std::invalid_argument("gram_pqk: mixed measurement times");
        m.row(static_cast<Eigen::Index>(i)) = rows[i].as_vector();
    }
    GramMatrix g = gram_linear(m);
    g.kind = KernelKind::PQK;
    g.tstar = t;
    return g;
}

KernelData KernelData::classical(KernelKind kind, const Eigen::MatrixXd& feature_rows) {
    if (kind == KernelKind::PQK)
        throw std::invalid_argument("KernelData::classical: use KernelData::pqk");
    KernelData d;
    d.kind = kind;
    d.rows = feature_rows;
    return d;
}

KernelData KernelData::pqk(const std::vector<MeasurementVector>& rows) {
    if (rows.empty()) throw std::invalid_argument("KernelData::pqk: empty input");
    KernelData d;
    d.kind = KernelKind::PQK;
    d.tstar = rows.front().tstar;
    d.rows.resize(rows.size(), 10);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].tstar != d.tstar)
            throw std::invalid_argument("KernelData::pqk: mixed measurement times");
        d.rows.row(static_cast<Eigen::Index>(i)) = rows[i].as_vector();
    }
    return d;
}

GramMatrix KernelData::gram(double gamma) const {
    switch (kind) {
        case KernelKind::Linear: return gram_linear(rows);
        case KernelKind::RBF: return gram_rbf(rows, gamma);
        case KernelKind::PQK: {
            GramMatrix g = gram_linear(rows);
            g.kind = KernelKind::PQK;
            g.tstar = tstar;
            return g;
        }
    }
    throw std::logic_error("KernelData::gram: bad kind");
}

Eigen::VectorXd KernelData::kernel_row(const Eigen::VectorXd& query, double gamma) const {
    if (query.size() != rows.cols())
        throw std::invalid_argument("kernel_row: query dimension mismatch");
    if (kind == KernelKind::RBF) {
        Eigen::VectorXd out(rows.rows());
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            out[i] = std::exp(-gamma * (rows.row(i).transpose() - query).squaredNorm());
        return out;
    }
    return rows * query;
}

namespace {

void check_psd(const Eigen::MatrixXd& k) {
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + k.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("train_svr: gram matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-8 * std::max(hi, 1e-300))
        throw std::invalid_argument("train_svr: gram matrix not positive semidefinite");
}

// Bias from the KKT conditions: average over tube-interior support vectors,
// midpoint of the bound-constraint interval otherwise.
double bias_from_kkt(const Eigen::MatrixXd& k, const Eigen::VectorXd& deltas,
                     const Eigen::VectorXd& y, double c, double epsilon) {
    const Eigen::VectorXd e = k * deltas;
    const double btol = 1e-10 * std::max(1.0, c);
    double acc = 0.0;
    int interior = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (deltas[i] > btol && deltas[i] < c - btol) {
            acc += y[i] - e[i] - epsilon;
            ++interior;
        } else if (deltas[i] < -btol && deltas[i] > -c + btol) {
            acc += y[i] - e[i] + epsilon;
            ++interior;
        }
    }
    if (interior > 0) return acc / interior;

    double lb = -std::numeric_limits<double>::infinity();
    double ub = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (std::abs(deltas[i]) <= btol) {
            lb = std::max(lb, y[i] - e[i] - epsilon);
            ub = std::min(ub, y[i] - e[i] + epsilon);
        } else if (deltas[i] >= c - btol) {
            ub = std::min(ub, y[i] - e[i] - epsilon);
        } else if (deltas[i] <= -c + btol) {
            lb = std::max(lb, y[i] - e[i] + epsilon);
        }
    }
    if (!std::isfinite(lb) && !std::isfinite(ub)) return 0.0;
    if (!std::isfinite(lb)) return ub;
    if (!std::isfinite(ub)) return lb;
    return 0.5 * (lb + ub);
}

double dual_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& deltas,
                      const Eigen::VectorXd& y, double epsilon) {
    return -0.5 * deltas.dot(k * deltas) - epsilon * deltas.lpNorm<1>() + y.dot(deltas);
}

double primal_objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& deltas,
                        const Eigen::VectorXd& y, double c, double epsilon, double bias) {
    const Eigen::VectorXd f = k * deltas;
    double slack = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        slack += std::max(0.0, std::abs(y[i] - f[i] - bias) - epsilon);
    return 0.5 * deltas.dot(k * deltas) + c * slack;
}

// Primal-dual interior-point solve of
//   min 1/2 b^T Q b + p^T b,   0 <= b <= C,   u^T b = 0
// with Q positive semidefinite (possibly badly conditioned). Path-following
// with a Mehrotra-style adaptive centering; the barrier regularizes the
// Newton systems, so rank-deficient grams need no special casing.
Eigen::VectorXd interior_point_qp(const Eigen::MatrixXd& qm, const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& u, double c) {
    const int m = static_cast<int>(p.size());
    Eigen::VectorXd beta = Eigen::VectorXd::Constant(m, 0.5 * c);
    const double z0 = 1.0 + p.cwiseAbs().maxCoeff();
    Eigen::VectorXd z = Eigen::VectorXd::Constant(m, z0); // duals of beta >= 0
    Eigen::VectorXd w = Eigen::VectorXd::Constant(m, z0); // duals of beta <= C
    double nu = 0.0;                                      // equality multiplier

    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::VectorXd s = Eigen::VectorXd::Constant(m, c) - beta;
        const double mu = (beta.dot(z) + s.dot(w)) / (2 * m);
        const Eigen::VectorXd r_dual = qm * beta + p + nu * u - z + w;
        const double r_primal = u.dot(beta);
        const double scale = 1.0 + p.cwiseAbs().maxCoeff() + c;
        if (mu < 1e-14 * scale && r_dual.cwiseAbs().maxCoeff() < 1e-11 * scale &&
            std::abs(r_primal) < 1e-11 * scale)
            break;

        const double sigma = 0.1;
        const double target = sigma * mu;

        // Eliminate z and w: (Q + D) db + u dnu = rhs, u^T db = -r_primal,
        // with D = diag(z/beta + w/s).
        Eigen::MatrixXd kkt = qm;
        Eigen::VectorXd rhs = -r_dual;
        for (int t = 0; t < m; ++t) {
            kkt(t, t) += z[t] / beta[t] + w[t] / s[t];
            rhs[t] += (target - beta[t] * z[t]) / beta[t] -
                      (target - s[t] * w[t]) / s[t];
        }
        const Eigen::LDLT<Eigen::MatrixXd> solver(kkt);
        const Eigen::VectorXd k_inv_rhs = solver.solve(rhs);
        const Eigen::VectorXd k_inv_u = solver.solve(u);
        const double dnu = (u.dot(k_inv_rhs) + r_primal) / u.dot(k_inv_u);
        const Eigen::VectorXd dbeta = k_inv_rhs - dnu * k_inv_u;
        Eigen::VectorXd dz(m), dw(m);
        for (int t = 0; t < m; ++t) {
            dz[t] = (target - beta[t] * z[t] - z[t] * dbeta[t]) / beta[t];
            dw[t] = (target - s[t] * w[t] + w[t] * dbeta[t]) / s[t];
        }

        double alpha = 1.0;
        for (int t = 0; t < m; ++t) {
            if (dbeta[t] < 0.0) alpha = std::min(alpha, -beta[t] / dbeta[t]);
            if (dbeta[t] > 0.0) alpha = std::min(alpha, s[t] / dbeta[t]);
            if (dz[t] < 0.0) alpha = std::min(alpha, -z[t] / dz[t]);
            if (dw[t] < 0.0) alpha = std::min(alpha, -w[t] / dw[t]);
        }
        alpha = std::min(1.0, 0.995 * alpha);
        beta += alpha * dbeta;
        z += alpha * dz;
        w += alpha * dw;
        nu += alpha * dnu;
    }
    return beta;
}

// Exact stationarity solve on the active set read off a near-optimal point:
// bound and zero deltas stay fixed; tube-interior deltas and the bias solve
//   [ K_II  1 ] [d_I]   [ y_I - sign(d_I) eps - K_IF d_F ]
//   [ 1^T   0 ] [ b ] = [ -sum(d_F)                      ]
// with iterative-refinement passes (the bound-sized entries cancel
// catastrophically otherwise). A coordinate whose exact solution leaves the
// box or flips sign was misclassified; it is re-fixed at the violated bound
// or at zero and the shrunken system is solved again.
bool polish_active_set(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double c,
                       double epsilon, double bound_tol, Eigen::VectorXd& deltas) {
    const Eigen::Index n = y.size();

    enum class Kind : char { Interior, Fixed };
    std::vector<Kind> kind(n, Kind::Fixed);
    std::vector<double> sign(n, 0.0);
    Eigen::VectorXd candidate = deltas;
    int interior_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (deltas[i] >= c - bound_tol) {
            candidate[i] = c;
        } else if (deltas[i] <= -c + bound_tol) {
            candidate[i] = -c;
        } else if (std::abs(deltas[i]) <= bound_tol) {
            candidate[i] = 0.0;
        } else {
            kind[i] = Kind::Interior;
            sign[i] = deltas[i] > 0.0 ? 1.0 : -1.0;
            ++interior_count;
        }
    }

    while (interior_count > 0) {
        std::vector<Eigen::Index> interior;
        interior.reserve(interior_count);
        double fixed_sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (kind[i] == Kind::Interior) interior.push_back(i);
            else fixed_sum += candidate[i];
        }
        const Eigen::Index f = static_cast<Eigen::Index>(interior.size());

        Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(f + 1, f + 1);
        Eigen::VectorXd rhs(f + 1);
        for (Eigen::Index a = 0; a < f; ++a) {
            const Eigen::Index i = interior[a];
            for (Eigen::Index b = 0; b < f; ++b) sys(a, b) = k(i, interior[b]);
            sys(a, f) = 1.0;
            sys(f, a) = 1.0;
            double fixed_field = 0.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (kind[j] == Kind::Fixed) fixed_field += k(i, j) * candidate[j];
            rhs[a] = y[i] - sign[i] * epsilon - fixed_field;
        }
        rhs[f] = -fixed_sum;

        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sys);
        Eigen::VectorXd sol = cod.solve(rhs);
        for (int pass = 0; pass < 2; ++pass)
            sol += cod.solve(rhs - sys * sol);
        if (!sol.allFinite()) return false;

        // Re-fix the worst misclassified coordinate, if any.
        Eigen::Index worst = -1;
        double worst_excess = 0.0;
        double worst_value = 0.0;
        for (Eigen::Index a = 0; a < f; ++a) {
            double excess = 0.0, fix_value = 0.0;
            if (std::abs(sol[a]) > c) {
                excess = std::abs(sol[a]) - c;
                fix_value = sol[a] > 0.0 ? c : -c;
            } else if (sol[a] * sign[interior[a]] < 0.0) {
                excess = std::abs(sol[a]);
                fix_value = 0.0;
            }
            if (excess > worst_excess) {
                worst_excess = excess;
                worst = interior[a];
                worst_value = fix_value;
            }
        }
        if (worst < 0) {
            for (Eigen::Index a = 0; a < f; ++a) candidate[interior[a]] = sol[a];
            deltas = candidate;
            return true;
        }
        kind[worst] = Kind::Fixed;
        candidate[worst] = worst_value;
        --interior_count;
    }
    deltas = candidate;
    return true;
}

} // namespace

SvrModel train_svr(const GramMatrix& gram, const Eigen::VectorXd& y, double c,
                   double epsilon) {
    const int n = static_cast<int>(gram.k.rows());
    if (n == 0 || y.size() != n) throw std::invalid_argument("train_svr: size mismatch");
    if (!(c > 0.0)) throw std::invalid_argument("train_svr: C must be positive");
    if (epsilon < 0.0) throw std::invalid_argument("train_svr: epsilon must be nonnegative");
    check_psd(gram.k);

    // Work on the smooth 2n-variable formulation: beta = (alpha, alpha*),
    // sign(t) = +1 for alpha block, -1 for alpha* block,
    //   min 1/2 beta^T Q beta + p^T beta,  0 <= beta <= C,  sign^T beta = 0,
    // with Q(s,t) = sign_s sign_t K(s%n, t%n).
    const int nn = 2 * n;
    const auto sgn = [n](int t) { return t < n ? 1.0 : -1.0; };
    const auto q = [&](int s, int t) {
        return sgn(s) * sgn(t) * gram.k(s % n, t % n);
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(nn);
    Eigen::VectorXd grad(nn);
    for (int t = 0; t < nn; ++t) grad[t] = epsilon - sgn(t) * y[t % n];

    const double y_scale = std::max(y.cwiseAbs().maxCoeff(), 1e-12);
    double kkt_tol = 1e-3 * y_scale;
    const double kkt_tol_floor = 1e-14 * std::max(y_scale, 1.0);
    const double gap_target = 1e-7;
    const double gap_limit = 1e-6; // accept when tolerance bottoms out
    // 1e5 passes, each sweeping up to one pair update per dual variable.
    const long max_iterations = 100000L * nn;

    const auto extract_deltas = [&]() {
        return Eigen::VectorXd(beta.head(n) - beta.tail(n));
    };
    const auto relative_gap = [&](const Eigen::VectorXd& deltas) {
        const double dual = dual_objective(gram.k, deltas, y, epsilon);
        const double b = bias_from_kkt(gram.k, deltas, y, c, epsilon);
        const double primal = primal_objective(gram.k, deltas, y, c, epsilon, b);
        return (primal - dual) / (1.0 + std::abs(dual));
    };
    const auto load_deltas = [&](const Eigen::VectorXd& deltas) {
        beta.head(n) = deltas.cwiseMax(0.0);
        beta.tail(n) = (-deltas).cwiseMax(0.0);
        for (int t = 0; t < nn; ++t) {
            grad[t] = epsilon - sgn(t) * y[t % n];
            for (int s = 0; s < nn; ++s) grad[t] += q(t, s) * beta[s];
        }
    };

    // SMO crawls on flat optimal faces (ill-conditioned grams with large C).
    // Finish those with an interior-point solve; polishing the active set it
    // identifies recovers the digits the duality-gap check needs. Accept the
    // result only when the dual objective does not decrease.
    Eigen::MatrixXd q_full;
    Eigen::VectorXd p_full, u_full;
    const auto try_exact = [&](Eigen::VectorXd& deltas, double& gap) {
        if (q_full.size() == 0) {
            q_full.resize(nn, nn);
            p_full.resize(nn);
            u_full.resize(nn);
            for (int s = 0; s < nn; ++s) {
                for (int t = 0; t < nn; ++t) q_full(s, t) = q(s, t);
                p_full[s] = epsilon - sgn(s) * y[s % n];
                u_full[s] = sgn(s);
            }
        }
        const Eigen::VectorXd ipm = interior_point_qp(q_full, p_full, u_full, c);
        const Eigen::VectorXd raw = ipm.head(n) - ipm.tail(n);
        Eigen::VectorXd candidate = raw;
        double candidate_gap = relative_gap(candidate);
        // The right classification tolerance depends on how far the
        // interior-point iterate got; try a few and keep the best gap.
        for (double tol_scale : {1e-7, 1e-5, 1e-3}) {
            Eigen::VectorXd polished = raw;
            if (!polish_active_set(gram.k, y, c, epsilon, tol_scale * c, polished))
                continue;
            const double polished_gap = relative_gap(polished);
            if (polished_gap < candidate_gap) {
                candidate = std::move(polished);
                candidate_gap = polished_gap;
            }
        }
        // All points are dual feasible, so the measured gap alone decides.
        if (candidate_gap < gap) {
            load_deltas(candidate);
            deltas = candidate;
            gap = candidate_gap;
        }
    };

    const long check_interval = 50L * nn;
    long iter = 0;
    bool converged = false;
    while (!converged) {
        // Maximal violating pair.
        int i = -1, j = -1;
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (int t = 0; t < nn; ++t) {
            const bool up = sgn(t) > 0 ? beta[t] < c : beta[t] > 0.0;
            const bool low = sgn(t) > 0 ? beta[t] > 0.0 : beta[t] < c;
            const double v = -sgn(t) * grad[t];
            if (up && v > m_up) {
                m_up = v;
                i = t;
            }
            if (low && v < m_low) {
                m_low = v;
                j = t;
            }
        }

        const bool kkt_reached = i < 0 || j < 0 || m_up - m_low < kkt_tol;
        if (kkt_reached || (iter > 0 && iter % check_interval == 0)) {
            Eigen::VectorXd deltas = extract_deltas();
            double gap = relative_gap(deltas);
            if (gap > gap_target) try_exact(deltas, gap);
            if (gap <= gap_target) {
                converged = true;
                break;
            }
            if (kkt_reached) {
                if (kkt_tol > kkt_tol_floor) {
                    kkt_tol = std::max(kkt_tol * 0.1, kkt_tol_floor);
                    continue;
                }
                if (gap <= gap_limit) {
                    converged = true;
                    break;
                }
                throw ConvergenceError("train_svr: stalled with duality gap " +
                                           std::to_string(gap),
                                       gap);
            }
        }

        if (++iter > max_iterations) {
            Eigen::VectorXd deltas = extract_deltas();
            double gap = relative_gap(deltas);
            try_exact(deltas, gap);
            if (gap <= gap_limit) break;
            if (FILE* f = fopen("/tmp/svr_fail.txt", "w")) { // TODO remove debug dump
                fprintf(f, "n=%d c=%.17g eps=%.17g\n", n, c, epsilon);
                for (int r = 0; r < n; ++r) {
                    for (int s = 0; s < n; ++s) fprintf(f, "%.17g ", gram.k(r, s));
                    fprintf(f, "\n");
                }
                for (int r = 0; r < n; ++r) fprintf(f, "%.17g ", y[r]);
                fprintf(f, "\n");
                fclose(f);
            }
            throw ConvergenceError(
                "train_svr: exceeded max passes, duality gap " + std::to_string(gap), gap);
        }

        // Two-variable subproblem along the equality constraint.
        const double old_i = beta[i], old_j = beta[j];
        if (sgn(i) != sgn(j)) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) quad = 1e-12;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = old_i - old_j;
            beta[i] += delta;
            beta[j] += delta;
            if (diff > 0.0) {
                if (beta[j] < 0.0) { beta[j] = 0.0; beta[i] = diff; }
                if (beta[i] > c) { beta[i] = c; beta[j] = c - diff; }
            } else {
                if (beta[i] < 0.0) { beta[i] = 0.0; beta[j] = -diff; }
                if (beta[j] > c) { beta[j] = c; beta[i] = c + diff; }
            }
        } else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) quad = 1e-12;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = old_i + old_j;
            beta[i] -= delta;
            beta[j] += delta;
            if (sum > c) {
                if (beta[i] > c) { beta[i] = c; beta[j] = sum - c; }
                if (beta[j] > c) { beta[j] = c; beta[i] = sum - c; }
            } else {
                if (beta[j] < 0.0) { beta[j] = 0.0; beta[i] = sum; }
                if (beta[i] < 0.0) { beta[i] = 0.0; beta[j] = sum; }
            }
        }

        const double di = beta[i] - old_i;
        const double dj = beta[j] - old_j;
        if (di == 0.0 && dj == 0.0) {
            // Degenerate step; treat current tolerance level as exhausted.
            kkt_tol = std::max(kkt_tol * 0.1, kkt_tol_floor);
            continue;
        }
        for (int t = 0; t < nn; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
    }

    SvrModel model;
    model.deltas = extract_deltas();
    model.bias = bias_from_kkt(gram.k, model.deltas, y, c, epsilon);
    model.c = c;
    model.epsilon = epsilon;
    model.kind = gram.kind;
    model.gamma = gram.gamma;
    const double support_tol = 1e-12 * std::max(1.0, c);
    for (int k = 0; k < n; ++k)
        if (std::abs(model.deltas[k]) > support_tol) model.support_indices.push_back(k);
    model.training_ids.resize(n);
    for (int k = 0; k < n; ++k) model.training_ids[k] = k;
    return model;
}

double predict(const SvrModel& model, const Eigen::VectorXd& k_row) {
    if (k_row.size() != model.deltas.size())
        throw std::invalid_argument("predict: kernel row length mismatch");
    return model.deltas.dot(k_row) + model.bias;
}

nlohmann::json SvrModel::to_json() const {
    nlohmann::json j;
    j["kernel"] = qdens::to_string(kind);
    j["c"] = c;
    j["epsilon"] = epsilon;
    if (kind == KernelKind::RBF) j["gamma"] = gamma;
    j["target_index"] = target_index;
    j["bias"] = bias;
    j["deltas"] = std::vector<double>(deltas.data(), deltas.data() + deltas.size());
    j["support_indices"] = support_indices;
    j["training_ids"] = training_ids;
    return j;
}

std::vector<double> rbf_gamma_grid(const Eigen::MatrixXd& feature_rows,
                                   const std::vector<double>& fixed) {
    std::vector<double> gammas = fixed;
    const double nf = static_cast<double>(feature_rows.cols());
    const Eigen::VectorXd mean = feature_rows.colwise().mean();
    double var_avg = 0.0;
    for (Eigen::Index f = 0; f < feature_rows.cols(); ++f)
        var_avg += (feature_rows.col(f).array() - mean[f]).square().mean();
    var_avg /= nf;
    const double g_scale = 1.0 / (nf * var_avg);
    if (std::isfinite(g_scale) && g_scale > 0.0) gammas.push_back(g_scale);
    gammas.push_back(1.0 / nf);
    return gammas;
}

namespace {

struct FoldSplit {
    std::vector<std::vector<int>> train;
    std::vector<std::vector<int>> validate;
};

FoldSplit make_folds(int n, int folds, std::uint64_t seed) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    shuffle_indices(idx, seed);

    FoldSplit split;
    split.train.resize(folds);
    split.validate.resize(folds);
    int pos = 0;
    for (int f = 0; f < folds; ++f) {
        const int size = n / folds + (f < n % folds ? 1 : 0);
        for (int k = 0; k < size; ++k) split.validate[f].push_back(idx[pos + k]);
        for (int k = 0; k < n; ++k) {
            if (k < pos || k >= pos + size) split.train[f].push_back(idx[k]);
        }
        pos += size;
    }
    return split;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& k, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                k(rows[i], cols[j]);
    return out;
}

double cv_score(const GramMatrix& full, const Eigen::VectorXd& y, const FoldSplit& folds,
                double c, double epsilon) {
    double total = 0.0;
    for (std::size_t f = 0; f < folds.train.size(); ++f) {
        const auto& tr = folds.train[f];
        const auto& va = folds.validate[f];
        GramMatrix sub{submatrix(full.k, tr, tr), full.kind, full.gamma, full.tstar};
        Eigen::VectorXd y_tr(tr.size());
        for (std::size_t i = 0; i < tr.size(); ++i)
            y_tr[static_cast<Eigen::Index>(i)] = y[tr[i]];
        const SvrModel model = train_svr(sub, y_tr, c, epsilon);

        double mae = 0.0;
        for (int v : va) {
            Eigen::VectorXd k_row(tr.size());
            for (std::size_t i = 0; i < tr.size(); ++i)
                k_row[static_cast<Eigen::Index>(i)] = full.k(v, tr[i]);
            mae += std::abs(predict(model, k_row) - y[v]);
        }
        total += mae / static_cast<double>(va.size());
    }
    return total / static_cast<double>(folds.train.size());
}

std::vector<double> effective_gammas(const KernelData& data, const HyperparameterGrid& grid) {
    if (data.kind == KernelKind::RBF) return rbf_gamma_grid(data.rows, grid.gamma_values);
    return {0.0};
}

GridSearchResult grid_search_over(const std::vector<std::pair<double, GramMatrix>>& grams,
                                  const Eigen::VectorXd& y, const HyperparameterGrid& grid,
                                  std::uint64_t seed) {
    const int n = static_cast<int>(y.size());
    if (grid.folds < 2) throw std::invalid_argument("grid_search: folds must be >= 2");
    if (n < grid.folds) throw std::invalid_argument("grid_search: fewer samples than folds");
    if (grid.c_values.empty() || grid.epsilon_values.empty())
        throw std::invalid_argument("grid_search: empty grid");

    const FoldSplit folds = make_folds(n, grid.folds, seed);

    // Canonical order implements the tie-break: smaller C, larger epsilon,
    // smaller gamma win on equal scores.
    std::vector<double> cs = grid.c_values;
    std::sort(cs.begin(), cs.end());
    std::vector<double> eps = grid.epsilon_values;
    std::sort(eps.begin(), eps.end(), std::greater<>());

    GridSearchResult best;
    double best_score = std::numeric_limits<double>::infinity();
    for (double c : cs)
        for (double e : eps)
            for (const auto& [gamma, gram] : grams) {
                const double score = cv_score(gram, y, folds, c, e);
                if (score < best_score) {
                    best_score = score;
                    best = {c, e, gamma, score};
                }
            }
    return best;
}

} // namespace

GridSearchResult grid_search(const KernelData& data, const Eigen::VectorXd& y,
                             const HyperparameterGrid& grid, std::uint64_t seed) {
    std::vector<double> gammas = effective_gammas(data, grid);
    std::sort(gammas.begin(), gammas.end());
    std::vector<std::pair<double, GramMatrix>> grams;
    grams.reserve(gammas.size());
    for (double g : gammas) grams.emplace_back(g, data.gram(g));
    return grid_search_over(grams, y, grid, seed);
}

std::vector<SvrModel> train_multi(const KernelData& data, const Eigen::MatrixXd& targets,
                                  const HyperparameterGrid& grid, std::uint64_t seed) {
    if (targets.rows() != data.rows.rows())
        throw std::invalid_argument("train_multi: target rows mismatch");

    std::vector<double> gammas = effective_gammas(data, grid);
    std::sort(gammas.begin(), gammas.end());
    std::vector<std::pair<double, GramMatrix>> grams;
    grams.reserve(gammas.size());
    for (double g : gammas) grams.emplace_back(g, data.gram(g));

    std::vector<SvrModel> models;
    models.reserve(targets.cols());
    for (Eigen::Index l = 0; l < targets.cols(); ++l) {
        const Eigen::VectorXd y = targets.col(l);
        const GridSearchResult pick = grid_search_over(grams, y, grid, seed);
        const auto gram_it =
            std::find_if(grams.begin(), grams.end(),
                         [&](const auto& g) { return g.first == pick.gamma; });
        SvrModel model = train_svr(gram_it->second, y, pick.c, pick.epsilon);
        model.target_index = static_cast<int>(l);
        models.push_back(std::move(model));
    }
    return models;
}

} // namespace qdens
