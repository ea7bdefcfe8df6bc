#include "hmpc/qp.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

namespace hmpc::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double objective_of(const Program& p, const Eigen::VectorXd& x) {
    double quad = (p.Q.size() > 0) ? 0.5 * x.dot(p.Q * x) : 0.0;
    return quad + p.c.dot(x);
}

// Greedily keeps rows whose gradients are linearly independent of the ones
// already accepted (rank test through a growing QR factor).
std::vector<int> independent_subset(const Eigen::MatrixXd& G,
                                    const std::vector<int>& candidates,
                                    Eigen::Index dim) {
    std::vector<int> kept;
    Eigen::MatrixXd basis(dim, std::min<Eigen::Index>(dim, candidates.size()));
    Eigen::Index cols = 0;
    for (int row : candidates) {
        if (cols == dim) break;
        Eigen::VectorXd a = G.row(row).transpose();
        double norm0 = a.norm();
        if (norm0 < 1e-14) continue;
        Eigen::VectorXd r = a;
        if (cols > 0) {
            Eigen::VectorXd proj = basis.leftCols(cols).transpose() * a;
            r -= basis.leftCols(cols) * proj;
        }
        if (r.norm() > 1e-10 * norm0) {
            basis.col(cols++) = r.normalized();
            kept.push_back(row);
        }
    }
    return kept;
}

struct WorkingSet {
    std::vector<int> rows;

    bool contains(int r) const {
        return std::find(rows.begin(), rows.end(), r) != rows.end();
    }
    void add(int r) { rows.push_back(r); }
    void remove_at(std::size_t k) { rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(k)); }
};

struct ActiveSetCore {
    const Eigen::MatrixXd& Q;   // may be 0x0 for LP mode
    const Eigen::VectorXd& c;
    const Eigen::MatrixXd& G;
    const Eigen::VectorXd& h;
    const Options& opts;
    bool lp_mode;

    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        if (lp_mode) return c;
        return Q * x + c;
    }

    Result run(Eigen::VectorXd x, std::vector<int> warm) const {
        const Eigen::Index d = x.size();
        const Eigen::Index m = h.size();
        Result res;
        res.x = x;

        WorkingSet W;
        {
            std::vector<int> cand;
            for (int r : warm) {
                if (r >= 0 && r < m && std::isfinite(h(r)) &&
                    std::abs(G.row(r) * x - h(r)) <= 10 * opts.feas_tol * (1.0 + std::abs(h(r))))
                    cand.push_back(r);
            }
            for (int r = 0; r < m; ++r) {
                if (!std::isfinite(h(r))) continue;
                if (std::abs(G.row(r) * x - h(r)) <= opts.feas_tol * (1.0 + std::abs(h(r))))
                    if (std::find(cand.begin(), cand.end(), r) == cand.end()) cand.push_back(r);
            }
            W.rows = independent_subset(G, cand, d);
        }

        const int max_iters = opts.max_iterations > 0
                                  ? opts.max_iterations
                                  : static_cast<int>(100 * (d + m) + 200);

        for (int iter = 0; iter < max_iters; ++iter) {
            res.iterations = iter + 1;
            const Eigen::Index w = static_cast<Eigen::Index>(W.rows.size());
            Eigen::VectorXd g = gradient(x);
            const double gscale = 1.0 + g.lpNorm<Eigen::Infinity>();

            Eigen::MatrixXd At(d, w);
            for (Eigen::Index k = 0; k < w; ++k) At.col(k) = G.row(W.rows[static_cast<std::size_t>(k)]).transpose();
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(At);
            Eigen::MatrixXd Qfull = qr.householderQ();
            Eigen::MatrixXd Z = Qfull.rightCols(d - w);  // null space of the working rows

            // direction in the null space
            Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
            bool stationary = true;
            double alpha_cap = kInf;
            if (d - w > 0) {
                Eigen::VectorXd gz = Z.transpose() * g;
                if (gz.lpNorm<Eigen::Infinity>() > opts.stationarity_tol * gscale) {
                    stationary = false;
                    if (lp_mode) {
                        p = -Z * gz;
                        double pn = p.lpNorm<Eigen::Infinity>();
                        if (pn > 0) p /= pn;
                    } else {
                        Eigen::MatrixXd Hz = Z.transpose() * Q * Z;
                        Eigen::LLT<Eigen::MatrixXd> llt(Hz);
                        Eigen::VectorXd pz;
                        if (llt.info() == Eigen::Success) {
                            pz = llt.solve(-gz);
                        } else {
                            Hz.diagonal().array() += 1e-12 + 1e-12 * Hz.diagonal().cwiseAbs().maxCoeff();
                            Eigen::LDLT<Eigen::MatrixXd> ldlt(Hz);
                            if (ldlt.info() != Eigen::Success) {
                                res.status = Status::NumericalFailure;
                                res.x = x;
                                res.objective = objective_of({Q, c, G, h}, x);
                                res.active = W.rows;
                                return res;
                            }
                            pz = ldlt.solve(-gz);
                        }
                        p = Z * pz;
                        alpha_cap = 1.0;  // Newton step lands on the subspace minimum
                        if (g.dot(p) > -1e-14 * gscale * (1.0 + p.norm())) {
                            stationary = true;  // direction lost to roundoff; fall back to multipliers
                        }
                    }
                }
            }

            if (stationary) {
                // multipliers for the working rows: At * lambda = -g
                Eigen::VectorXd lambda =
                    (w > 0) ? qr.solve(-g).eval() : Eigen::VectorXd();
                int worst = -1;
                double worst_val = -opts.multiplier_tol * gscale;
                for (Eigen::Index k = 0; k < w; ++k) {
                    if (lambda(k) < worst_val) {
                        worst_val = lambda(k);
                        worst = static_cast<int>(k);
                    }
                }
                if (worst < 0) {
                    res.status = Status::Optimal;
                    res.x = x;
                    res.objective = objective_of({Q, c, G, h}, x);
                    res.active = W.rows;
                    return res;
                }
                W.remove_at(static_cast<std::size_t>(worst));
                continue;
            }

            // ratio test over rows outside the working set
            double alpha_block = kInf;
            int blocker = -1;
            for (int r = 0; r < m; ++r) {
                if (W.contains(r)) continue;
                double gp = G.row(r) * p;
                double rsc = 1.0 + std::abs(h(r));
                if (gp <= 1e-12 * (1.0 + std::abs(gp))) continue;
                double slack = h(r) - G.row(r) * x;
                double a = slack / gp;
                if (a < -opts.feas_tol * rsc / gp) a = 0.0;
                if (a < 0) a = 0.0;
                if (a < alpha_block - 1e-14) {
                    alpha_block = a;
                    blocker = r;
                }
            }

            double alpha = std::min(alpha_cap, alpha_block);
            if (!std::isfinite(alpha)) {
                res.status = Status::Unbounded;
                res.x = x;
                res.objective = -kInf;
                res.active = W.rows;
                return res;
            }
            x += alpha * p;
            if (blocker >= 0 && alpha_block <= alpha_cap) {
                W.add(blocker);
            }
        }

        res.status = Status::IterLimit;
        res.x = x;
        res.objective = objective_of({Q, c, G, h}, x);
        res.active = W.rows;
        return res;
    }
};

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterLimit: return "iter_limit";
        case Status::NumericalFailure: return "numerical_failure";
    }
    return "?";
}

Result find_feasible(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                     const Options& opts, const Eigen::VectorXd* start) {
    const Eigen::Index d = G.cols();
    const Eigen::Index m = G.rows();
    Eigen::VectorXd x0 = start ? *start : Eigen::VectorXd::Zero(d);

    double viol = 0.0;
    for (Eigen::Index r = 0; r < m; ++r)
        viol = std::max(viol, G.row(r) * x0 - h(r));
    Result res;
    if (viol <= opts.feas_tol) {
        res.status = Status::Optimal;
        res.x = x0;
        res.objective = 0.0;
        return res;
    }

    // single artificial variable t >= max violation; minimize t
    Eigen::MatrixXd Ga(m + 1, d + 1);
    Ga.setZero();
    Ga.topLeftCorner(m, d) = G;
    Ga.col(d).head(m).setConstant(-1.0);
    Ga(m, d) = -1.0;  // t >= 0
    Eigen::VectorXd ha(m + 1);
    ha.head(m) = h;
    ha(m) = 0.0;

    Eigen::VectorXd xa(d + 1);
    xa.head(d) = x0;
    xa(d) = viol * (1.0 + 1e-12) + 1e-13;

    Eigen::MatrixXd Qe;  // empty -> LP mode
    Eigen::VectorXd ce = Eigen::VectorXd::Zero(d + 1);
    ce(d) = 1.0;

    ActiveSetCore core{Qe, ce, Ga, ha, opts, /*lp_mode=*/true};
    Result lp = core.run(xa, {});
    if (lp.status == Status::IterLimit || lp.status == Status::NumericalFailure) {
        res.status = lp.status;
        res.x = lp.x.head(d);
        return res;
    }
    double t = lp.x(d);
    if (t <= std::max(opts.feas_tol, 1e-9)) {
        res.status = Status::Optimal;
        res.x = lp.x.head(d);
        res.objective = 0.0;
        // carry over working-set rows that refer to original constraints
        for (int r : lp.active)
            if (r < m) res.active.push_back(r);
        res.iterations = lp.iterations;
        return res;
    }
    res.status = Status::Infeasible;
    res.x = lp.x.head(d);
    res.iterations = lp.iterations;
    return res;
}

Result solve(const Program& prog, const Options& opts,
             const Eigen::VectorXd* start, const std::vector<int>* warm_active) {
    const Eigen::Index d = prog.num_vars();
    const bool has_quadratic = prog.Q.size() > 0 && prog.Q.lpNorm<Eigen::Infinity>() > 0.0;
    const bool has_linear = prog.c.lpNorm<Eigen::Infinity>() > 0.0;

    Result ph1 = find_feasible(prog.G, prog.h, opts, start);
    if (ph1.status != Status::Optimal) return ph1;

    if (!has_quadratic && !has_linear) {
        // pure feasibility problem: the phase-1 point is the answer
        ph1.objective = 0.0;
        return ph1;
    }

    Eigen::MatrixXd Qreg;
    const Eigen::MatrixXd* Quse = &prog.Q;
    bool lp_mode = !has_quadratic;
    if (has_quadratic) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prog.Q, Eigen::EigenvaluesOnly);
        if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() < 1e-12) {
            Qreg = prog.Q;
            Qreg.diagonal().array() += opts.regularization;
            Quse = &Qreg;
        }
    }

    std::vector<int> warm = ph1.active;
    if (warm_active)
        warm.insert(warm.begin(), warm_active->begin(), warm_active->end());

    Eigen::MatrixXd Qempty;
    ActiveSetCore core{lp_mode ? Qempty : *Quse, prog.c, prog.G, prog.h, opts, lp_mode};
    Result res = core.run(ph1.x, warm);
    if (res.status == Status::Optimal || res.status == Status::IterLimit) {
        res.objective = objective_of(prog, res.x);  // report with the unregularized objective
    }
    (void)d;
    return res;
}

}  // namespace hmpc::qp
