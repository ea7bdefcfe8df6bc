#include "hmpc/lyapunov.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hmpc::lyap {

namespace {

double inf_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& Y) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double tol = 1e-12 * sv(0) * std::max(Y.rows(), Y.cols());
    Eigen::VectorXd inv = sv;
    for (Eigen::Index i = 0; i < inv.size(); ++i)
        inv(i) = sv(i) > tol ? 1.0 / sv(i) : 0.0;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_radius(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Removes rows that cannot support the unit ball {x : ||Yx||_inf <= 1}:
// duplicates/parallel rows dominated by a longer one, and rows too short to
// ever reach level 1 on the set spanned by the others.
Eigen::MatrixXd reduce_rows(const Eigen::MatrixXd& Yin) {
    std::vector<Eigen::RowVectorXd> rows;
    for (Eigen::Index i = 0; i < Yin.rows(); ++i) {
        Eigen::RowVectorXd r = Yin.row(i);
        if (r.norm() < 1e-14) continue;
        bool dominated = false;
        for (auto& keep : rows) {
            double cosang = std::abs(r.dot(keep)) / (r.norm() * keep.norm());
            if (cosang > 1.0 - 1e-12) {
                if (r.norm() <= keep.norm()) {
                    dominated = true;
                } else {
                    keep = r;  // longer parallel row supersedes
                    dominated = true;
                }
                break;
            }
        }
        if (!dominated) rows.push_back(r);
    }
    Eigen::MatrixXd Y(rows.size(), Yin.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) Y.row(static_cast<Eigen::Index>(i)) = rows[i];

    // short-row pruning: |r x| <= ||r||_1 ||x||_inf <= ||r||_1 ||pinv(rest)||_inf
    if (Y.rows() > Y.cols()) {
        for (Eigen::Index i = Y.rows() - 1; i >= 0 && Y.rows() > Y.cols(); --i) {
            Eigen::MatrixXd rest(Y.rows() - 1, Y.cols());
            rest.topRows(i) = Y.topRows(i);
            rest.bottomRows(Y.rows() - 1 - i) = Y.bottomRows(Y.rows() - 1 - i);
            if (numerical_rank(rest) < Y.cols()) continue;
            double reach = Y.row(i).cwiseAbs().sum() * inf_norm(pseudo_inverse(rest));
            if (reach <= 1.0 - 1e-9) Y = rest;
        }
    }
    return Y;
}

}  // namespace

double v_eval(const Certificate& cert, const Eigen::VectorXd& x) {
    return (cert.Y * x).lpNorm<Eigen::Infinity>();
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& Y) {
    if (Y.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y);
    const auto& sv = svd.singularValues();
    double tol = 1e-10 * sv(0);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

CheckResult check_certificate(const Eigen::MatrixXd& Y, double gamma) {
    CheckResult res;
    if (!(gamma > 0)) {
        res.violations.push_back("gamma must be positive");
        return res;
    }
    const double norm = inf_norm(Y);
    std::ostringstream os;
    if (norm < gamma) {
        os.str("");
        os << "||Y||_inf = " << norm << " is below gamma = " << gamma;
        res.violations.push_back(os.str());
    }
    if (norm > 1.0 + gamma) {
        os.str("");
        os << "||Y||_inf = " << norm << " exceeds 1 + gamma = " << 1.0 + gamma;
        res.violations.push_back(os.str());
    }
    if (Y.rows() < Y.cols() || numerical_rank(Y) < Y.cols()) {
        res.violations.push_back("Y is rank deficient");
    }
    if (res.violations.empty()) {
        Certificate c;
        c.Y = Y;
        c.gamma = gamma;
        c.theta = norm - gamma;
        res.certificate = std::move(c);
    }
    return res;
}

DecreaseRows decrease_rows(const Certificate& cert, const mld::Model& model,
                           const Eigen::VectorXd& x_t) {
    if (x_t.size() != cert.dim() || model.dims.n() != cert.dim())
        throw std::invalid_argument("decrease_rows: dimension mismatch");
    const Eigen::Index c = cert.rows();

    DecreaseRows out;
    out.rhs_scalar = v_eval(cert, x_t) - cert.gamma * x_t.lpNorm<Eigen::Infinity>();
    out.rhs_negative = out.rhs_scalar < 0.0;

    Eigen::MatrixXd YA = cert.Y * model.A;
    Eigen::MatrixXd YB1 = cert.Y * model.B1;
    Eigen::MatrixXd YB2 = cert.Y * model.B2;
    Eigen::MatrixXd YB3 = cert.Y * model.B3;

    out.G_u.resize(2 * c, model.dims.m());
    out.G_delta.resize(2 * c, model.dims.r_l);
    out.G_z.resize(2 * c, model.dims.r_c);
    out.W.resize(2 * c, model.dims.n());
    out.G_u << YB1, -YB1;
    out.G_delta << YB2, -YB2;
    out.G_z << YB3, -YB3;
    out.W << YA, -YA;
    out.rhs = Eigen::VectorXd::Constant(2 * c, out.rhs_scalar) - out.W * x_t;
    return out;
}

SynthesisResult synthesize_Y(const Eigen::MatrixXd& A, double gamma,
                             const SynthesisOptions& opts) {
    SynthesisResult res;
    if (A.rows() != A.cols() || A.rows() == 0) {
        res.message = "A must be square and nonempty";
        return res;
    }
    if (!(gamma > 0)) {
        res.message = "gamma must be positive";
        return res;
    }
    const double theta = opts.theta_target > 0 ? opts.theta_target : 1.0 - 0.99 * gamma;
    if (theta <= 0.0 || theta > 1.0) {
        res.message = "contraction target out of (0,1]; gamma too large";
        return res;
    }
    const double rho = spectral_radius(A);
    if (rho >= 1.0) {
        std::ostringstream os;
        os << "spectral radius " << rho << " is not below one";
        res.message = os.str();
        return res;
    }

    const Eigen::Index n = A.rows();
    Eigen::MatrixXd Y = opts.Y0.size() > 0 ? opts.Y0 : Eigen::MatrixXd::Identity(n, n);
    if (Y.cols() != n) {
        res.message = "Y0 has wrong column count";
        return res;
    }

    for (int it = 0; it <= opts.max_iters; ++it) {
        res.iterations = it;
        if (numerical_rank(Y) == n) {
            double lam = inf_norm(Y * A * pseudo_inverse(Y));
            if (lam <= theta) {
                double scale = (gamma + theta) / inf_norm(Y);
                CheckResult chk = check_certificate(scale * Y, gamma);
                if (chk.ok()) {
                    res.certificate = std::move(chk.certificate);
                    return res;
                }
            }
        }
        if (it == opts.max_iters) break;
        Eigen::MatrixXd aug(Y.rows() * 2, n);
        aug << Y, Y * A / theta;
        Y = reduce_rows(aug);
        if (Y.rows() > opts.max_rows) {
            res.message = "row budget exhausted before the contraction certified";
            return res;
        }
    }
    res.message = "no contraction certificate after max_iters augmentation rounds";
    return res;
}

DecreaseReport check_decrease_trajectory(const std::vector<Eigen::VectorXd>& states,
                                         const Certificate& cert, double tol) {
    if (states.size() < 2)
        throw std::invalid_argument("check_decrease_trajectory: need at least two states");
    DecreaseReport rep;
    for (std::size_t t = 0; t + 1 < states.size(); ++t) {
        double lhs = v_eval(cert, states[t + 1]);
        double rhs = v_eval(cert, states[t]) - cert.gamma * states[t].lpNorm<Eigen::Infinity>();
        bool ok = lhs <= rhs + tol;
        rep.step_ok.push_back(ok);
        rep.all_ok = rep.all_ok && ok;
    }
    const bool identity = cert.Y.rows() == cert.Y.cols() &&
                          (cert.Y - Eigen::MatrixXd::Identity(cert.Y.rows(), cert.Y.cols()))
                                  .lpNorm<Eigen::Infinity>() < 1e-12;
    if (identity) {
        std::vector<bool> env;
        double v0 = v_eval(cert, states[0]);
        double bound = v0;
        for (std::size_t t = 0; t < states.size(); ++t) {
            bool ok = v_eval(cert, states[t]) <= bound + tol;
            env.push_back(ok);
            rep.envelope_all_ok = rep.envelope_all_ok && ok;
            bound *= cert.theta;
        }
        rep.envelope_ok = std::move(env);
    }
    return rep;
}

std::optional<EnvelopeFit> fit_envelope(const std::vector<Eigen::VectorXd>& states,
                                        int t0, double alpha_max, double beta_step) {
    if (t0 < 0 || t0 + 1 >= static_cast<int>(states.size()))
        throw std::invalid_argument("fit_envelope: t0 out of range");
    std::vector<double> norms;
    for (std::size_t t = static_cast<std::size_t>(t0); t < states.size(); ++t)
        norms.push_back(states[t].lpNorm<Eigen::Infinity>());
    if (norms[0] <= 0.0)
        throw std::invalid_argument("fit_envelope: ||x(t0)|| must be nonzero");

    for (double beta = beta_step; beta < 1.0 - 0.5 * beta_step; beta += beta_step) {
        double alpha_req = 0.0;
        double pow_beta = 1.0;
        bool ok = true;
        for (std::size_t k = 0; k < norms.size(); ++k) {
            double envelope = pow_beta * norms[0];
            if (norms[k] > 0.0 && envelope <= 0.0) { ok = false; break; }
            if (norms[k] > 0.0) alpha_req = std::max(alpha_req, norms[k] / envelope);
            pow_beta *= beta;
        }
        if (ok && alpha_req <= alpha_max) {
            EnvelopeFit fit;
            fit.alpha = std::max(alpha_req, std::numeric_limits<double>::min());
            fit.beta = beta;
            fit.t0 = t0;
            return fit;
        }
    }
    return std::nullopt;
}

std::string to_json(const Certificate& cert) {
    nlohmann::json j;
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cert.Y.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < cert.Y.cols(); ++k) row.push_back(cert.Y(i, k));
        rows.push_back(std::move(row));
    }
    j["Y"] = rows;
    j["gamma"] = cert.gamma;
    return j.dump(2);
}

Certificate certificate_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const auto& rows = j.at("Y");
    Eigen::MatrixXd Y(rows.size(), rows.size() > 0 ? rows.at(0).size() : 0);
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
        for (Eigen::Index k = 0; k < Y.cols(); ++k) Y(i, k) = rows.at(i).at(k).get<double>();
    double gamma = j.at("gamma").get<double>();
    CheckResult chk = check_certificate(Y, gamma);
    if (!chk.ok()) {
        std::string msg = "certificate rejected:";
        for (const auto& v : chk.violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }
    return *chk.certificate;
}

}  // namespace hmpc::lyap
