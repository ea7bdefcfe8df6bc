#include "hmpc/mpc.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hmpc::mpc {

namespace {

constexpr double kTerminalSlack = 1e-7;

Eigen::MatrixXd resolve_weight(const Eigen::MatrixXd& Q, Eigen::Index dim,
                               const char* name) {
    if (Q.size() == 0) return Eigen::MatrixXd::Zero(dim, dim);
    if (Q.rows() == 1 && Q.cols() == 1 && dim != 1)
        return Q(0, 0) * Eigen::MatrixXd::Identity(dim, dim);
    if (Q.rows() != dim || Q.cols() != dim)
        throw std::invalid_argument(std::string(name) + ": weight has wrong dimensions");
    return Q;
}

Eigen::VectorXd resolve_target(const Eigen::VectorXd& v, Eigen::Index dim,
                               const char* name) {
    if (v.size() == 0) return Eigen::VectorXd::Zero(dim);
    if (v.size() != dim)
        throw std::invalid_argument(std::string(name) + ": target has wrong dimensions");
    return v;
}

void require_psd(const Eigen::MatrixXd& Q, const char* name) {
    if (Q.size() == 0) return;
    if ((Q - Q.transpose()).lpNorm<Eigen::Infinity>() > 1e-9)
        throw std::invalid_argument(std::string(name) + ": weight not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() < -1e-10)
        throw std::invalid_argument(std::string(name) + ": weight not positive semidefinite");
}

}  // namespace

const char* to_string(Variant v) {
    switch (v) {
        case Variant::TerminalEquality: return "terminal-equality";
        case Variant::LyapunovOptimal: return "lyapunov-optimal";
        case Variant::LyapunovFeasible: return "lyapunov-feasible";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "terminal-equality" || s == "terminal") return Variant::TerminalEquality;
    if (s == "lyapunov-optimal") return Variant::LyapunovOptimal;
    if (s == "lyapunov-feasible") return Variant::LyapunovFeasible;
    throw std::invalid_argument("unknown controller variant: " + s);
}

void validate_spec(const ControllerSpec& spec, const mld::Model& model) {
    if (spec.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    require_psd(spec.Q1, "Q1");
    require_psd(spec.Q2, "Q2");
    require_psd(spec.Q3, "Q3");
    require_psd(spec.Q4, "Q4");
    require_psd(spec.Q5, "Q5");
    const bool lyapunov = spec.variant != Variant::TerminalEquality;
    if (lyapunov) {
        if (!spec.certificate.has_value())
            throw std::invalid_argument("Lyapunov variants require a certificate");
        if (spec.certificate->dim() != model.dims.n())
            throw std::invalid_argument("certificate dimension does not match the model");
    }
}

PredictionMaps build_prediction(const mld::Model& model, int N) {
    if (N < 1) throw std::invalid_argument("build_prediction: N must be at least 1");
    const auto& dm = model.dims;
    PredictionMaps maps;
    maps.N = N;
    maps.m = dm.m();
    maps.r_l = dm.r_l;
    maps.r_c = dm.r_c;
    const int d = maps.decision_dim();
    const int n = dm.n();
    const int p = dm.p();

    maps.state_x.resize(static_cast<std::size_t>(N) + 1);
    maps.state_u.resize(static_cast<std::size_t>(N) + 1);
    maps.state_x[0] = Eigen::MatrixXd::Identity(n, n);
    maps.state_u[0] = Eigen::MatrixXd::Zero(n, d);
    for (int k = 0; k < N; ++k) {
        maps.state_x[static_cast<std::size_t>(k) + 1] = model.A * maps.state_x[static_cast<std::size_t>(k)];
        Eigen::MatrixXd Su = model.A * maps.state_u[static_cast<std::size_t>(k)];
        Su.middleCols(maps.u_offset(k), maps.m) += model.B1;
        if (maps.r_l > 0) Su.middleCols(maps.delta_offset(k), maps.r_l) += model.B2;
        if (maps.r_c > 0) Su.middleCols(maps.z_offset(k), maps.r_c) += model.B3;
        maps.state_u[static_cast<std::size_t>(k) + 1] = std::move(Su);
    }

    maps.out_x.resize(static_cast<std::size_t>(N));
    maps.out_u.resize(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        maps.out_x[static_cast<std::size_t>(k)] = model.C * maps.state_x[static_cast<std::size_t>(k)];
        Eigen::MatrixXd Ou = model.C * maps.state_u[static_cast<std::size_t>(k)];
        if (p > 0) {
            Ou.middleCols(maps.u_offset(k), maps.m) += model.D1;
            if (maps.r_l > 0) Ou.middleCols(maps.delta_offset(k), maps.r_l) += model.D2;
            if (maps.r_c > 0) Ou.middleCols(maps.z_offset(k), maps.r_c) += model.D3;
        }
        maps.out_u[static_cast<std::size_t>(k)] = std::move(Ou);
    }
    return maps;
}

CostTerms build_cost(const ControllerSpec& spec, const mld::Model& model, int N) {
    const auto& dm = model.dims;
    PredictionMaps maps = build_prediction(model, N);
    const int d = maps.decision_dim();
    const int n = dm.n();

    Eigen::MatrixXd Q1 = resolve_weight(spec.Q1, dm.m(), "Q1");
    Eigen::MatrixXd Q2 = resolve_weight(spec.Q2, dm.r_l, "Q2");
    Eigen::MatrixXd Q3 = resolve_weight(spec.Q3, dm.r_c, "Q3");
    Eigen::MatrixXd Q4 = resolve_weight(spec.Q4, n, "Q4");
    Eigen::MatrixXd Q5 = resolve_weight(spec.Q5, dm.p(), "Q5");
    Eigen::VectorXd u_e = resolve_target(spec.u_e, dm.m(), "u_e");
    Eigen::VectorXd delta_e = resolve_target(spec.delta_e, dm.r_l, "delta_e");
    Eigen::VectorXd z_e = resolve_target(spec.z_e, dm.r_c, "z_e");
    Eigen::VectorXd x_e = resolve_target(spec.x_e, n, "x_e");
    Eigen::VectorXd y_e = resolve_target(spec.y_e, dm.p(), "y_e");

    CostTerms cost;
    Eigen::MatrixXd Hhat = Eigen::MatrixXd::Zero(d, d);
    cost.F = Eigen::MatrixXd::Zero(n, d);
    cost.f0 = Eigen::VectorXd::Zero(d);
    cost.Kxx = Eigen::MatrixXd::Zero(n, n);
    cost.kx = Eigen::VectorXd::Zero(n);
    cost.k0 = 0.0;

    // one weighted square ||M U + Cx x - tgt||_Q^2; Cx may be empty (zero)
    auto add_term = [&](const Eigen::MatrixXd& Q, const Eigen::MatrixXd& M,
                        const Eigen::MatrixXd& Cx, const Eigen::VectorXd& tgt) {
        if (Q.size() == 0 || Q.lpNorm<Eigen::Infinity>() == 0.0) return;
        Eigen::MatrixXd QM = Q * M;
        Hhat.noalias() += M.transpose() * QM;
        cost.f0.noalias() -= 2.0 * QM.transpose() * tgt;
        cost.k0 += tgt.dot(Q * tgt);
        if (Cx.size() > 0) {
            cost.F.noalias() += 2.0 * Cx.transpose() * QM;
            cost.Kxx.noalias() += Cx.transpose() * Q * Cx;
            cost.kx.noalias() -= 2.0 * Cx.transpose() * Q * tgt;
        }
    };

    const Eigen::MatrixXd empty;
    for (int k = 0; k < N; ++k) {
        if (Q1.lpNorm<Eigen::Infinity>() > 0.0) {
            Eigen::MatrixXd Su = Eigen::MatrixXd::Zero(dm.m(), d);
            Su.middleCols(maps.u_offset(k), dm.m()).setIdentity();
            add_term(Q1, Su, empty, u_e);
        }
        if (dm.r_l > 0 && Q2.lpNorm<Eigen::Infinity>() > 0.0) {
            Eigen::MatrixXd Sd = Eigen::MatrixXd::Zero(dm.r_l, d);
            Sd.middleCols(maps.delta_offset(k), dm.r_l).setIdentity();
            add_term(Q2, Sd, empty, delta_e);
        }
        if (dm.r_c > 0 && Q3.lpNorm<Eigen::Infinity>() > 0.0) {
            Eigen::MatrixXd Sz = Eigen::MatrixXd::Zero(dm.r_c, d);
            Sz.middleCols(maps.z_offset(k), dm.r_c).setIdentity();
            add_term(Q3, Sz, empty, z_e);
        }
        if (Q4.lpNorm<Eigen::Infinity>() > 0.0) {
            if (k == 0) {
                // x(t|t) is a parameter: pure constant contribution
                cost.Kxx.noalias() += Q4;
                cost.kx.noalias() -= 2.0 * Q4 * x_e;
                cost.k0 += x_e.dot(Q4 * x_e);
            } else {
                add_term(Q4, maps.state_u[static_cast<std::size_t>(k)],
                         maps.state_x[static_cast<std::size_t>(k)], x_e);
            }
        }
        if (dm.p() > 0 && Q5.lpNorm<Eigen::Infinity>() > 0.0) {
            add_term(Q5, maps.out_u[static_cast<std::size_t>(k)],
                     maps.out_x[static_cast<std::size_t>(k)], y_e);
        }
    }
    cost.H = 2.0 * Hhat;
    return cost;
}

Eigen::VectorXd CondensedMiqp::rhs_at(const Eigen::VectorXd& x) const {
    Eigen::VectorXd rhs = phi0 + phiX * x;
    if (lyap_row_count > 0 && cert.has_value()) {
        double scalar = lyap::v_eval(*cert, x) - cert->gamma * x.lpNorm<Eigen::Infinity>();
        rhs.segment(lyap_row_begin, lyap_row_count).array() += scalar;
    }
    return rhs;
}

miqp::Problem CondensedMiqp::problem_at(const Eigen::VectorXd& x) const {
    miqp::Problem p;
    p.H = H;
    p.f = F.transpose() * x + f0;
    p.Phi = Phi;
    p.phi = rhs_at(x);
    p.binary = binary;
    return p;
}

CondensedMiqp attach_constraints(const ControllerSpec& spec, const mld::Model& model,
                                 int N, const Eigen::VectorXd& x_t) {
    validate_spec(spec, model);
    const auto& dm = model.dims;
    PredictionMaps maps = build_prediction(model, N);
    const int d = maps.decision_dim();
    const int n = dm.n();
    const bool lyapunov = spec.variant != Variant::TerminalEquality;

    const int model_rows = N * dm.q_e;
    const int terminal_rows = lyapunov ? 0 : 2 * n;
    const int lyap_rows = lyapunov ? 2 * static_cast<int>(spec.certificate->rows()) : 0;
    const int total = model_rows + terminal_rows + lyap_rows;

    CondensedMiqp out;
    CostTerms cost = build_cost(spec, model, N);
    out.H = std::move(cost.H);
    out.F = std::move(cost.F);
    out.f0 = std::move(cost.f0);
    out.Kxx = std::move(cost.Kxx);
    out.kx = std::move(cost.kx);
    out.k0 = cost.k0;

    out.Phi = Eigen::MatrixXd::Zero(total, d);
    out.phi0 = Eigen::VectorXd::Zero(total);
    out.phiX = Eigen::MatrixXd::Zero(total, n);

    // replicated model rows, one block per horizon step
    for (int k = 0; k < N; ++k) {
        const int r0 = k * dm.q_e;
        if (dm.q_e == 0) break;
        Eigen::MatrixXd block = -model.E4 * maps.state_u[static_cast<std::size_t>(k)];
        block.middleCols(maps.u_offset(k), dm.m()) -= model.E1;
        if (dm.r_l > 0) block.middleCols(maps.delta_offset(k), dm.r_l) += model.E2;
        if (dm.r_c > 0) block.middleCols(maps.z_offset(k), dm.r_c) += model.E3;
        out.Phi.middleRows(r0, dm.q_e) = block;
        out.phi0.segment(r0, dm.q_e) = model.E5;
        out.phiX.middleRows(r0, dm.q_e) = model.E4 * maps.state_x[static_cast<std::size_t>(k)];
    }

    if (!lyapunov) {
        Eigen::VectorXd x_e = resolve_target(spec.x_e, n, "x_e");
        const int r0 = model_rows;
        out.Phi.middleRows(r0, n) = maps.state_u[static_cast<std::size_t>(N)];
        out.Phi.middleRows(r0 + n, n) = -maps.state_u[static_cast<std::size_t>(N)];
        out.phi0.segment(r0, n) = x_e.array() + kTerminalSlack;
        out.phi0.segment(r0 + n, n) = (-x_e).array() + kTerminalSlack;
        out.phiX.middleRows(r0, n) = -maps.state_x[static_cast<std::size_t>(N)];
        out.phiX.middleRows(r0 + n, n) = maps.state_x[static_cast<std::size_t>(N)];
        for (int i = 0; i < 2 * n; ++i) out.terminal_rows.push_back(r0 + i);
    } else {
        lyap::DecreaseRows rows = lyap::decrease_rows(*spec.certificate, model, x_t);
        const int r0 = model_rows;
        out.Phi.middleRows(r0, lyap_rows).middleCols(maps.u_offset(0), dm.m()) = rows.G_u;
        if (dm.r_l > 0)
            out.Phi.middleRows(r0, lyap_rows).middleCols(maps.delta_offset(0), dm.r_l) = rows.G_delta;
        if (dm.r_c > 0)
            out.Phi.middleRows(r0, lyap_rows).middleCols(maps.z_offset(0), dm.r_c) = rows.G_z;
        out.phiX.middleRows(r0, lyap_rows) = -rows.W;
        out.lyap_row_begin = r0;
        out.lyap_row_count = lyap_rows;
        out.cert = spec.certificate;
    }

    // binaries: every delta plus any binary input component per step
    for (int k = 0; k < N; ++k)
        for (int i : model.binary_input_indices) out.binary.push_back(maps.u_offset(k) + i);
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < dm.r_l; ++j) out.binary.push_back(maps.delta_offset(k) + j);
    std::sort(out.binary.begin(), out.binary.end());
    return out;
}

Controller::Controller(ControllerSpec spec, mld::Model model)
    : spec_(std::move(spec)), model_(std::move(model)) {
    validate_spec(spec_, model_);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model_.dims.n());
    condensed_ = attach_constraints(spec_, model_, spec_.horizon, x0);
}

ControlResult Controller::solve_step(const Eigen::VectorXd& x_t) const {
    if (x_t.size() != model_.dims.n())
        throw std::invalid_argument("solve_step: state dimension mismatch");
    miqp::Problem prob = condensed_.problem_at(x_t);
    miqp::SolverOpts opts = spec_.solver;
    opts.mode = spec_.variant == Variant::LyapunovFeasible ? miqp::Mode::FirstFeasible
                                                           : miqp::Mode::Optimal;
    miqp::Solution sol = miqp::solve(prob, opts);

    ControlResult res;
    res.status = sol.status;
    res.stats = sol.stats;
    if (sol.status != miqp::Status::Optimal && sol.status != miqp::Status::FirstFeasible)
        return res;

    const auto& dm = model_.dims;
    PredictionMaps maps;  // offsets only
    maps.N = spec_.horizon;
    maps.m = dm.m();
    maps.r_l = dm.r_l;
    maps.r_c = dm.r_c;
    res.U = sol.U;
    res.u = sol.U.segment(maps.u_offset(0), dm.m());
    res.delta = sol.U.segment(maps.delta_offset(0), dm.r_l);
    for (Eigen::Index i = 0; i < res.delta.size(); ++i) res.delta(i) = std::round(res.delta(i));
    res.z = sol.U.segment(maps.z_offset(0), dm.r_c);
    double constant = x_t.dot(condensed_.Kxx * x_t) + condensed_.kx.dot(x_t) + condensed_.k0;
    res.objective = 0.5 * sol.U.dot(condensed_.H * sol.U) +
                    x_t.dot(condensed_.F * sol.U) + condensed_.f0.dot(sol.U) + constant;
    return res;
}

ControlResult solve_step(const ControllerSpec& spec, const mld::Model& model,
                         const Eigen::VectorXd& x_t) {
    Controller ctrl(spec, model);
    return ctrl.solve_step(x_t);
}

ClosedLoopLog run_rhc(const ControllerSpec& spec, const mld::Model& model,
                      const Eigen::VectorXd& x0, int T) {
    if (T < 1) throw std::invalid_argument("run_rhc: T must be at least 1");
    Controller ctrl(spec, model);
    ClosedLoopLog log;
    log.states.push_back(x0);

    auto v_of = [&](const Eigen::VectorXd& x) {
        return spec.certificate ? lyap::v_eval(*spec.certificate, x)
                                : x.lpNorm<Eigen::Infinity>();
    };

    for (int t = 0; t < T; ++t) {
        const Eigen::VectorXd& x = log.states.back();
        ControlResult res = ctrl.solve_step(x);
        StepRecord rec;
        rec.status = res.status;
        rec.nodes = res.stats.nodes;
        rec.qp_solves = res.stats.qp_solves;
        rec.ms = res.stats.wall_ms;
        rec.V = v_of(x);
        if (res.status != miqp::Status::Optimal && res.status != miqp::Status::FirstFeasible) {
            log.steps.push_back(std::move(rec));
            log.infeasible_step = t;
            break;
        }
        rec.u = res.u;
        rec.delta = res.delta;
        rec.z = res.z;
        rec.J = res.objective;
        rec.y = model.C * x + model.D1 * res.u + model.D2 * res.delta + model.D3 * res.z;
        Eigen::VectorXd x_next =
            model.A * x + model.B1 * res.u + model.B2 * res.delta + model.B3 * res.z;
        log.steps.push_back(std::move(rec));
        log.states.push_back(std::move(x_next));
    }
    return log;
}

std::optional<int> settling_time(const std::vector<Eigen::VectorXd>& states,
                                 double thresh) {
    std::optional<int> first;
    for (std::size_t t = 0; t < states.size(); ++t) {
        if (states[t].lpNorm<Eigen::Infinity>() <= thresh) {
            if (!first) first = static_cast<int>(t);
        } else {
            first.reset();
        }
    }
    return first;
}

std::string ClosedLoopLog::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    const Eigen::Index n = states.empty() ? 0 : states[0].size();
    Eigen::Index m = 0, rl = 0, rc = 0;
    for (const auto& s : steps) {
        if (s.status == miqp::Status::Optimal || s.status == miqp::Status::FirstFeasible) {
            m = s.u.size();
            rl = s.delta.size();
            rc = s.z.size();
            break;
        }
    }
    os << "t";
    for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
    for (Eigen::Index i = 1; i <= m; ++i) os << ",u" << i;
    for (Eigen::Index i = 1; i <= rl; ++i) os << ",delta" << i;
    for (Eigen::Index i = 1; i <= rc; ++i) os << ",z" << i;
    os << ",V,J,status,nodes,ms\n";
    for (std::size_t t = 0; t < steps.size(); ++t) {
        const auto& s = steps[t];
        os << t;
        for (Eigen::Index i = 0; i < n; ++i) os << "," << states[t](i);
        for (Eigen::Index i = 0; i < m; ++i) os << "," << (s.u.size() > i ? s.u(i) : 0.0);
        for (Eigen::Index i = 0; i < rl; ++i) os << "," << (s.delta.size() > i ? s.delta(i) : 0.0);
        for (Eigen::Index i = 0; i < rc; ++i) os << "," << (s.z.size() > i ? s.z(i) : 0.0);
        os << "," << s.V << "," << s.J << "," << miqp::to_string(s.status) << "," << s.nodes
           << "," << s.ms << "\n";
    }
    return os.str();
}

namespace {

nlohmann::json weight_to_json(const Eigen::MatrixXd& Q) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < Q.cols(); ++j) row.push_back(Q(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd weight_from_json(const nlohmann::json& j) {
    if (j.is_number()) {
        Eigen::MatrixXd Q(1, 1);
        Q(0, 0) = j.get<double>();
        return Q;
    }
    Eigen::MatrixXd Q(j.size(), j.size() > 0 ? j.at(0).size() : 0);
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
        for (Eigen::Index k = 0; k < Q.cols(); ++k) Q(i, k) = j.at(i).at(k).get<double>();
    return Q;
}

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
    return v;
}

}  // namespace

std::string spec_to_json(const ControllerSpec& spec) {
    nlohmann::json j;
    j["variant"] = to_string(spec.variant);
    j["N"] = spec.horizon;
    j["Q1"] = weight_to_json(spec.Q1);
    j["Q2"] = weight_to_json(spec.Q2);
    j["Q3"] = weight_to_json(spec.Q3);
    j["Q4"] = weight_to_json(spec.Q4);
    j["Q5"] = weight_to_json(spec.Q5);
    j["equilibrium"] = {{"u_e", vec_to_json(spec.u_e)},
                        {"delta_e", vec_to_json(spec.delta_e)},
                        {"z_e", vec_to_json(spec.z_e)},
                        {"x_e", vec_to_json(spec.x_e)},
                        {"y_e", vec_to_json(spec.y_e)}};
    if (spec.certificate)
        j["certificate"] = nlohmann::json::parse(lyap::to_json(*spec.certificate));
    nlohmann::json solver;
    solver["integrality_tol"] = spec.solver.integrality_tol;
    solver["gap_abs"] = spec.solver.gap_abs;
    solver["node_limit"] = spec.solver.node_limit;
    solver["qp_tol"] = spec.solver.qp_tol;
    solver["deterministic"] = spec.solver.deterministic;
    solver["branching"] =
        spec.solver.branching == miqp::Branching::MostFractional ? "most_fractional" : "first_index";
    j["solver"] = solver;
    return j.dump(2);
}

ControllerSpec spec_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ControllerSpec spec;
    spec.variant = variant_from_string(j.at("variant").get<std::string>());
    spec.horizon = j.at("N").get<int>();
    if (j.contains("Q1")) spec.Q1 = weight_from_json(j.at("Q1"));
    if (j.contains("Q2")) spec.Q2 = weight_from_json(j.at("Q2"));
    if (j.contains("Q3")) spec.Q3 = weight_from_json(j.at("Q3"));
    if (j.contains("Q4")) spec.Q4 = weight_from_json(j.at("Q4"));
    if (j.contains("Q5")) spec.Q5 = weight_from_json(j.at("Q5"));
    if (j.contains("equilibrium")) {
        const auto& e = j.at("equilibrium");
        if (e.contains("u_e")) spec.u_e = vec_from_json(e.at("u_e"));
        if (e.contains("delta_e")) spec.delta_e = vec_from_json(e.at("delta_e"));
        if (e.contains("z_e")) spec.z_e = vec_from_json(e.at("z_e"));
        if (e.contains("x_e")) spec.x_e = vec_from_json(e.at("x_e"));
        if (e.contains("y_e")) spec.y_e = vec_from_json(e.at("y_e"));
    }
    if (j.contains("certificate") && !j.at("certificate").is_null())
        spec.certificate = lyap::certificate_from_json(j.at("certificate").dump());
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        spec.solver.integrality_tol = s.value("integrality_tol", spec.solver.integrality_tol);
        spec.solver.gap_abs = s.value("gap_abs", spec.solver.gap_abs);
        spec.solver.node_limit = s.value("node_limit", spec.solver.node_limit);
        spec.solver.qp_tol = s.value("qp_tol", spec.solver.qp_tol);
        spec.solver.deterministic = s.value("deterministic", spec.solver.deterministic);
        if (s.contains("branching"))
            spec.solver.branching = s.at("branching") == "first_index"
                                        ? miqp::Branching::FirstIndex
                                        : miqp::Branching::MostFractional;
    }
    return spec;
}

}  // namespace hmpc::mpc
