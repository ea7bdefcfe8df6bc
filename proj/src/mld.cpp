#include "hmpc/mld.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hmpc::mld {

namespace {

void check_shape(std::vector<std::string>& issues, const char* name,
                 const Eigen::MatrixXd& M, Eigen::Index rows, Eigen::Index cols) {
    if (M.rows() != rows || M.cols() != cols) {
        std::ostringstream os;
        os << name << ": expected " << rows << "x" << cols << ", got " << M.rows()
           << "x" << M.cols();
        issues.push_back(os.str());
    }
}

void check_indices(std::vector<std::string>& issues, const char* name,
                   const std::vector<int>& idx, int limit, int expected_count) {
    for (int i : idx)
        if (i < 0 || i >= limit) {
            std::ostringstream os;
            os << name << ": index " << i << " out of range [0," << limit << ")";
            issues.push_back(os.str());
        }
    if (static_cast<int>(idx.size()) != expected_count) {
        std::ostringstream os;
        os << name << ": " << idx.size() << " entries, dims say " << expected_count;
        issues.push_back(os.str());
    }
}

void require_binary_components(const Eigen::VectorXd& v, const std::vector<int>& idx,
                               const char* what) {
    for (int i : idx) {
        double r = std::abs(v(i) - std::round(v(i)));
        if (r > 1e-6 || v(i) < -1e-6 || v(i) > 1.0 + 1e-6)
            throw std::invalid_argument(std::string(what) +
                                        ": binary component not in {0,1}");
    }
}

}  // namespace

ValidationReport validate(const Model& model) {
    ValidationReport rep;
    const auto& d = model.dims;
    if (d.n_c < 0 || d.n_l < 0 || d.m_c < 0 || d.m_l < 0 || d.p_c < 0 || d.p_l < 0 ||
        d.r_c < 0 || d.r_l < 0 || d.q_e < 0)
        rep.issues.push_back("dims: negative count");
    if (d.n() < 1) rep.issues.push_back("dims: state dimension must be at least 1");

    check_shape(rep.issues, "A", model.A, d.n(), d.n());
    check_shape(rep.issues, "B1", model.B1, d.n(), d.m());
    check_shape(rep.issues, "B2", model.B2, d.n(), d.r_l);
    check_shape(rep.issues, "B3", model.B3, d.n(), d.r_c);
    check_shape(rep.issues, "C", model.C, d.p(), d.n());
    check_shape(rep.issues, "D1", model.D1, d.p(), d.m());
    check_shape(rep.issues, "D2", model.D2, d.p(), d.r_l);
    check_shape(rep.issues, "D3", model.D3, d.p(), d.r_c);
    check_shape(rep.issues, "E1", model.E1, d.q_e, d.m());
    check_shape(rep.issues, "E2", model.E2, d.q_e, d.r_l);
    check_shape(rep.issues, "E3", model.E3, d.q_e, d.r_c);
    check_shape(rep.issues, "E4", model.E4, d.q_e, d.n());
    if (model.E5.size() != d.q_e) {
        std::ostringstream os;
        os << "E5: expected " << d.q_e << " entries, got " << model.E5.size();
        rep.issues.push_back(os.str());
    }
    check_indices(rep.issues, "binary_state_indices", model.binary_state_indices, d.n(), d.n_l);
    check_indices(rep.issues, "binary_input_indices", model.binary_input_indices, d.m(), d.m_l);
    return rep;
}

double constraint_residual(const Model& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& delta,
                           const Eigen::VectorXd& z) {
    if (model.dims.q_e == 0) return 0.0;
    Eigen::VectorXd lhs = model.E2 * delta + model.E3 * z - model.E1 * u -
                          model.E4 * x - model.E5;
    return std::max(lhs.maxCoeff(), 0.0);
}

bool check_equilibrium(const Model& model, const EquilibriumPair& pair, double tol_eq) {
    require_binary_components(pair.x_e, model.binary_state_indices, "x_e");
    require_binary_components(pair.u_e, model.binary_input_indices, "u_e");
    for (Eigen::Index i = 0; i < pair.delta_e.size(); ++i)
        if (std::abs(pair.delta_e(i) - std::round(pair.delta_e(i))) > 1e-6)
            throw std::invalid_argument("delta_e: binary component not in {0,1}");

    Eigen::VectorXd next = model.A * pair.x_e + model.B1 * pair.u_e +
                           model.B2 * pair.delta_e + model.B3 * pair.z_e;
    double fp = (pair.x_e - next).lpNorm<Eigen::Infinity>();
    double cr = constraint_residual(model, pair.x_e, pair.u_e, pair.delta_e, pair.z_e);
    return fp <= tol_eq && cr <= tol_eq;
}

namespace {

// feasibility program over (delta, z) at fixed (x, u)
miqp::Problem aux_feasibility_problem(const Model& model, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u) {
    const int rl = model.dims.r_l, rc = model.dims.r_c;
    miqp::Problem p;
    const int d = rl + rc;
    p.H = Eigen::MatrixXd::Zero(d, d);
    p.f = Eigen::VectorXd::Zero(d);
    p.Phi.resize(model.dims.q_e, d);
    p.Phi.leftCols(rl) = model.E2;
    p.Phi.rightCols(rc) = model.E3;
    p.phi = model.E1 * u + model.E4 * x + model.E5;
    for (int i = 0; i < rl; ++i) p.binary.push_back(i);
    return p;
}

}  // namespace

StepResult step(const Model& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                const miqp::SolverOpts& solver) {
    if (x.size() != model.dims.n() || u.size() != model.dims.m())
        throw std::invalid_argument("step: dimension mismatch");
    require_binary_components(x, model.binary_state_indices, "x");
    require_binary_components(u, model.binary_input_indices, "u");

    StepResult out;
    const int rl = model.dims.r_l, rc = model.dims.r_c;
    if (rl + rc == 0) {
        if (model.dims.q_e > 0) {
            Eigen::VectorXd slack = model.E1 * u + model.E4 * x + model.E5;
            if (slack.minCoeff() < -1e-9)
                throw InfeasibleError("step: (x,u) violates constraint rows");
        }
        out.delta.resize(0);
        out.z.resize(0);
    } else {
        miqp::SolverOpts opts = solver;
        opts.mode = miqp::Mode::FirstFeasible;
        miqp::Solution sol = miqp::solve(aux_feasibility_problem(model, x, u), opts);
        if (sol.status != miqp::Status::FirstFeasible)
            throw InfeasibleError("step: no feasible auxiliaries for (x,u)");
        out.delta = sol.U.head(rl);
        for (Eigen::Index i = 0; i < out.delta.size(); ++i)
            out.delta(i) = std::round(out.delta(i));
        out.z = sol.U.tail(rc);
    }
    out.x_next = model.A * x + model.B1 * u + model.B2 * out.delta + model.B3 * out.z;
    out.y = model.C * x + model.D1 * u + model.D2 * out.delta + model.D3 * out.z;
    return out;
}

std::optional<Eigen::VectorXd> second_feasible_delta(const Model& model,
                                                     const Eigen::VectorXd& x,
                                                     const Eigen::VectorXd& u,
                                                     const Eigen::VectorXd& delta_found,
                                                     const miqp::SolverOpts& solver) {
    const int rl = model.dims.r_l;
    if (rl == 0) return std::nullopt;
    miqp::Problem p = aux_feasibility_problem(model, x, u);

    // exclusion cut: sum_{i in ones} d_i - sum_{i in zeros} d_i <= |ones| - 1
    Eigen::RowVectorXd cut = Eigen::RowVectorXd::Zero(p.num_vars());
    int ones = 0;
    for (int i = 0; i < rl; ++i) {
        if (std::round(delta_found(i)) == 1.0) {
            cut(i) = 1.0;
            ++ones;
        } else {
            cut(i) = -1.0;
        }
    }
    p.Phi.conservativeResize(p.Phi.rows() + 1, Eigen::NoChange);
    p.Phi.row(p.Phi.rows() - 1) = cut;
    p.phi.conservativeResize(p.phi.size() + 1);
    p.phi(p.phi.size() - 1) = ones - 1;

    miqp::SolverOpts opts = solver;
    opts.mode = miqp::Mode::FirstFeasible;
    miqp::Solution sol = miqp::solve(p, opts);
    if (sol.status != miqp::Status::FirstFeasible) return std::nullopt;
    Eigen::VectorXd delta = sol.U.head(rl);
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = std::round(delta(i));
    return delta;
}

Trajectory simulate_open_loop(const Model& model, const Eigen::VectorXd& x0,
                              const std::vector<Eigen::VectorXd>& inputs,
                              const miqp::SolverOpts& solver) {
    if (inputs.empty()) throw std::invalid_argument("simulate_open_loop: empty input sequence");
    Trajectory tr;
    tr.states.push_back(x0);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        try {
            StepResult s = step(model, tr.states.back(), inputs[k], solver);
            tr.inputs.push_back(inputs[k]);
            tr.deltas.push_back(s.delta);
            tr.zs.push_back(s.z);
            tr.outputs.push_back(s.y);
            tr.states.push_back(s.x_next);
        } catch (const InfeasibleError&) {
            tr.failed_step = static_cast<int>(k);
            break;
        }
    }
    return tr;
}

namespace {

nlohmann::json mat_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd mat_from(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(j.size()) && i < rows; ++i) {
        const auto& row = j.at(i);
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(row.size()) && k < cols; ++k)
            M(i, k) = row.at(k).get<double>();
    }
    // dims are the source of truth; shape mismatches surface through validate()
    if (static_cast<Eigen::Index>(j.size()) != rows && j.size() > 0) {
        Eigen::Index jr = static_cast<Eigen::Index>(j.size());
        Eigen::Index jc = static_cast<Eigen::Index>(j.at(0).size());
        Eigen::MatrixXd raw(jr, jc);
        for (Eigen::Index i = 0; i < jr; ++i)
            for (Eigen::Index k = 0; k < jc; ++k) raw(i, k) = j.at(i).at(k).get<double>();
        return raw;
    }
    return M;
}

}  // namespace

std::string to_json(const Model& model) {
    nlohmann::json j;
    j["A"] = mat_json(model.A);
    j["B1"] = mat_json(model.B1);
    j["B2"] = mat_json(model.B2);
    j["B3"] = mat_json(model.B3);
    j["C"] = mat_json(model.C);
    j["D1"] = mat_json(model.D1);
    j["D2"] = mat_json(model.D2);
    j["D3"] = mat_json(model.D3);
    j["E1"] = mat_json(model.E1);
    j["E2"] = mat_json(model.E2);
    j["E3"] = mat_json(model.E3);
    j["E4"] = mat_json(model.E4);
    nlohmann::json e5 = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.E5.size(); ++i) e5.push_back(model.E5(i));
    j["E5"] = e5;
    j["dims"] = {{"n_c", model.dims.n_c}, {"n_l", model.dims.n_l},
                 {"m_c", model.dims.m_c}, {"m_l", model.dims.m_l},
                 {"p_c", model.dims.p_c}, {"p_l", model.dims.p_l},
                 {"r_c", model.dims.r_c}, {"r_l", model.dims.r_l},
                 {"q_e", model.dims.q_e}};
    j["binary_state_indices"] = model.binary_state_indices;
    j["binary_input_indices"] = model.binary_input_indices;
    return j.dump(2);
}

Model from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Model m;
    const auto& jd = j.at("dims");
    m.dims.n_c = jd.at("n_c").get<int>();
    m.dims.n_l = jd.at("n_l").get<int>();
    m.dims.m_c = jd.at("m_c").get<int>();
    m.dims.m_l = jd.at("m_l").get<int>();
    m.dims.p_c = jd.at("p_c").get<int>();
    m.dims.p_l = jd.at("p_l").get<int>();
    m.dims.r_c = jd.at("r_c").get<int>();
    m.dims.r_l = jd.at("r_l").get<int>();
    m.dims.q_e = jd.at("q_e").get<int>();

    const auto& d = m.dims;
    m.A = mat_from(j.at("A"), d.n(), d.n());
    m.B1 = mat_from(j.at("B1"), d.n(), d.m());
    m.B2 = mat_from(j.at("B2"), d.n(), d.r_l);
    m.B3 = mat_from(j.at("B3"), d.n(), d.r_c);
    m.C = mat_from(j.at("C"), d.p(), d.n());
    m.D1 = mat_from(j.at("D1"), d.p(), d.m());
    m.D2 = mat_from(j.at("D2"), d.p(), d.r_l);
    m.D3 = mat_from(j.at("D3"), d.p(), d.r_c);
    m.E1 = mat_from(j.at("E1"), d.q_e, d.m());
    m.E2 = mat_from(j.at("E2"), d.q_e, d.r_l);
    m.E3 = mat_from(j.at("E3"), d.q_e, d.r_c);
    m.E4 = mat_from(j.at("E4"), d.q_e, d.n());
    m.E5.resize(d.q_e);
    m.E5.setZero();
    const auto& e5 = j.at("E5");
    for (Eigen::Index i = 0; i < m.E5.size() && i < static_cast<Eigen::Index>(e5.size()); ++i)
        m.E5(i) = e5.at(i).get<double>();
    m.binary_state_indices = j.value("binary_state_indices", std::vector<int>{});
    m.binary_input_indices = j.value("binary_input_indices", std::vector<int>{});
    return m;
}

}  // namespace hmpc::mld
