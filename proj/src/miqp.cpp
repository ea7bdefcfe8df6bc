#include "hmpc/miqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hmpc/qp.hpp"

namespace hmpc::miqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
    Eigen::VectorXd lb;
    Eigen::VectorXd ub;
    double bound = -kInf;  // parent relaxation objective
    int depth = 0;
    long id = 0;
    long parent = -1;
    std::vector<int> warm_active;
    Eigen::VectorXd warm_x;
};

struct NodeOrder {
    // best bound first; FIFO on ties for determinism
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

// Assembles the relaxation rows: Phi plus one row per finite bound.
// Bound rows live at fixed indices so warm active sets transfer to children.
struct RowLayout {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    Eigen::Index base_rows = 0;

    void build(const Problem& p, const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
        const Eigen::Index d = p.num_vars();
        const Eigen::Index r = p.num_rows();
        base_rows = r;
        G.resize(r + 2 * d, d);
        h.resize(r + 2 * d);
        G.topRows(r) = p.Phi;
        h.head(r) = p.phi;
        G.middleRows(r, d) = Eigen::MatrixXd::Identity(d, d);        // x <= ub
        G.middleRows(r + d, d) = -Eigen::MatrixXd::Identity(d, d);   // -x <= -lb
        h.segment(r, d) = ub;
        h.segment(r + d, d) = -lb;
    }
    void update_bounds(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub) {
        const Eigen::Index d = lb.size();
        h.segment(base_rows, d) = ub;
        h.segment(base_rows + d, d) = -lb;
    }
};

struct Relaxation {
    qp::Status status;
    Eigen::VectorXd x;
    double objective;
    std::vector<int> active;
};

class BnB {
  public:
    BnB(const Problem& p, const SolverOpts& o) : prob_(p), opts_(o) {
        const Eigen::Index d = p.num_vars();
        root_lb_ = p.lb.size() == d ? p.lb : Eigen::VectorXd::Constant(d, -kInf);
        root_ub_ = p.ub.size() == d ? p.ub : Eigen::VectorXd::Constant(d, kInf);
        for (int b : p.binary) {
            if (b < 0 || b >= d) throw std::invalid_argument("miqp: binary index out of range");
            root_lb_(b) = std::max(root_lb_(b), 0.0);
            root_ub_(b) = std::min(root_ub_(b), 1.0);
        }
        has_objective_ = (p.H.size() > 0 && p.H.lpNorm<Eigen::Infinity>() > 0.0) ||
                         p.f.lpNorm<Eigen::Infinity>() > 0.0;
        layout_.build(p, root_lb_, root_ub_);
        qp_opts_.feas_tol = std::max(1e-10, opts_.qp_tol * 0.1);
        qp_opts_.stationarity_tol = opts_.qp_tol * 1e-2;
    }

    Solution run() {
        auto t0 = std::chrono::steady_clock::now();
        Solution sol;

        Node root;
        root.lb = root_lb_;
        root.ub = root_ub_;
        root.id = next_id_++;
        root.depth = 0;

        const bool depth_first = opts_.mode == Mode::FirstFeasible ||
                                 opts_.node_selection == NodeSelection::DepthFirst;
        std::vector<Node> stack;             // depth-first
        std::priority_queue<Node, std::vector<Node>, NodeOrder> heap;  // best-bound
        if (depth_first) stack.push_back(std::move(root)); else heap.push(std::move(root));

        while (!(depth_first ? stack.empty() : heap.empty())) {
            if (stats_.nodes >= opts_.node_limit) {
                finish(sol, Status::NodeLimit, t0);
                return sol;
            }
            Node node = depth_first ? pop_back(stack) : pop_top(heap);

            if (has_incumbent_ && node.bound >= incumbent_obj_ - opts_.gap_abs) continue;

            ++stats_.nodes;
            Relaxation rel = solve_relaxation(node);
            if (opts_.keep_trace)
                trace_.push_back({node.id, node.parent, node.depth, rel.objective,
                                  rel.status == qp::Status::Optimal});

            if (rel.status == qp::Status::Infeasible) continue;
            if (rel.status != qp::Status::Optimal)
                throw std::runtime_error(std::string("miqp: relaxation solve failed: ") +
                                         qp::to_string(rel.status));

            // valid lower bound for the subtree (regularization slop折 below)
            double bound = rel.objective - bound_slop(rel.x);
            if (has_incumbent_ && bound >= incumbent_obj_ - opts_.gap_abs) continue;

            int frac = pick_branch_var(rel.x);
            if (frac < 0) {
                // integer feasible: polish binaries onto exact values
                Eigen::VectorXd cand = rel.x;
                double cand_obj = rel.objective;
                polish(node, cand, cand_obj);
                if (opts_.mode == Mode::FirstFeasible) {
                    sol.U = cand;
                    sol.objective = objective(cand);
                    finish(sol, Status::FirstFeasible, t0);
                    return sol;
                }
                if (!has_incumbent_ || cand_obj < incumbent_obj_) {
                    has_incumbent_ = true;
                    incumbent_obj_ = cand_obj;
                    incumbent_ = cand;
                }
                continue;
            }

            // two children: variable fixed down / up
            double v = rel.x(frac);
            Node down = make_child(node, rel, frac, 0.0);
            Node up = make_child(node, rel, frac, 1.0);
            down.bound = up.bound = bound;
            if (depth_first) {
                // dive toward the rounded value: push the preferred child last
                if (v >= 0.5) {
                    stack.push_back(std::move(down));
                    stack.push_back(std::move(up));
                } else {
                    stack.push_back(std::move(up));
                    stack.push_back(std::move(down));
                }
            } else {
                heap.push(std::move(down));
                heap.push(std::move(up));
            }
        }

        if (has_incumbent_) {
            sol.U = incumbent_;
            sol.objective = incumbent_obj_;
            finish(sol, Status::Optimal, t0);
        } else {
            finish(sol, Status::Infeasible, t0);
        }
        return sol;
    }

  private:
    static Node pop_back(std::vector<Node>& s) {
        Node n = std::move(s.back());
        s.pop_back();
        return n;
    }
    static Node pop_top(std::priority_queue<Node, std::vector<Node>, NodeOrder>& q) {
        Node n = q.top();
        q.pop();
        return n;
    }

    double objective(const Eigen::VectorXd& x) const {
        double quad = prob_.H.size() > 0 ? 0.5 * x.dot(prob_.H * x) : 0.0;
        return quad + prob_.f.dot(x);
    }

    double bound_slop(const Eigen::VectorXd& x) const {
        return 1e-9 * (1.0 + x.squaredNorm());
    }

    Relaxation solve_relaxation(const Node& node) {
        layout_.update_bounds(node.lb, node.ub);
        ++stats_.qp_solves;
        qp::Program qprog{prob_.H, prob_.f, layout_.G, layout_.h};
        const Eigen::VectorXd* start = node.warm_x.size() > 0 ? &node.warm_x : nullptr;
        const std::vector<int>* warm = node.warm_active.empty() ? nullptr : &node.warm_active;
        qp::Result r = has_objective_
                           ? qp::solve(qprog, qp_opts_, start, warm)
                           : qp::find_feasible(layout_.G, layout_.h, qp_opts_, start);
        Relaxation rel;
        rel.status = r.status;
        rel.x = r.x;
        rel.objective = (r.status == qp::Status::Optimal) ? objective(r.x) : kInf;
        rel.active = r.active;
        return rel;
    }

    int pick_branch_var(const Eigen::VectorXd& x) const {
        int best = -1;
        double best_score = opts_.integrality_tol;
        for (int b : prob_.binary) {
            double fr = std::abs(x(b) - std::round(x(b)));
            if (opts_.branching == Branching::FirstIndex) {
                if (fr > opts_.integrality_tol) return b;
            } else if (fr > best_score + 1e-15) {
                best_score = fr;
                best = b;
            }
        }
        return best;
    }

    Node make_child(const Node& parent, const Relaxation& rel, int var, double fix) {
        Node child;
        child.lb = parent.lb;
        child.ub = parent.ub;
        if (fix == 0.0) child.ub(var) = 0.0; else child.lb(var) = 1.0;
        child.depth = parent.depth + 1;
        child.id = next_id_++;
        child.parent = parent.id;
        child.warm_active = rel.active;
        child.warm_x = rel.x;
        child.warm_x(var) = fix;
        return child;
    }

    // re-solve with binaries pinned to the rounded integers; keeps the
    // relaxed point if the pinned problem is (marginally) infeasible
    void polish(const Node& node, Eigen::VectorXd& x, double& obj) {
        bool exact = true;
        for (int b : prob_.binary)
            if (x(b) != std::round(x(b))) { exact = false; break; }
        if (exact) return;
        Node pinned = node;
        for (int b : prob_.binary) {
            double v = std::round(x(b));
            pinned.lb(b) = v;
            pinned.ub(b) = v;
        }
        pinned.warm_x = x;
        for (int b : prob_.binary) pinned.warm_x(b) = std::round(x(b));
        pinned.warm_active = {};
        Relaxation rel = solve_relaxation(pinned);
        if (rel.status == qp::Status::Optimal) {
            x = rel.x;
            for (int b : prob_.binary) x(b) = std::round(x(b));
            obj = objective(x);
        }
    }

    void finish(Solution& sol, Status st, std::chrono::steady_clock::time_point t0) {
        sol.status = st;
        if (st == Status::NodeLimit && has_incumbent_) {
            sol.U = incumbent_;
            sol.objective = incumbent_obj_;
        }
        sol.stats = stats_;
        sol.stats.wall_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
        sol.trace = std::move(trace_);
    }

    const Problem& prob_;
    SolverOpts opts_;
    qp::Options qp_opts_;
    RowLayout layout_;
    Eigen::VectorXd root_lb_, root_ub_;
    bool has_objective_ = false;

    Stats stats_;
    std::vector<NodeTraceEntry> trace_;
    bool has_incumbent_ = false;
    double incumbent_obj_ = kInf;
    Eigen::VectorXd incumbent_;
    long next_id_ = 0;
};

}  // namespace

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::FirstFeasible: return "first_feasible";
        case Status::Infeasible: return "infeasible";
        case Status::NodeLimit: return "node_limit";
    }
    return "?";
}

Solution solve(const Problem& prob, const SolverOpts& opts) {
    BnB bnb(prob, opts);
    return bnb.run();
}

Solution brute_force(const Problem& prob, const SolverOpts& opts) {
    const std::size_t nb = prob.binary.size();
    if (nb > 20) throw std::invalid_argument("miqp::brute_force: more than 20 binaries");

    auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index d = prob.num_vars();
    Eigen::VectorXd lb = prob.lb.size() == d ? prob.lb : Eigen::VectorXd::Constant(d, -kInf);
    Eigen::VectorXd ub = prob.ub.size() == d ? prob.ub : Eigen::VectorXd::Constant(d, kInf);

    qp::Options qopts;
    qopts.feas_tol = std::max(1e-10, opts.qp_tol * 0.1);
    qopts.stationarity_tol = opts.qp_tol * 1e-2;

    const bool has_objective =
        (prob.H.size() > 0 && prob.H.lpNorm<Eigen::Infinity>() > 0.0) ||
        prob.f.lpNorm<Eigen::Infinity>() > 0.0;

    Solution best;
    best.status = Status::Infeasible;
    double best_obj = kInf;
    long solves = 0;

    RowLayout layout;
    layout.build(prob, lb, ub);
    for (std::size_t mask = 0; mask < (std::size_t{1} << nb); ++mask) {
        Eigen::VectorXd l = lb, u = ub;
        for (std::size_t k = 0; k < nb; ++k) {
            double v = (mask >> k) & 1u ? 1.0 : 0.0;
            l(prob.binary[k]) = v;
            u(prob.binary[k]) = v;
        }
        layout.update_bounds(l, u);
        ++solves;
        qp::Result r = has_objective
                           ? qp::solve({prob.H, prob.f, layout.G, layout.h}, qopts)
                           : qp::find_feasible(layout.G, layout.h, qopts);
        if (r.status != qp::Status::Optimal) continue;
        Eigen::VectorXd x = r.x;
        for (std::size_t k = 0; k < nb; ++k) x(prob.binary[k]) = (mask >> k) & 1u ? 1.0 : 0.0;
        double quad = prob.H.size() > 0 ? 0.5 * x.dot(prob.H * x) : 0.0;
        double obj = quad + prob.f.dot(x);
        if (obj < best_obj) {
            best_obj = obj;
            best.U = x;
            best.objective = obj;
            best.status = Status::Optimal;
        }
    }
    best.stats.nodes = static_cast<long>(std::size_t{1} << nb);
    best.stats.qp_solves = solves;
    best.stats.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return best;
}

double constraint_residual(const Problem& prob, const Eigen::VectorXd& U) {
    double r = 0.0;
    if (prob.num_rows() > 0) r = (prob.Phi * U - prob.phi).maxCoeff();
    const Eigen::Index d = prob.num_vars();
    if (prob.lb.size() == d) r = std::max(r, (prob.lb - U).maxCoeff());
    if (prob.ub.size() == d) r = std::max(r, (U - prob.ub).maxCoeff());
    for (int b : prob.binary) {
        r = std::max(r, -U(b));
        r = std::max(r, U(b) - 1.0);
    }
    return std::max(r, 0.0);
}

double integrality_residual(const Problem& prob, const Eigen::VectorXd& U) {
    double r = 0.0;
    for (int b : prob.binary) r = std::max(r, std::abs(U(b) - std::round(U(b))));
    return r;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Eigen::MatrixXd(0, 0);
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = j.at(i).at(k).get<double>();
    return M;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
    return v;
}

}  // namespace

std::string to_json(const Problem& prob) {
    nlohmann::json j;
    j["H"] = matrix_to_json(prob.H);
    j["f"] = vector_to_json(prob.f);
    j["Phi"] = matrix_to_json(prob.Phi);
    j["phi"] = vector_to_json(prob.phi);
    j["binary"] = prob.binary;
    if (prob.lb.size() > 0 || prob.ub.size() > 0) {
        nlohmann::json b;
        auto bound_array = [](const Eigen::VectorXd& v) {
            nlohmann::json arr = nlohmann::json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                if (std::isfinite(v(i))) arr.push_back(v(i)); else arr.push_back(nullptr);
            }
            return arr;
        };
        if (prob.lb.size() > 0) b["lb"] = bound_array(prob.lb);
        if (prob.ub.size() > 0) b["ub"] = bound_array(prob.ub);
        j["bounds"] = b;
    }
    return j.dump(2);
}

Problem problem_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Problem p;
    p.H = matrix_from_json(j.at("H"));
    p.f = vector_from_json(j.at("f"));
    p.Phi = matrix_from_json(j.at("Phi"));
    p.phi = vector_from_json(j.at("phi"));
    if (p.Phi.size() == 0) p.Phi = Eigen::MatrixXd(0, p.f.size());
    p.binary = j.value("binary", std::vector<int>{});
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        auto parse_bound = [&](const char* key, double absent) {
            Eigen::VectorXd v;
            if (!b.contains(key)) return v;
            const auto& arr = b.at(key);
            v.resize(static_cast<Eigen::Index>(arr.size()));
            for (Eigen::Index i = 0; i < v.size(); ++i)
                v(i) = arr.at(i).is_null() ? absent : arr.at(i).get<double>();
            return v;
        };
        p.lb = parse_bound("lb", -kInf);
        p.ub = parse_bound("ub", kInf);
    }
    return p;
}

}  // namespace hmpc::miqp
