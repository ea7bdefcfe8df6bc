#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace hmpc::miqp {

// Mixed-integer quadratic program in standard form
//     minimize   1/2 U'HU + f'U
//     subject to Phi U <= phi,  U_i in {0,1} for i in binary
// plus optional box bounds on any variable. Binary variables are implicitly
// boxed to [0,1] in every relaxation.
struct Problem {
    Eigen::MatrixXd H;      // d x d, symmetric PSD (may be all-zero)
    Eigen::VectorXd f;      // d
    Eigen::MatrixXd Phi;    // r x d
    Eigen::VectorXd phi;    // r
    std::vector<int> binary;
    Eigen::VectorXd lb;     // size d or empty; -inf where absent
    Eigen::VectorXd ub;     // size d or empty; +inf where absent

    Eigen::Index num_vars() const { return f.size(); }
    Eigen::Index num_rows() const { return phi.size(); }
};

enum class Status {
    Optimal,
    FirstFeasible,
    Infeasible,
    NodeLimit,
};

const char* to_string(Status s);

struct Stats {
    long nodes = 0;
    long qp_solves = 0;
    double wall_ms = 0.0;
};

struct NodeTraceEntry {
    long id = 0;
    long parent = -1;
    int depth = 0;
    double bound = 0.0;
    bool feasible = false;
};

struct Solution {
    Status status = Status::Infeasible;
    Eigen::VectorXd U;
    double objective = 0.0;
    Stats stats;
    std::vector<NodeTraceEntry> trace;  // filled only when opts.keep_trace
};

enum class Mode { Optimal, FirstFeasible };
enum class NodeSelection { BestBound, DepthFirst };
enum class Branching { MostFractional, FirstIndex };

struct SolverOpts {
    Mode mode = Mode::Optimal;
    double integrality_tol = 1e-6;
    double gap_abs = 1e-8;
    long node_limit = 1000000;
    NodeSelection node_selection = NodeSelection::BestBound;  // DepthFirst forced in FirstFeasible mode
    Branching branching = Branching::MostFractional;
    double qp_tol = 1e-8;
    bool deterministic = true;
    bool keep_trace = false;
};

// Branch-and-bound over convex QP relaxations. In Optimal mode the returned
// solution is globally optimal within gap_abs; in FirstFeasible mode the
// first integer-feasible point found by depth-first diving is returned and
// the objective is not minimized.
Solution solve(const Problem& prob, const SolverOpts& opts = {});

// Enumerates every binary assignment (at most 2^20) and solves the continuous
// QP for each; the independent reference oracle for solve().
Solution brute_force(const Problem& prob, const SolverOpts& opts = {});

// Largest constraint violation of Phi U <= phi and the box bounds.
double constraint_residual(const Problem& prob, const Eigen::VectorXd& U);
// Largest distance of a binary coordinate from {0,1}.
double integrality_residual(const Problem& prob, const Eigen::VectorXd& U);

std::string to_json(const Problem& prob);
Problem problem_from_json(const std::string& text);

}  // namespace hmpc::miqp
