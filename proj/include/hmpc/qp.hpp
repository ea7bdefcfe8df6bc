#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hmpc::qp {

// Dense convex quadratic program
//     minimize   1/2 x'Qx + c'x
//     subject to G x <= h
// Q symmetric positive semidefinite (Q == 0 turns the problem into an LP).
struct Program {
    Eigen::MatrixXd Q;
    Eigen::VectorXd c;
    Eigen::MatrixXd G;
    Eigen::VectorXd h;

    Eigen::Index num_vars() const { return c.size(); }
    Eigen::Index num_rows() const { return h.size(); }
};

enum class Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    NumericalFailure,
};

struct Result {
    Status status = Status::NumericalFailure;
    Eigen::VectorXd x;
    double objective = 0.0;
    std::vector<int> active;  // working set at termination, usable as a warm start
    int iterations = 0;
};

struct Options {
    double feas_tol = 1e-9;        // row violation accepted as "on the boundary"
    double stationarity_tol = 1e-10;
    double multiplier_tol = 1e-9;
    double regularization = 1e-10; // Tikhonov shift applied to near-singular Q
    int max_iterations = 0;        // 0 -> auto from problem size
};

const char* to_string(Status s);

// Primal active-set solve. Finds a feasible point first (single-artificial
// LP phase) and then iterates exchanges of the working set. `warm_active`
// seeds the working set; invalid or inactive entries are ignored.
Result solve(const Program& prog, const Options& opts = {},
             const Eigen::VectorXd* start = nullptr,
             const std::vector<int>* warm_active = nullptr);

// Phase-1 only: a point satisfying Gx <= h within feas_tol, or Infeasible.
Result find_feasible(const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                     const Options& opts = {},
                     const Eigen::VectorXd* start = nullptr);

}  // namespace hmpc::qp
