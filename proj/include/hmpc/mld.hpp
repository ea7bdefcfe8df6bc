#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmpc/miqp.hpp"

namespace hmpc {

// Raised when a point (x, u) admits no auxiliary (delta, z) satisfying the
// mixed-integer constraint rows, i.e. lies outside the region where the
// model is defined.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace mld {

struct Dims {
    int n_c = 0, n_l = 0;  // continuous / binary states
    int m_c = 0, m_l = 0;  // continuous / binary inputs
    int p_c = 0, p_l = 0;  // continuous / binary outputs
    int r_c = 0;           // continuous auxiliaries z
    int r_l = 0;           // binary auxiliaries delta
    int q_e = 0;           // constraint rows

    int n() const { return n_c + n_l; }
    int m() const { return m_c + m_l; }
    int p() const { return p_c + p_l; }
};

// Discrete-time mixed logical dynamical system
//     x(t+1) = A x + B1 u + B2 delta + B3 z
//     y(t)   = C x + D1 u + D2 delta + D3 z
//     E2 delta + E3 z <= E1 u + E4 x + E5
// Immutable after construction; safe to share across threads.
struct Model {
    Eigen::MatrixXd A, B1, B2, B3;
    Eigen::MatrixXd C, D1, D2, D3;
    Eigen::MatrixXd E1, E2, E3, E4;
    Eigen::VectorXd E5;
    Dims dims;
    std::vector<int> binary_state_indices;
    std::vector<int> binary_input_indices;
};

struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
};

// Shape and index consistency of every matrix against dims.
ValidationReport validate(const Model& model);

struct EquilibriumPair {
    Eigen::VectorXd x_e, u_e, delta_e, z_e;
};

// max over constraint rows of  E2 d + E3 z - E1 u - E4 x - E5  (0 when q_e = 0)
double constraint_residual(const Model& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& delta,
                           const Eigen::VectorXd& z);

// Definition of an equilibrium pair: fixed point of the update map whose
// auxiliaries satisfy the constraint rows, both within tol_eq.
bool check_equilibrium(const Model& model, const EquilibriumPair& pair,
                       double tol_eq = 1e-8);

struct StepResult {
    Eigen::VectorXd x_next;
    Eigen::VectorXd y;
    Eigen::VectorXd delta;
    Eigen::VectorXd z;
};

// One simulation step. The auxiliaries are the solver's first feasible
// (delta, z) for the given (x, u). Throws InfeasibleError outside the
// model's domain.
StepResult step(const Model& model, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                const miqp::SolverOpts& solver = {});

// Well-posedness probe: re-solves with the found delta excluded and returns
// a second feasible delta if one exists (a sign the model is ambiguous).
std::optional<Eigen::VectorXd> second_feasible_delta(const Model& model,
                                                     const Eigen::VectorXd& x,
                                                     const Eigen::VectorXd& u,
                                                     const Eigen::VectorXd& delta_found,
                                                     const miqp::SolverOpts& solver = {});

struct Trajectory {
    std::vector<Eigen::VectorXd> states;   // length T+1 on success
    std::vector<Eigen::VectorXd> inputs;   // applied inputs
    std::vector<Eigen::VectorXd> deltas;
    std::vector<Eigen::VectorXd> zs;
    std::vector<Eigen::VectorXd> outputs;
    std::optional<int> failed_step;        // set when aborted by infeasibility

    bool completed() const { return !failed_step.has_value(); }
};

// Repeated step over an input sequence; aborts with a partial log when a
// step is infeasible.
Trajectory simulate_open_loop(const Model& model, const Eigen::VectorXd& x0,
                              const std::vector<Eigen::VectorXd>& inputs,
                              const miqp::SolverOpts& solver = {});

std::string to_json(const Model& model);
Model from_json(const std::string& text);

}  // namespace mld
}  // namespace hmpc
