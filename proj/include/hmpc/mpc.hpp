#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hmpc/lyapunov.hpp"
#include "hmpc/miqp.hpp"
#include "hmpc/mld.hpp"

namespace hmpc::mpc {

enum class Variant { TerminalEquality, LyapunovOptimal, LyapunovFeasible };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

// Finite-horizon controller description. Empty weight matrices mean zero;
// a 1x1 weight against a wider target is scaled identity. Empty equilibrium
// vectors mean the origin.
struct ControllerSpec {
    Variant variant = Variant::LyapunovOptimal;
    int horizon = 1;
    Eigen::MatrixXd Q1, Q2, Q3, Q4, Q5;  // input, delta, z, state, output weights
    Eigen::VectorXd u_e, delta_e, z_e, x_e, y_e;
    std::optional<lyap::Certificate> certificate;  // required for Lyapunov variants
    miqp::SolverOpts solver;
};

// Throws std::invalid_argument on non-PSD weights, horizon < 1, or a missing
// certificate for a Lyapunov variant.
void validate_spec(const ControllerSpec& spec, const mld::Model& model);

// Stacked affine maps x(t+k|t) = state_x[k] x_t + state_u[k] U obtained by
// forward substitution of the update equation, plus the matching output maps
// for k = 0..N-1. U stacks all u's, then all deltas, then all z's, each
// step-major.
struct PredictionMaps {
    std::vector<Eigen::MatrixXd> state_x;  // k = 0..N, n x n
    std::vector<Eigen::MatrixXd> state_u;  // k = 0..N, n x d
    std::vector<Eigen::MatrixXd> out_x;    // k = 0..N-1, p x n
    std::vector<Eigen::MatrixXd> out_u;    // k = 0..N-1, p x d
    int N = 0;
    int m = 0, r_l = 0, r_c = 0;

    int decision_dim() const { return N * (m + r_l + r_c); }
    int u_offset(int k) const { return k * m; }
    int delta_offset(int k) const { return N * m + k * r_l; }
    int z_offset(int k) const { return N * (m + r_l) + k * r_c; }
};

PredictionMaps build_prediction(const mld::Model& model, int N);

// Objective pieces of the condensed program: J = 1/2 U'HU + x'FU + f0'U + c(x)
// with c(x) = x'Kxx x + kx'x + k0 collecting the decision-free terms.
struct CostTerms {
    Eigen::MatrixXd H;
    Eigen::MatrixXd F;   // n x d
    Eigen::VectorXd f0;  // zero under an origin equilibrium
    Eigen::MatrixXd Kxx;
    Eigen::VectorXd kx;
    double k0 = 0.0;

    double constant_at(const Eigen::VectorXd& x) const {
        return x.dot(Kxx * x) + kx.dot(x) + k0;
    }
    double value(const Eigen::VectorXd& x, const Eigen::VectorXd& U) const {
        return 0.5 * U.dot(H * U) + x.dot(F * U) + f0.dot(U) + constant_at(x);
    }
};

CostTerms build_cost(const ControllerSpec& spec, const mld::Model& model, int N);

// Condensed constraint system Phi U <= rhs(x). For the replicated model rows
// and the endpoint rows, rhs(x) = phi0 + phiX x exactly; the Lyapunov rows
// additionally receive the scalar V(x) - gamma ||x||_inf, which rhs_at adds.
struct CondensedMiqp {
    Eigen::MatrixXd H;
    Eigen::MatrixXd F;
    Eigen::VectorXd f0;
    Eigen::MatrixXd Phi;
    Eigen::VectorXd phi0;
    Eigen::MatrixXd phiX;
    std::vector<int> binary;
    std::vector<int> terminal_rows;       // paired rows of the endpoint equality
    int lyap_row_begin = -1;
    int lyap_row_count = 0;
    std::optional<lyap::Certificate> cert;
    Eigen::MatrixXd Kxx;
    Eigen::VectorXd kx;
    double k0 = 0.0;

    Eigen::VectorXd rhs_at(const Eigen::VectorXd& x) const;
    miqp::Problem problem_at(const Eigen::VectorXd& x) const;
};

CondensedMiqp attach_constraints(const ControllerSpec& spec, const mld::Model& model,
                                 int N, const Eigen::VectorXd& x_t);

struct ControlResult {
    miqp::Status status = miqp::Status::Infeasible;
    Eigen::VectorXd u, delta, z;  // first move
    Eigen::VectorXd U;            // full decision vector
    double objective = 0.0;       // cost value including the decision-free part
    miqp::Stats stats;
};

// Reusable condensed controller: the expensive matrices are built once and
// only the right-hand side moves with the state.
class Controller {
  public:
    Controller(ControllerSpec spec, mld::Model model);

    ControlResult solve_step(const Eigen::VectorXd& x_t) const;
    const ControllerSpec& spec() const { return spec_; }
    const mld::Model& model() const { return model_; }
    const CondensedMiqp& condensed() const { return condensed_; }

  private:
    ControllerSpec spec_;
    mld::Model model_;
    CondensedMiqp condensed_;
};

ControlResult solve_step(const ControllerSpec& spec, const mld::Model& model,
                         const Eigen::VectorXd& x_t);

struct StepRecord {
    Eigen::VectorXd u, delta, z, y;
    double V = 0.0;  // value at the step's starting state
    double J = 0.0;
    miqp::Status status = miqp::Status::Infeasible;
    long nodes = 0;
    long qp_solves = 0;
    double ms = 0.0;
};

struct ClosedLoopLog {
    std::vector<Eigen::VectorXd> states;  // one more than executed steps
    std::vector<StepRecord> steps;
    std::optional<int> infeasible_step;

    bool completed() const { return !infeasible_step.has_value(); }
    // header: t,x1..xn,u1..um,delta...,z...,V,J,status,nodes,ms
    std::string to_csv() const;
};

// Receding-horizon loop with the model itself as the plant: the applied
// update uses the solver's (u, delta, z). Stops early on infeasibility with
// the failing step recorded.
ClosedLoopLog run_rhc(const ControllerSpec& spec, const mld::Model& model,
                      const Eigen::VectorXd& x0, int T);

// First t from which ||x||_inf stays at or below thresh for the rest of the
// log; nullopt when the tail never settles.
std::optional<int> settling_time(const std::vector<Eigen::VectorXd>& states,
                                 double thresh = 1e-3);

std::string spec_to_json(const ControllerSpec& spec);
ControllerSpec spec_from_json(const std::string& text);

}  // namespace hmpc::mpc
