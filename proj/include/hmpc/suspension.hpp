#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hmpc/mld.hpp"
#include "hmpc/mpc.hpp"

namespace hmpc::suspension {

// Which squared natural frequency sits at A(2,1). The printed source of the
// model is ambiguous there; the unsprung frequency is the physically
// consistent reading and the default.
enum class CouplingFrequency { Unsprung, Sprung };

struct Params {
    double Ts = 0.009;      // sample time [s]
    double f_s = 1.5;       // sprung-mass natural frequency [Hz]
    double f_us = 9.0;      // unsprung-mass natural frequency [Hz]
    double rho = 10.0;      // sprung/unsprung mass ratio
    double zeta = 0.0;      // nominal damping ratio (assumed value; see README)
    double zeta_max = 2.25; // maximum damping ratio
    double sigma = 0.2;     // saturation bound on the normalized force
    int horizon = 5;
    double state_bound = 10.0;  // symmetric per-state box for big-M derivation
    double eps = 1e-6;          // strict-inequality tolerance of the encoding
    CouplingFrequency a21 = CouplingFrequency::Unsprung;

    double omega_s() const { return 2.0 * M_PI * f_s; }
    double omega_us() const { return 2.0 * M_PI * f_us; }
    // slope of the dissipation bound: 2 * zeta_max * omega_s
    double damping_slope() const { return 2.0 * zeta_max * omega_s(); }

    void validate() const;
};

// Continuous-time quarter-car matrices: x' = A x + B f.
// States: tire deflection, unsprung velocity, suspension deflection, sprung velocity.
std::pair<Eigen::Matrix4d, Eigen::Vector4d> build_continuous(const Params& params);

// Exact zero-order-hold discretization through the augmented matrix exponential.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize(const Eigen::MatrixXd& A,
                                                       const Eigen::MatrixXd& B,
                                                       double Ts);

// Full mixed logical dynamical model: discretized dynamics plus the big-M
// encoding of the semi-active force constraints (sign coupling, saturation,
// dissipation bound).
mld::Model build_mld(const Params& params);

// The origin with zero force. Both sign binaries sit at 1 because the
// encoding assigns the >= 0 side of each threshold to the binary's 1 value.
mld::EquilibriumPair origin_equilibrium(const Params& params);

// Direct evaluation of the nonconvex force constraints at a raw (x, f) point,
// using the same eps convention as the encoding for the strict branches.
bool direct_constraints_ok(const Params& params, const Eigen::Vector4d& x, double f,
                           double tol = 1e-9);

// Feasibility of the encoded rows at (x, f): enumerates the binaries and pins
// the product auxiliaries, which the rows determine uniquely.
bool encoded_feasible(const Params& params, const mld::Model& model,
                      const Eigen::Vector4d& x, double f, double tol = 1e-9);

enum class YSource { Identity, Synthesized };

struct ExperimentConfig {
    mpc::Variant variant = mpc::Variant::LyapunovOptimal;
    Eigen::Vector4d x0{0.0, 0.0, 0.1, 0.0};
    int T = 600;
    Params params;
    double q_input = 1.0;    // Q1 = q_input (scalar input weight)
    double q_state = 1.0;    // Q4 = q_state * I
    double gamma = 0.0;      // <= 0 -> 0.01 * ||Y||_inf
    YSource y_source = YSource::Identity;
};

// Controller assembled from the config: weights, equilibrium targets, and a
// Lyapunov certificate when the variant needs one.
mpc::ControllerSpec make_controller(const ExperimentConfig& config, const mld::Model& model);

// Closed-loop run; when out_dir is nonempty writes trajectory.csv,
// control.csv, times.csv and plot.gp there.
mpc::ClosedLoopLog run_benchmark(const ExperimentConfig& config,
                                 const std::string& out_dir = {});

void write_run_outputs(const mpc::ClosedLoopLog& log, const std::string& out_dir);

struct ComparisonRow {
    std::string label;
    mpc::Variant variant;
    int N = 0;
    bool completed = false;
    std::optional<int> settling_step;
    double median_ms = 0.0;
    double max_ms = 0.0;
    double mean_nodes = 0.0;
    std::optional<int> terminal_n_star;  // set on the terminal-scan row
};

std::vector<ComparisonRow> compare_variants(const std::vector<ExperimentConfig>& configs);

struct TerminalScan {
    std::optional<int> n_star;                 // smallest N feasible at step 0
    std::vector<std::pair<int, bool>> scanned; // (N, step-0 feasible)
};

// Step-0 feasibility of the endpoint-equality controller from x0, scanned
// over increasing horizons.
TerminalScan terminal_horizon_scan(const ExperimentConfig& config, int n_max = 24);

std::string params_to_json(const Params& params);
Params params_from_json(const std::string& text);

}  // namespace hmpc::suspension
