#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hmpc/mld.hpp"

namespace hmpc::lyap {

// Certificate for V(x) = ||Y x||_inf with decrease rate gamma. Valid when
// Y has full column rank, gamma <= ||Y||_inf <= 1 + gamma, and
// theta = ||Y||_inf - gamma lies in [0, 1].
struct Certificate {
    Eigen::MatrixXd Y;  // c x n, c >= n
    double gamma = 0.0;
    double theta = 0.0;

    Eigen::Index rows() const { return Y.rows(); }
    Eigen::Index dim() const { return Y.cols(); }
};

// V(x) = ||Y x||_inf
double v_eval(const Certificate& cert, const Eigen::VectorXd& x);

// numerical rank at tolerance 1e-10 * sigma_max
Eigen::Index numerical_rank(const Eigen::MatrixXd& Y);

struct CheckResult {
    std::optional<Certificate> certificate;
    std::vector<std::string> violations;

    bool ok() const { return certificate.has_value(); }
};

// Validates the two norm conditions and the rank condition; on success the
// returned certificate carries theta = ||Y||_inf - gamma.
CheckResult check_certificate(const Eigen::MatrixXd& Y, double gamma);

// Linear rows over the first-step decision variables (u, delta, z) enforcing
//     ||Y x(t+1)||_inf <= V(x_t) - gamma * ||x_t||_inf
// as +-Y_i (A x_t + B1 u + B2 delta + B3 z) <= rhs. The right-hand side
// depends on x_t through the scalar rhs and the A x_t offset only, so the
// coefficient blocks are state independent.
struct DecreaseRows {
    Eigen::MatrixXd G_u;      // 2c x m
    Eigen::MatrixXd G_delta;  // 2c x r_l
    Eigen::MatrixXd G_z;      // 2c x r_c
    Eigen::VectorXd rhs;      // 2c, equals rhs_scalar - W x_t
    Eigen::MatrixXd W;        // 2c x n, rows +-Y_i A
    double rhs_scalar = 0.0;  // V(x_t) - gamma ||x_t||_inf
    bool rhs_negative = false;  // advisory: no x(t+1) can satisfy the rows
};

DecreaseRows decrease_rows(const Certificate& cert, const mld::Model& model,
                           const Eigen::VectorXd& x_t);

struct SynthesisOptions {
    Eigen::MatrixXd Y0;        // empty -> identity
    int max_iters = 50;
    double theta_target = 0.0; // <= 0 -> 1 - 0.99 * gamma
    int max_rows = 512;
};

struct SynthesisResult {
    std::optional<Certificate> certificate;
    std::string message;
    int iterations = 0;

    bool ok() const { return certificate.has_value(); }
};

// Row-augmentation construction of Y for the one-step linear contraction
// ||Y A pinv(Y)||_inf <= theta, starting from Y0 and appending Y*A/theta
// rows (with dominated-row reduction) until the contraction certifies.
// Requires the spectral radius of A to be below one.
SynthesisResult synthesize_Y(const Eigen::MatrixXd& A, double gamma,
                             const SynthesisOptions& opts = {});

struct DecreaseReport {
    std::vector<bool> step_ok;               // per-step decrease within tol
    bool all_ok = true;
    std::optional<std::vector<bool>> envelope_ok;  // only when Y == I
    bool envelope_all_ok = true;
};

// Per-step decrease check over a logged state sequence, plus the geometric
// envelope V(x(t)) <= theta^t V(x(0)) + tol when Y is the identity.
DecreaseReport check_decrease_trajectory(const std::vector<Eigen::VectorXd>& states,
                                         const Certificate& cert, double tol = 1e-6);

struct EnvelopeFit {
    double alpha = 0.0;
    double beta = 0.0;
    int t0 = 0;
};

// Smallest beta on a 1e-3 grid admitting ||x(t)||_inf <= alpha beta^(t-t0)
// ||x(t0)||_inf with alpha <= alpha_max; nullopt when no beta < 1 works.
std::optional<EnvelopeFit> fit_envelope(const std::vector<Eigen::VectorXd>& states,
                                        int t0 = 0, double alpha_max = 2.0,
                                        double beta_step = 1e-3);

std::string to_json(const Certificate& cert);
Certificate certificate_from_json(const std::string& text);

}  // namespace hmpc::lyap
