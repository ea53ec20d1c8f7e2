#pragma once

#include "bte/collision.hpp"

#include <stdexcept>
#include <string>

namespace bte {

struct SolveOptions {
  double tol = 1e-8;  // relative residual
  int max_iter = 500;
  bool precondition = true;  // diagonal nu(v) preconditioner
};

struct SolveResult {
  Batch x;                        // one solution per row
  Eigen::VectorXd residual;       // relative residual per row
  int iterations = 0;
  bool input_projected = false;   // right-hand side had a Ker component that was removed
};

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Solves L-hat x = y on Ker^perp for every row of y by preconditioned conjugate gradients,
// deflating the kernel from the iterate each step. Throws SolveError after max_iter.
SolveResult solve_lhat(const CollisionModel& model, const Batch& y, const SolveOptions& opt = {});
Field solve_lhat(const CollisionModel& model, const Field& y, const SolveOptions& opt = {});

// A_i (3 rows) and B_ij (6 rows, order 11 22 33 12 13 23).
struct ABFields {
  Batch A, B;
  Batch Ahat, Bhat;  // filled by solve_AB
  double residual = 0.0;
  int iterations = 0;
};

ABFields build_AB(const VelocityGrid& grid);
void solve_AB(const CollisionModel& model, ABFields& ab, const SolveOptions& opt = {});

struct TransportCoefficients {
  double mu = 0.0, kappa = 0.0, sigma = 0.0, lambda = 0.0;
};

struct TransportReport {
  TransportCoefficients coeffs;
  Eigen::Matrix3d AA = Eigen::Matrix3d::Zero();  // <Ahat_i, A_j>
  Eigen::Matrix<double, 6, 6> BB = Eigen::Matrix<double, 6, 6>::Zero();  // <Bhat_a, B_b>
  double kappa_spread = 0.0;  // relative spread of the diagonal of AA, and worst off-diagonal
  double mu_spread = 0.0;     // relative spread over the isotropic-tensor predictions for BB
  Vec3 inv_sigma_components = Vec3::Zero();  // 1/sigma measured with v_1, v_2, v_3
  double solve_residual = 0.0;
  int solve_iterations = 0;
};

std::pair<double, double> compute_mu_kappa(const CollisionModel& model, const SolveOptions& opt = {});
std::pair<double, double> compute_sigma_lambda(const CollisionModel& model);
TransportReport compute_transport(const CollisionModel& model, const SolveOptions& opt = {});

}  // namespace bte
