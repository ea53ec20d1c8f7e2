#pragma once

#include "bte/collision.hpp"

#include <vector>

namespace bte {

// Two-species batch: row x of g1/g2 is the velocity field of species 1/2 at spatial node x.
struct BatchPair {
  Batch g1, g2;

  BatchPair() = default;
  BatchPair(Batch a, Batch b) : g1(std::move(a)), g2(std::move(b)) {}
  static BatchPair zero(Index rows, Index nodes) { return {Batch::Zero(rows, nodes), Batch::Zero(rows, nodes)}; }

  Index rows() const { return g1.rows(); }
  BatchPair operator+(const BatchPair& o) const { return {g1 + o.g1, g2 + o.g2}; }
  BatchPair operator-(const BatchPair& o) const { return {g1 - o.g1, g2 - o.g2}; }
  BatchPair operator*(double s) const { return {g1 * s, g2 * s}; }
  BatchPair& operator+=(const BatchPair& o) {
    g1 += o.g1;
    g2 += o.g2;
    return *this;
  }
  DistributionPair row(Index x) const { return {g1.row(x).transpose(), g2.row(x).transpose()}; }
  void set_row(Index x, const DistributionPair& p) {
    g1.row(x) = p.g1.transpose();
    g2.row(x) = p.g2.transpose();
  }
};

// psi_1 .. psi_10 (basis of Ker L), 0-based in the vector.
std::vector<DistributionPair> kernel_basis_L(const VelocityGrid& grid);
// phi_1 .. phi_6 (basis of Ker calL).
std::vector<DistributionPair> kernel_basis_calL(const VelocityGrid& grid);
// The seventeen-moment basis, ordered beta^1, beta^2, beta^1_i, beta^2_i, beta_i, tilde beta_i, beta_12, beta_13, beta_23.
std::vector<DistributionPair> seventeen_basis(const VelocityGrid& grid);

// Projector onto the span of paired fields under <f, g> = <f1, g1> + <f2, g2>.
// Coefficients come either from the continuum dual formulas (a fixed matrix applied to the raw pairings)
// or from the discrete Gram matrix; the second makes the projector exactly idempotent on the grid.
class PairSubspace {
 public:
  PairSubspace() = default;
  PairSubspace(const VelocityGrid& grid, const std::vector<DistributionPair>& basis, Eigen::MatrixXd continuum_dual);

  Index dim() const { return b1_.cols(); }
  // Raw pairings <g, basis_k>.
  Eigen::VectorXd pairings(const DistributionPair& g) const;
  Eigen::VectorXd coefficients(const DistributionPair& g, bool use_gram) const;
  DistributionPair reconstruct(const Eigen::VectorXd& c) const;
  DistributionPair apply(const DistributionPair& g, bool use_gram) const { return reconstruct(coefficients(g, use_gram)); }

  // Batched versions: one coefficient row per spatial node.
  Eigen::MatrixXd coefficients(const BatchPair& g, bool use_gram) const;
  BatchPair reconstruct(const Eigen::MatrixXd& c) const;
  BatchPair apply(const BatchPair& g, bool use_gram) const { return reconstruct(coefficients(g, use_gram)); }

  const Eigen::MatrixXd& gram() const { return gram_; }
  double gram_condition() const;

 private:
  double w_ = 0.0;
  Eigen::MatrixXd b1_, b2_, gram_, dual_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

// Coefficients of calP g (projection onto Ker calL).
struct MomentState {
  double rho1 = 0.0, rho2 = 0.0;
  Vec3 u = Vec3::Zero();
  double theta = 0.0;
};

// Coefficients of boldP g (projection onto Ker L).
struct PCoefficients {
  double a1 = 0.0, a2 = 0.0;
  Vec3 b1 = Vec3::Zero(), b2 = Vec3::Zero();
  double c1 = 0.0, c2 = 0.0;
};

// Per-species hydrodynamic moments.
struct HydroMoments {
  double rho[2] = {0.0, 0.0};
  Vec3 u[2] = {Vec3::Zero(), Vec3::Zero()};
  double theta[2] = {0.0, 0.0};
};

// All projections used by the solvers, built once per grid.
class Projections {
 public:
  explicit Projections(const VelocityGrid& grid, bool use_gram = true);

  const VelocityGrid& grid() const { return grid_; }
  bool use_gram() const { return use_gram_; }

  MomentState calP_coefficients(const DistributionPair& g) const;
  DistributionPair calP(const DistributionPair& g) const;
  DistributionPair reconstruct(const MomentState& m) const;

  PCoefficients boldP_coefficients(const DistributionPair& g) const;
  DistributionPair boldP(const DistributionPair& g) const;
  DistributionPair reconstruct(const PCoefficients& c) const;

  Eigen::VectorXd project_17(const DistributionPair& f) const;

  HydroMoments hydro_moments(const DistributionPair& g) const;

  // fluid part and micro part; which_calL selects calP, else boldP.
  std::pair<DistributionPair, DistributionPair> macro_micro_split(const DistributionPair& g, bool which_calL) const;

  // Batched: coefficient rows in the order (rho1, rho2, u1, u2, u3, theta) resp. (a1, b1.., c1, a2, b2.., c2).
  Eigen::MatrixXd calP_coefficients(const BatchPair& g) const;
  BatchPair calP(const BatchPair& g) const;
  BatchPair boldP(const BatchPair& g) const;

  const PairSubspace& calP_space() const { return cal_; }
  const PairSubspace& boldP_space() const { return bold_; }
  const PairSubspace& space_17() const { return b17_; }

  // Columns sqrt(M), v_i sqrt(M), (|v|^2/3 - 1) sqrt(M), (|v|^2/5 - 1) sqrt(M): the observables.
  const Eigen::MatrixXd& observables() const { return obs_; }

 private:
  VelocityGrid grid_;
  bool use_gram_;
  PairSubspace cal_, bold_, b17_;
  Eigen::MatrixXd obs_;
};

}  // namespace bte
