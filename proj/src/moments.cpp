#include "bte/moments.hpp"

#include <stdexcept>

namespace bte {

namespace {

Field speed2(const VelocityGrid& g) {
  return (g.vx.array().square() + g.vy.array().square() + g.vz.array().square()).matrix();
}

const Field& axis_of(const VelocityGrid& g, int i) { return i == 0 ? g.vx : (i == 1 ? g.vy : g.vz); }

DistributionPair only_first(const Field& f) { return {f, Field::Zero(f.size())}; }
DistributionPair only_second(const Field& f) { return {Field::Zero(f.size()), f}; }
DistributionPair both(const Field& f) { return {f, f}; }

}  // namespace

std::vector<DistributionPair> kernel_basis_L(const VelocityGrid& grid) {
  const Field s = sqrt_maxwellian(grid);
  const Field e = ((speed2(grid).array() / 3.0 - 1.0) * s.array()).matrix();
  std::vector<DistributionPair> psi;
  psi.push_back(only_first(s));
  psi.push_back(only_second(s));
  for (int i = 0; i < 3; ++i) psi.push_back(only_first(axis_of(grid, i).cwiseProduct(s)));
  for (int i = 0; i < 3; ++i) psi.push_back(only_second(axis_of(grid, i).cwiseProduct(s)));
  psi.push_back(only_first(e));
  psi.push_back(only_second(e));
  return psi;
}

std::vector<DistributionPair> kernel_basis_calL(const VelocityGrid& grid) {
  const Field s = sqrt_maxwellian(grid);
  std::vector<DistributionPair> phi;
  phi.push_back(only_first(s));
  phi.push_back(only_second(s));
  for (int i = 0; i < 3; ++i) phi.push_back(both(axis_of(grid, i).cwiseProduct(s)));
  phi.push_back(both((0.5 * (speed2(grid).array() - 3.0) * s.array()).matrix()));
  return phi;
}

std::vector<DistributionPair> seventeen_basis(const VelocityGrid& grid) {
  const Field s = sqrt_maxwellian(grid);
  const Field v2 = speed2(grid);
  std::vector<DistributionPair> b;
  b.push_back(only_first(s));
  b.push_back(only_second(s));
  for (int i = 0; i < 3; ++i) b.push_back(only_first(axis_of(grid, i).cwiseProduct(s)));
  for (int i = 0; i < 3; ++i) b.push_back(only_second(axis_of(grid, i).cwiseProduct(s)));
  for (int i = 0; i < 3; ++i) b.push_back(both(axis_of(grid, i).array().square().matrix().cwiseProduct(s)));
  for (int i = 0; i < 3; ++i) b.push_back(both((axis_of(grid, i).array() * v2.array() * s.array()).matrix()));
  const int jk[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& p : jk)
    b.push_back(both((axis_of(grid, p[0]).array() * axis_of(grid, p[1]).array() * s.array()).matrix()));
  return b;
}

PairSubspace::PairSubspace(const VelocityGrid& grid, const std::vector<DistributionPair>& basis,
                           Eigen::MatrixXd continuum_dual)
    : w_(grid.weight), dual_(std::move(continuum_dual)) {
  const Index k = Index(basis.size());
  b1_.resize(grid.size(), k);
  b2_.resize(grid.size(), k);
  for (Index c = 0; c < k; ++c) {
    b1_.col(c) = basis[c].g1;
    b2_.col(c) = basis[c].g2;
  }
  gram_ = w_ * (b1_.transpose() * b1_ + b2_.transpose() * b2_);
  ldlt_.compute(gram_);
  if (dual_.size() == 0) dual_ = gram_.inverse();
  if (dual_.rows() != k || dual_.cols() != k) throw std::invalid_argument("pair subspace: dual matrix has wrong shape");
}

Eigen::VectorXd PairSubspace::pairings(const DistributionPair& g) const {
  return w_ * (b1_.transpose() * g.g1 + b2_.transpose() * g.g2);
}

Eigen::VectorXd PairSubspace::coefficients(const DistributionPair& g, bool use_gram) const {
  const Eigen::VectorXd r = pairings(g);
  return use_gram ? Eigen::VectorXd(ldlt_.solve(r)) : Eigen::VectorXd(dual_ * r);
}

DistributionPair PairSubspace::reconstruct(const Eigen::VectorXd& c) const { return {b1_ * c, b2_ * c}; }

Eigen::MatrixXd PairSubspace::coefficients(const BatchPair& g, bool use_gram) const {
  const Eigen::MatrixXd r = w_ * (g.g1 * b1_ + g.g2 * b2_);  // rows x k
  if (use_gram) return ldlt_.solve(r.transpose()).transpose();
  return r * dual_.transpose();
}

BatchPair PairSubspace::reconstruct(const Eigen::MatrixXd& c) const {
  return {c * b1_.transpose(), c * b2_.transpose()};
}

double PairSubspace::gram_condition() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
  return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

Projections::Projections(const VelocityGrid& grid, bool use_gram) : grid_(grid), use_gram_(use_gram) {
  Eigen::VectorXd cal_dual(6);
  cal_dual << 1.0, 1.0, 0.5, 0.5, 0.5, 1.0 / 3.0;
  cal_ = PairSubspace(grid, kernel_basis_calL(grid), cal_dual.asDiagonal());

  // Ker L basis in the (a, b, c) parametrisation of each species.
  const Field s = sqrt_maxwellian(grid);
  const Field v2s = speed2(grid).cwiseProduct(s);
  std::vector<DistributionPair> kb;
  for (int l = 0; l < 2; ++l) {
    auto put = [&](const Field& f) { kb.push_back(l == 0 ? only_first(f) : only_second(f)); };
    put(s);
    for (int i = 0; i < 3; ++i) put(axis_of(grid, i).cwiseProduct(s));
    put(v2s);
  }
  Eigen::MatrixXd bold_dual = Eigen::MatrixXd::Zero(10, 10);
  for (int l = 0; l < 2; ++l) {
    const int o = 5 * l;
    bold_dual(o, o) = 2.5;
    bold_dual(o, o + 4) = -0.5;
    bold_dual(o + 4, o) = -0.5;
    bold_dual(o + 4, o + 4) = 1.0 / 6.0;
    for (int i = 1; i <= 3; ++i) bold_dual(o + i, o + i) = 1.0;
  }
  bold_ = PairSubspace(grid, kb, bold_dual);
  b17_ = PairSubspace(grid, seventeen_basis(grid), Eigen::MatrixXd());

  obs_.resize(grid.size(), 6);
  obs_.col(0) = s;
  for (int i = 0; i < 3; ++i) obs_.col(1 + i) = axis_of(grid, i).cwiseProduct(s);
  obs_.col(4) = ((speed2(grid).array() / 3.0 - 1.0) * s.array()).matrix();
  obs_.col(5) = ((speed2(grid).array() / 5.0 - 1.0) * s.array()).matrix();
}

MomentState Projections::calP_coefficients(const DistributionPair& g) const {
  const Eigen::VectorXd c = cal_.coefficients(g, use_gram_);
  MomentState m;
  m.rho1 = c[0];
  m.rho2 = c[1];
  m.u = c.segment<3>(2);
  m.theta = c[5];
  return m;
}

DistributionPair Projections::calP(const DistributionPair& g) const { return cal_.apply(g, use_gram_); }

DistributionPair Projections::reconstruct(const MomentState& m) const {
  Eigen::VectorXd c(6);
  c << m.rho1, m.rho2, m.u, m.theta;
  return cal_.reconstruct(c);
}

PCoefficients Projections::boldP_coefficients(const DistributionPair& g) const {
  const Eigen::VectorXd c = bold_.coefficients(g, use_gram_);
  PCoefficients p;
  p.a1 = c[0];
  p.b1 = c.segment<3>(1);
  p.c1 = c[4];
  p.a2 = c[5];
  p.b2 = c.segment<3>(6);
  p.c2 = c[9];
  return p;
}

DistributionPair Projections::boldP(const DistributionPair& g) const { return bold_.apply(g, use_gram_); }

DistributionPair Projections::reconstruct(const PCoefficients& p) const {
  Eigen::VectorXd c(10);
  c << p.a1, p.b1, p.c1, p.a2, p.b2, p.c2;
  return bold_.reconstruct(c);
}

Eigen::VectorXd Projections::project_17(const DistributionPair& f) const { return b17_.coefficients(f, true); }

HydroMoments Projections::hydro_moments(const DistributionPair& g) const {
  HydroMoments h;
  const Field* gs[2] = {&g.g1, &g.g2};
  for (int l = 0; l < 2; ++l) {
    const Eigen::VectorXd r = grid_.weight * (obs_.leftCols(5).transpose() * *gs[l]);
    h.rho[l] = r[0];
    h.u[l] = r.segment<3>(1);
    h.theta[l] = r[4];
  }
  return h;
}

std::pair<DistributionPair, DistributionPair> Projections::macro_micro_split(const DistributionPair& g,
                                                                            bool which_calL) const {
  DistributionPair macro = which_calL ? calP(g) : boldP(g);
  DistributionPair micro = g - macro;
  return {std::move(macro), std::move(micro)};
}

Eigen::MatrixXd Projections::calP_coefficients(const BatchPair& g) const { return cal_.coefficients(g, use_gram_); }

BatchPair Projections::calP(const BatchPair& g) const { return cal_.apply(g, use_gram_); }

BatchPair Projections::boldP(const BatchPair& g) const { return bold_.apply(g, use_gram_); }

}  // namespace bte
