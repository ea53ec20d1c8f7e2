#include "bte/fluid.hpp"

#include <cmath>
#include <limits>

namespace bte {

namespace {

// exp(h [[a, b], [b, c]]) for a symmetric 2x2 matrix.
Eigen::Matrix2d expm_sym(double a, double b, double c, double h) {
  const double m = 0.5 * (a + c);
  const double d = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  Eigen::Matrix2d A;
  A << a - m, b, b, c - m;
  if (h * d < 1e-8) return std::exp(h * m) * (Eigen::Matrix2d::Identity() + h * A);
  const double ep = std::exp(h * (m + d)), em = std::exp(h * (m - d));
  return 0.5 * (ep + em) * Eigen::Matrix2d::Identity() + 0.5 * (ep - em) / d * A;
}

// Leray projection of the resolved components of a spectral vector field (columns c0..c0+2).
void leray_spectral(const PeriodicGrid& g, Spectrum& W, int c0) {
  const int d = g.dim();
  for (Index s = 0; s < g.spectral_size(); ++s) {
    double k[2] = {g.ik(0)[s].imag(), d == 2 ? g.ik(1)[s].imag() : 0.0};
    const double kk = k[0] * k[0] + k[1] * k[1];
    if (kk == 0.0) continue;
    std::complex<double> kw = 0.0;
    for (int a = 0; a < d; ++a) kw += k[a] * W(s, c0 + a);
    for (int a = 0; a < d; ++a) W(s, c0 + a) -= k[a] * kw / kk;
  }
}

}  // namespace

FluidState FluidState::zero(Index size) {
  FluidState s;
  for (int l = 0; l < 2; ++l) {
    s.u[l] = Eigen::MatrixXd::Zero(size, 3);
    s.theta[l] = Field::Zero(size);
    s.p[l] = Field::Zero(size);
  }
  return s;
}

Eigen::MatrixXd leray_project(const PeriodicGrid& grid, const Eigen::MatrixXd& w) {
  if (w.cols() != 3 || w.rows() != grid.size()) throw std::invalid_argument("leray_project: expected size x 3 field");
  Spectrum W = grid.forward(w);
  leray_spectral(grid, W, 0);
  return grid.backward(W);
}

FluidSolver::FluidSolver(const PeriodicGrid& grid, const TransportCoefficients& coeffs, const RegimeFlags& flags,
                         double cfl)
    : grid_(grid), coeffs_(coeffs), flags_(flags), cfl_(cfl) {
  if (!(coeffs.mu >= 0.0) || !(coeffs.kappa >= 0.0)) throw std::invalid_argument("fluid solver: mu, kappa must be >= 0");
  if (flags.coupling && (!(coeffs.sigma > 0.0) || !(coeffs.lambda > 0.0)))
    throw std::invalid_argument("fluid solver: sigma, lambda must be positive when coupling is on");
}

Spectrum FluidSolver::to_spectrum(const FluidState& s) const {
  Eigen::MatrixXd f(grid_.size(), 8);
  f.leftCols(3) = s.u[0];
  f.middleCols(3, 3) = s.u[1];
  f.col(6) = s.theta[0];
  f.col(7) = s.theta[1];
  return grid_.forward(f);
}

void FluidSolver::from_spectrum(const Spectrum& S, FluidState& s) const {
  const Eigen::MatrixXd f = grid_.backward(S);
  s.u[0] = f.leftCols(3);
  s.u[1] = f.middleCols(3, 3);
  s.theta[0] = f.col(6);
  s.theta[1] = f.col(7);
}

Spectrum FluidSolver::propagate(const Spectrum& S, double h) const {
  const double su = flags_.coupling ? 1.0 / coeffs_.sigma : 0.0;
  const double st = flags_.coupling ? 1.0 / coeffs_.lambda : 0.0;
  const double mu0 = flags_.species[0].diffuse ? coeffs_.mu : 0.0, mu1 = flags_.species[1].diffuse ? coeffs_.mu : 0.0;
  const double ka0 = flags_.species[0].diffuse ? coeffs_.kappa : 0.0,
               ka1 = flags_.species[1].diffuse ? coeffs_.kappa : 0.0;
  Spectrum out(S.rows(), S.cols());
  for (Index s = 0; s < S.rows(); ++s) {
    const double k2 = grid_.k2()[s];
    const Eigen::Matrix2d Eu = expm_sym(-mu0 * k2 - su, su, -mu1 * k2 - su, h);
    const Eigen::Matrix2d Et = expm_sym(-ka0 * k2 - st, st, -ka1 * k2 - st, h);
    for (int c = 0; c < 3; ++c) {
      const std::complex<double> a = S(s, c), b = S(s, 3 + c);
      out(s, c) = Eu(0, 0) * a + Eu(0, 1) * b;
      out(s, 3 + c) = Eu(1, 0) * a + Eu(1, 1) * b;
    }
    const std::complex<double> a = S(s, 6), b = S(s, 7);
    out(s, 6) = Et(0, 0) * a + Et(0, 1) * b;
    out(s, 7) = Et(1, 0) * a + Et(1, 1) * b;
  }
  return out;
}

Spectrum FluidSolver::nonlinear(const Spectrum& S) const {
  Spectrum N = Spectrum::Zero(S.rows(), S.cols());
  const bool any = flags_.species[0].advect || flags_.species[1].advect;
  if (!any) return N;
  const int d = grid_.dim();
  const Eigen::MatrixXd f = grid_.backward(S);
  // Gradients of all eight scalar fields along each resolved axis.
  Eigen::MatrixXd grad[2];
  for (int a = 0; a < d; ++a) grad[a] = grid_.backward(grid_.ik(a).asDiagonal() * S);
  Eigen::MatrixXd adv = Eigen::MatrixXd::Zero(grid_.size(), 8);
  for (int l = 0; l < 2; ++l) {
    if (!flags_.species[l].advect) continue;
    const int c0 = 3 * l;
    for (int a = 0; a < d; ++a) {
      const Eigen::ArrayXd ua = f.col(c0 + a).array();
      for (int c = 0; c < 3; ++c) adv.col(c0 + c).array() += ua * grad[a].col(c0 + c).array();
      adv.col(6 + l).array() += ua * grad[a].col(6 + l).array();
    }
  }
  N = grid_.forward(adv);
  N = grid_.dealias_mask().asDiagonal() * N;
  leray_spectral(grid_, N, 0);
  leray_spectral(grid_, N, 3);
  return -N;
}

double FluidSolver::max_dt(const FluidState& s) const {
  double umax = 0.0;
  for (int l = 0; l < 2; ++l)
    if (flags_.species[l].advect) umax = std::max(umax, s.u[l].leftCols(grid_.dim()).cwiseAbs().maxCoeff());
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return cfl_ * grid_.dx() / umax;
}

void FluidSolver::step(FluidState& s, double dt) const {
  if (!(dt > 0.0)) throw FluidError("fluid step: dt must be positive");
  if (dt > max_dt(s) * (1.0 + 1e-12)) throw FluidError("fluid step: advective CFL violated");
  Spectrum U = to_spectrum(s);
  leray_spectral(grid_, U, 0);
  leray_spectral(grid_, U, 3);
  const double h = dt;
  const Spectrum k1 = nonlinear(U);
  const Spectrum Eh2U = propagate(U, 0.5 * h);
  const Spectrum a = propagate(U + 0.5 * h * k1, 0.5 * h);
  const Spectrum k2 = nonlinear(a);
  const Spectrum b = Eh2U + 0.5 * h * k2;
  const Spectrum k3 = nonlinear(b);
  const Spectrum c = propagate(U, h) + h * propagate(k3, 0.5 * h);
  const Spectrum k4 = nonlinear(c);
  const Spectrum next = propagate(U + (h / 6.0) * k1, h) + (h / 6.0) * (2.0 * propagate(k2 + k3, 0.5 * h) + k4);
  if (!next.allFinite()) throw FluidError("fluid step: non-finite state");
  from_spectrum(next, s);
  s.t += dt;
  const auto [p1, p2] = pressure(s);
  s.p[0] = p1;
  s.p[1] = p2;
}

std::pair<Field, Field> FluidSolver::pressure(const FluidState& s) const {
  Field p[2] = {Field::Zero(grid_.size()), Field::Zero(grid_.size())};
  const int d = grid_.dim();
  for (int l = 0; l < 2; ++l) {
    if (!flags_.species[l].advect) continue;
    const Spectrum U = grid_.forward(s.u[l]);
    Eigen::MatrixXd adv = Eigen::MatrixXd::Zero(grid_.size(), d);
    for (int a = 0; a < d; ++a) {
      const Eigen::MatrixXd ga = grid_.backward(grid_.ik(a).asDiagonal() * U);
      for (int c = 0; c < d; ++c) adv.col(c).array() += s.u[l].col(a).array() * ga.col(c).array();
    }
    const Spectrum N = grid_.dealias_mask().asDiagonal() * grid_.forward(adv);
    Eigen::VectorXcd P = Eigen::VectorXcd::Zero(grid_.spectral_size());
    for (Index q = 0; q < grid_.spectral_size(); ++q) {
      double k[2] = {grid_.ik(0)[q].imag(), d == 2 ? grid_.ik(1)[q].imag() : 0.0};
      const double kk = k[0] * k[0] + k[1] * k[1];
      if (kk == 0.0) continue;
      std::complex<double> kn = 0.0;
      for (int a = 0; a < d; ++a) kn += k[a] * N(q, a);
      P[q] = std::complex<double>(0.0, 1.0) * kn / kk;
    }
    p[l] = grid_.backward_field(P);
  }
  return {p[0], p[1]};
}

double FluidSolver::max_divergence(const FluidState& s) const {
  double m = 0.0;
  for (int l = 0; l < 2; ++l) {
    Field div = Field::Zero(grid_.size());
    for (int a = 0; a < grid_.dim(); ++a) div += grid_.derivative(s.u[l].col(a), a);
    m = std::max(m, div.cwiseAbs().maxCoeff());
  }
  return m;
}

FluidDiagnostics FluidSolver::diagnostics(const FluidState& s) const {
  FluidDiagnostics d;
  d.t = s.t;
  d.ke1 = 0.5 * grid_.l2_squared(s.u[0]).sum();
  d.ke2 = 0.5 * grid_.l2_squared(s.u[1]).sum();
  d.th1_l2 = std::sqrt(grid_.l2_squared(s.theta[0])[0]);
  d.th2_l2 = std::sqrt(grid_.l2_squared(s.theta[1])[0]);
  d.u_diff_l2 = std::sqrt(grid_.l2_squared(s.u[0] - s.u[1]).sum());
  d.theta_diff_l2 = std::sqrt(grid_.l2_squared(s.theta[0] - s.theta[1])[0]);
  d.div_max = max_divergence(s);
  return d;
}

double FluidSolver::energy_rate(const FluidState& s) const {
  double r = 0.0;
  for (int l = 0; l < 2; ++l) {
    if (!flags_.species[l].diffuse) continue;
    r -= coeffs_.mu * grid_.hs_squared(s.u[l], 1).sum();
    r += coeffs_.mu * grid_.l2_squared(s.u[l]).sum();  // keep only the gradient part of the H^1 norm
  }
  if (flags_.coupling) r -= grid_.l2_squared(s.u[0] - s.u[1]).sum() / coeffs_.sigma;
  return r;
}

}  // namespace bte
