#include "bte/transport.hpp"

#include <cmath>
#include <sstream>

namespace bte {

namespace {

// Row-wise weighted dot products.
Eigen::VectorXd row_dots(const Batch& a, const Batch& b) { return a.cwiseProduct(b).rowwise().sum(); }

Batch deflate(const CollisionModel& model, const Batch& x) {
  const Eigen::MatrixXd& q = model.kernel_projector().orthonormal();
  return x - (x * q) * q.transpose();
}

}  // namespace

SolveResult solve_lhat(const CollisionModel& model, const Batch& y, const SolveOptions& opt) {
  if (y.cols() != model.grid().size()) throw std::invalid_argument("solve_lhat: right-hand side does not match the grid");
  SolveResult res;
  const Batch b = deflate(model, y);
  const Eigen::VectorXd ynorm = row_dots(y, y).cwiseSqrt();
  const Eigen::VectorXd bnorm = row_dots(b, b).cwiseSqrt();
  for (Index r = 0; r < y.rows(); ++r)
    if (bnorm[r] < (1.0 - 1e-12) * ynorm[r]) res.input_projected = true;

  const Index S = y.rows();
  const Field inv_diag = opt.precondition ? Field(model.nu().cwiseInverse()) : Field(Field::Ones(model.grid().size()));
  auto precond = [&](const Batch& r) { return deflate(model, r * inv_diag.asDiagonal()); };

  Batch x = Batch::Zero(S, y.cols());
  Batch r = b;
  Batch z = precond(r);
  Batch p = z;
  Eigen::VectorXd rz = row_dots(r, z);
  Eigen::VectorXd rel(S);
  auto update_rel = [&]() {
    for (Index k = 0; k < S; ++k) rel[k] = bnorm[k] > 0.0 ? std::sqrt(r.row(k).squaredNorm()) / bnorm[k] : 0.0;
  };
  update_rel();
  std::vector<bool> done(S);
  int it = 0;
  while (rel.maxCoeff() > opt.tol) {
    if (it >= opt.max_iter) {
      std::ostringstream os;
      os << "solve_lhat: no convergence after " << opt.max_iter << " iterations, relative residual " << rel.maxCoeff();
      throw SolveError(os.str(), rel.maxCoeff());
    }
    ++it;
    for (Index k = 0; k < S; ++k) done[k] = rel[k] <= opt.tol;
    const Batch Ap = l_hat(model, p);
    const Eigen::VectorXd pAp = row_dots(p, Ap);
    for (Index k = 0; k < S; ++k) {
      if (done[k] || pAp[k] <= 0.0) continue;
      const double alpha = rz[k] / pAp[k];
      x.row(k) += alpha * p.row(k);
      r.row(k) -= alpha * Ap.row(k);
    }
    x = deflate(model, x);
    r = deflate(model, r);
    z = precond(r);
    const Eigen::VectorXd rz_new = row_dots(r, z);
    for (Index k = 0; k < S; ++k) {
      if (done[k]) continue;
      const double beta = rz[k] != 0.0 ? rz_new[k] / rz[k] : 0.0;
      p.row(k) = z.row(k) + beta * p.row(k);
    }
    rz = rz_new;
    update_rel();
  }
  // True residual, not the recurrence.
  const Batch tr = l_hat(model, x) - b;
  res.residual.resize(S);
  for (Index k = 0; k < S; ++k) res.residual[k] = bnorm[k] > 0.0 ? std::sqrt(tr.row(k).squaredNorm()) / bnorm[k] : 0.0;
  res.x = std::move(x);
  res.iterations = it;
  return res;
}

Field solve_lhat(const CollisionModel& model, const Field& y, const SolveOptions& opt) {
  const Batch yb = y.transpose();
  return solve_lhat(model, yb, opt).x.row(0).transpose();
}

ABFields build_AB(const VelocityGrid& grid) {
  const Field s = sqrt_maxwellian(grid);
  const Field* v[3] = {&grid.vx, &grid.vy, &grid.vz};
  const Field v2 = (grid.vx.array().square() + grid.vy.array().square() + grid.vz.array().square()).matrix();
  ABFields ab;
  ab.A.resize(3, grid.size());
  for (int i = 0; i < 3; ++i) ab.A.row(i) = (0.5 * (v2.array() - 5.0) * v[i]->array() * s.array()).matrix().transpose();
  const int ij[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
  ab.B.resize(6, grid.size());
  for (int a = 0; a < 6; ++a) {
    const int i = ij[a][0], j = ij[a][1];
    Eigen::ArrayXd f = v[i]->array() * v[j]->array();
    if (i == j) f -= v2.array() / 3.0;
    ab.B.row(a) = (f * s.array()).matrix().transpose();
  }
  return ab;
}

void solve_AB(const CollisionModel& model, ABFields& ab, const SolveOptions& opt) {
  Batch y(9, model.grid().size());
  y.topRows(3) = ab.A;
  y.bottomRows(6) = ab.B;
  const SolveResult r = solve_lhat(model, y, opt);
  ab.Ahat = r.x.topRows(3);
  ab.Bhat = r.x.bottomRows(6);
  ab.residual = r.residual.maxCoeff();
  ab.iterations = r.iterations;
}

std::pair<double, double> compute_sigma_lambda(const CollisionModel& model) {
  const VelocityGrid& g = model.grid();
  const Field& s = model.sqrtM();
  const Field v1 = g.vx.cwiseProduct(s);
  const Field v2 = (g.vx.array().square() + g.vy.array().square() + g.vz.array().square()).matrix().cwiseProduct(s);
  const double inv_sigma = 0.5 * inner_product(g, l_hat_pair(model, v1, Field(-v1)), v1);
  const double inv_lambda = inner_product(g, l_hat_pair(model, v2, Field(-v2)), v2) / 20.0;
  if (!(inv_sigma > 0.0) || !(inv_lambda > 0.0) || !std::isfinite(inv_sigma) || !std::isfinite(inv_lambda))
    throw std::runtime_error("compute_sigma_lambda: non-positive coupling coefficient");
  return {1.0 / inv_sigma, 1.0 / inv_lambda};
}

TransportReport compute_transport(const CollisionModel& model, const SolveOptions& opt) {
  const VelocityGrid& g = model.grid();
  ABFields ab = build_AB(g);
  solve_AB(model, ab, opt);
  TransportReport rep;
  rep.solve_residual = ab.residual;
  rep.solve_iterations = ab.iterations;
  rep.AA = g.weight * ab.Ahat * ab.A.transpose();
  rep.BB = g.weight * ab.Bhat * ab.B.transpose();
  rep.coeffs.kappa = 0.4 * rep.AA(0, 0);
  rep.coeffs.mu = rep.BB(3, 3);

  const double a0 = rep.AA(0, 0);
  double ks = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ks = std::max(ks, std::abs(rep.AA(i, j) - (i == j ? a0 : 0.0)) / a0);
  rep.kappa_spread = ks;

  // Isotropic prediction mu (d_ik d_jl + d_il d_jk - 2/3 d_ij d_kl) for the six stored index pairs.
  const int ij[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
  double ms = 0.0;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      const int i = ij[a][0], j = ij[a][1], k = ij[b][0], l = ij[b][1];
      const double iso = double(i == k && j == l) + double(i == l && j == k) - (2.0 / 3.0) * double(i == j && k == l);
      ms = std::max(ms, std::abs(rep.BB(a, b) - rep.coeffs.mu * iso) / rep.coeffs.mu);
    }
  rep.mu_spread = ms;

  const Field* v[3] = {&g.vx, &g.vy, &g.vz};
  for (int i = 0; i < 3; ++i) {
    const Field vi = v[i]->cwiseProduct(model.sqrtM());
    rep.inv_sigma_components[i] = 0.5 * inner_product(g, l_hat_pair(model, vi, Field(-vi)), vi);
  }
  const auto [sig, lam] = compute_sigma_lambda(model);
  rep.coeffs.sigma = sig;
  rep.coeffs.lambda = lam;
  if (!(rep.coeffs.mu > 0.0) || !(rep.coeffs.kappa > 0.0))
    throw std::runtime_error("compute_transport: non-positive viscosity or conductivity");
  return rep;
}

std::pair<double, double> compute_mu_kappa(const CollisionModel& model, const SolveOptions& opt) {
  const VelocityGrid& g = model.grid();
  ABFields ab = build_AB(g);
  Batch y(2, g.size());
  y.row(0) = ab.A.row(0);
  y.row(1) = ab.B.row(3);
  const SolveResult r = solve_lhat(model, y, opt);
  const double kappa = 0.4 * g.weight * r.x.row(0).dot(y.row(0));
  const double mu = g.weight * r.x.row(1).dot(y.row(1));
  return {mu, kappa};
}

}  // namespace bte
