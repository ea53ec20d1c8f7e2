#include "bte/kinetic.hpp"

#include "bte/collision.hpp"

#include <cmath>
#include <sstream>

namespace bte {

Integrator parse_integrator(const std::string& s) {
  if (s == "imex_euler") return Integrator::imex_euler;
  if (s == "imex_rk2") return Integrator::imex_rk2;
  throw std::invalid_argument("unknown integrator '" + s + "' (expected imex_euler or imex_rk2)");
}

std::string to_string(Integrator i) { return i == Integrator::imex_euler ? "imex_euler" : "imex_rk2"; }

TransportScheme parse_transport_scheme(const std::string& s) {
  if (s == "spectral") return TransportScheme::spectral;
  if (s == "upwind") return TransportScheme::upwind;
  throw std::invalid_argument("unknown transport scheme '" + s + "' (expected spectral or upwind)");
}

std::string to_string(TransportScheme t) { return t == TransportScheme::spectral ? "spectral" : "upwind"; }

void KineticConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("kinetic: epsilon must be positive");
  if (!(r >= 1.0)) throw std::invalid_argument("kinetic: r must be >= 1");
  if (!(c1 >= 1.0) || !(c2 >= 1.0)) throw std::invalid_argument("kinetic: c1, c2 must be >= 1");
  if (!(2.0 * r > std::max(c1, c2))) throw std::invalid_argument("kinetic: need 2r > max(c1, c2)");
  if (!(dt >= 0.0)) throw std::invalid_argument("kinetic: dt must be >= 0 (0 = automatic)");
  if (!(t_end >= 0.0)) throw std::invalid_argument("kinetic: t_end must be >= 0");
  if (!(cfl > 0.0)) throw std::invalid_argument("kinetic: cfl must be positive");
  if (sobolev_s < 1) throw std::invalid_argument("kinetic: sobolev order must be >= 1");
  if (monitor_every < 1) throw std::invalid_argument("kinetic: monitor interval must be >= 1");
}

MacroFields MacroFields::zero(Index size) {
  MacroFields m;
  for (int l = 0; l < 2; ++l) {
    m.rho[l] = Field::Zero(size);
    m.theta[l] = Field::Zero(size);
    m.u[l] = Eigen::MatrixXd::Zero(size, 3);
  }
  return m;
}

KineticMoments extract_moments(const Projections& proj, const Batch& g1, const Batch& g2) {
  const double w = proj.grid().weight;
  KineticMoments k;
  const Batch* g[2] = {&g1, &g2};
  for (int l = 0; l < 2; ++l) {
    const Eigen::MatrixXd mom = w * (*g[l]) * proj.observables();
    k.m.rho[l] = mom.col(0);
    k.m.u[l] = mom.middleCols(1, 3);
    k.m.theta[l] = mom.col(4);
    k.theta_fluid[l] = mom.col(5);
  }
  return k;
}

double positivity_margin(const CollisionModel& model, const BatchPair& g, double epsilon) {
  const Eigen::RowVectorXd M = model.M().transpose(), s = model.sqrtM().transpose();
  double lo = std::numeric_limits<double>::infinity();
  for (const Batch* b : {&g.g1, &g.g2}) {
    const Eigen::MatrixXd f = (epsilon * (b->array().rowwise() * s.array())).rowwise() + M.array();
    lo = std::min(lo, f.minCoeff());
  }
  return lo / model.M().maxCoeff();
}

KineticState make_well_prepared(const PeriodicGrid& space, const CollisionModel& model, const MacroFields& m,
                                double epsilon, bool strict) {
  const VelocityGrid& vg = model.grid();
  const Index nx = space.size();
  for (int l = 0; l < 2; ++l)
    if (m.rho[l].size() != nx || m.theta[l].size() != nx || m.u[l].rows() != nx || m.u[l].cols() != 3)
      throw std::invalid_argument("well-prepared data: fields do not match the spatial grid");
  if (strict) {
    for (int l = 0; l < 2; ++l) {
      Field div = Field::Zero(nx);
      for (int a = 0; a < space.dim(); ++a) div += space.derivative(m.u[l].col(a), a);
      if (div.cwiseAbs().maxCoeff() > 1e-8) throw std::invalid_argument("well-prepared data: div u is not zero");
      const Field rt = m.rho[l] + m.theta[l];
      for (int a = 0; a < space.dim(); ++a)
        if (space.derivative(rt, a).cwiseAbs().maxCoeff() > 1e-8)
          throw std::invalid_argument("well-prepared data: rho + theta is not spatially constant");
    }
  }
  const Field& s = model.sqrtM();
  const Field v2 = vg.vx.cwiseAbs2() + vg.vy.cwiseAbs2() + vg.vz.cwiseAbs2();
  Eigen::MatrixXd basis(vg.size(), 5);
  basis.col(0) = s;
  basis.col(1) = vg.vx.cwiseProduct(s);
  basis.col(2) = vg.vy.cwiseProduct(s);
  basis.col(3) = vg.vz.cwiseProduct(s);
  basis.col(4) = (0.5 * (v2.array() - 3.0) * s.array()).matrix();
  KineticState st;
  Batch* g[2] = {&st.g.g1, &st.g.g2};
  for (int l = 0; l < 2; ++l) {
    Eigen::MatrixXd c(nx, 5);
    c.col(0) = m.rho[l];
    c.middleCols(1, 3) = m.u[l];
    c.col(4) = m.theta[l];
    *g[l] = c * basis.transpose();
  }
  const double margin = positivity_margin(model, st.g, epsilon);
  if (margin < 0.0) {
    std::ostringstream os;
    os << "well-prepared data: M + eps g sqrtM is negative (relative minimum " << margin << ")";
    throw KineticError(os.str());
  }
  return st;
}

KineticSolver::KineticSolver(const PeriodicGrid& space, const CollisionModel& model, const Projections& proj,
                             KineticConfig cfg)
    : space_(space), model_(model), proj_(proj), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!proj_.grid().same_as(model_.grid())) throw std::invalid_argument("kinetic: projections use another grid");
  double dt = cfl_bound();
  if (cfg_.dt > 0.0) {
    if (cfg_.dt > dt * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "kinetic: dt = " << cfg_.dt << " exceeds the transport CFL bound " << dt;
      throw std::invalid_argument(os.str());
    }
    dt = cfg_.dt;
  }
  if (cfg_.t_end > 0.0) {
    const double steps = std::ceil(cfg_.t_end / dt - 1e-9);
    dt = cfg_.t_end / steps;
  }
  dt_ = dt;
}

// The transport symbol is bounded by R_v sum_a |k_a|, hence the factor d_x.
double KineticSolver::cfl_bound() const {
  return cfg_.cfl * space_.dx() * cfg_.epsilon / (model_.grid().radius * space_.dim());
}

double KineticSolver::stiff_coefficient(int l) const {
  return std::pow(cfg_.epsilon, -1.0 - (l == 0 ? cfg_.c1 : cfg_.c2));
}

Batch KineticSolver::transport_apply(const Batch& g) const {
  const VelocityGrid& vg = model_.grid();
  const Field* v[3] = {&vg.vx, &vg.vy, &vg.vz};
  Batch out = Batch::Zero(g.rows(), g.cols());
  if (cfg_.transport == TransportScheme::spectral) {
    const Spectrum G = space_.forward(g);
    for (int a = 0; a < space_.dim(); ++a) out += space_.backward(space_.ik(a).asDiagonal() * G) * v[a]->asDiagonal();
    return out;
  }
  const int n = space_.n();
  const double inv = 1.0 / space_.dx();
  for (int a = 0; a < space_.dim(); ++a) {
    Batch minus(g.rows(), g.cols()), plus(g.rows(), g.cols());
    for (Index p = 0; p < g.rows(); ++p) {
      Index pm, pp;
      if (space_.dim() == 1) {
        pm = (p + n - 1) % n;
        pp = (p + 1) % n;
      } else {
        const Index i = p / n, j = p % n;
        pm = a == 0 ? ((i + n - 1) % n) * n + j : i * n + (j + n - 1) % n;
        pp = a == 0 ? ((i + 1) % n) * n + j : i * n + (j + 1) % n;
      }
      minus.row(p) = (g.row(p) - g.row(pm)) * inv;
      plus.row(p) = (g.row(pp) - g.row(p)) * inv;
    }
    const Field vp = v[a]->cwiseMax(0.0), vm = v[a]->cwiseMin(0.0);
    out += minus * vp.asDiagonal() + plus * vm.asDiagonal();
  }
  return out;
}

BatchPair KineticSolver::explicit_part(const BatchPair& g) const {
  const double eps = cfg_.epsilon;
  const double c[2] = {cfg_.c1, cfg_.c2};
  const Batch* gs[2] = {&g.g1, &g.g2};
  Batch out[2];
  for (int l = 0; l < 2; ++l) {
    const Batch& gl = *gs[l];
    const Batch& gn = *gs[1 - l];
    Batch r = -transport_apply(gl) - eps * l_hat_pair(model_, gl, gn);
    if (cfg_.nonlinear) {
      r += std::pow(eps, cfg_.r - c[l]) * gamma_hat(model_, gl, gl);
      r += std::pow(eps, 2.0 * cfg_.r + 1.0 - c[l]) * gamma_hat(model_, gl, gn);
    }
    out[l] = r / eps;
  }
  return {std::move(out[0]), std::move(out[1])};
}

BatchPair KineticSolver::implicit_part(const BatchPair& g) const {
  return {-stiff_coefficient(0) * l_hat(model_, g.g1), -stiff_coefficient(1) * l_hat(model_, g.g2)};
}

BatchPair KineticSolver::rhs(const BatchPair& g) const { return explicit_part(g) + implicit_part(g); }

Batch KineticSolver::solve_species(const Batch& b, double a) const {
  if (!model_.kernel().is_quadrature()) {
    // L-hat = nu (I - P): the shifted system is diagonal in the kernel / complement split.
    const Eigen::MatrixXd& q = model_.kernel_projector().orthonormal();
    const Batch pb = (b * q) * q.transpose();
    return pb + (b - pb) / (1.0 + a * model_.kernel().bgk_nu);
  }
  // Batched preconditioned CG on (I + a L-hat) x = b, one system per row.
  const Eigen::RowVectorXd dinv = (1.0 + a * model_.nu().array()).inverse().matrix().transpose();
  auto apply = [&](const Batch& x) -> Batch { return x + a * l_hat(model_, x); };
  Batch x = b.array().rowwise() * dinv.array();
  Batch r = b - apply(x);
  Batch z = r.array().rowwise() * dinv.array();
  Batch p = z;
  Eigen::VectorXd rz = (r.cwiseProduct(z)).rowwise().sum();
  const Eigen::VectorXd bnorm = b.rowwise().norm();
  for (int it = 0; it < cfg_.implicit_max_iter; ++it) {
    const Eigen::VectorXd rn = r.rowwise().norm();
    if ((rn.array() <= cfg_.implicit_tol * bnorm.array().max(1e-300)).all()) return x;
    const Batch Ap = apply(p);
    const Eigen::VectorXd pAp = (p.cwiseProduct(Ap)).rowwise().sum();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(b.rows());
    for (Index i = 0; i < b.rows(); ++i)
      if (pAp[i] > 0.0) alpha[i] = rz[i] / pAp[i];
    x += alpha.asDiagonal() * p;
    r -= alpha.asDiagonal() * Ap;
    z = r.array().rowwise() * dinv.array();
    const Eigen::VectorXd rz_new = (r.cwiseProduct(z)).rowwise().sum();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(b.rows());
    for (Index i = 0; i < b.rows(); ++i)
      if (rz[i] > 0.0) beta[i] = rz_new[i] / rz[i];
    p = z + beta.asDiagonal() * p;
    rz = rz_new;
  }
  const Eigen::VectorXd rn = (b - apply(x)).rowwise().norm();
  if ((rn.array() <= 1e3 * cfg_.implicit_tol * bnorm.array().max(1e-300)).all()) return x;
  std::ostringstream os;
  os << "kinetic: implicit solve did not converge (max relative residual "
     << (rn.array() / bnorm.array().max(1e-300)).maxCoeff() << ")";
  throw KineticError(os.str());
}

BatchPair KineticSolver::solve_shifted(const BatchPair& b, double a1, double a2) const {
  return {solve_species(b.g1, a1), solve_species(b.g2, a2)};
}

void KineticSolver::step(KineticState& s) const {
  const double h = dt_;
  const double a[2] = {stiff_coefficient(0), stiff_coefficient(1)};
  if (cfg_.integrator == Integrator::imex_euler) {
    const BatchPair b = s.g + explicit_part(s.g) * h;
    s.g = solve_shifted(b, h * a[0], h * a[1]);
  } else {
    // ARS(2,2,2): L-stable, stiffly accurate implicit part.
    const double gam = 1.0 - 1.0 / std::sqrt(2.0);
    const double del = 1.0 - 1.0 / (2.0 * gam);
    const BatchPair e1 = explicit_part(s.g);
    const BatchPair b2 = s.g + e1 * (h * gam);
    const BatchPair y2 = solve_shifted(b2, h * gam * a[0], h * gam * a[1]);
    const BatchPair i2 = (y2 - b2) * (1.0 / (h * gam));
    const BatchPair e2 = explicit_part(y2);
    const BatchPair b3 = s.g + e1 * (h * del) + e2 * (h * (1.0 - del)) + i2 * (h * (1.0 - gam));
    s.g = solve_shifted(b3, h * gam * a[0], h * gam * a[1]);
  }
  if (!s.g.g1.allFinite() || !s.g.g2.allFinite()) throw KineticError("kinetic: non-finite state");
  s.t += h;
}

void KineticSolver::run(KineticState& s, const std::function<void(const KineticState&, long)>& observe) const {
  const long steps = cfg_.t_end > 0.0 ? std::lround(cfg_.t_end / dt_) : 0;
  if (observe) observe(s, 0);
  for (long k = 1; k <= steps; ++k) {
    step(s);
    if (cfg_.positivity_every > 0 && k % cfg_.positivity_every == 0 &&
        positivity_margin(model_, s.g, cfg_.epsilon) < 0.0)
      ++positivity_warnings_;
    if (observe && (k % cfg_.monitor_every == 0 || k == steps)) observe(s, k);
  }
}

namespace {

// sum over species and velocity nodes of the H^s norms of each column, times the velocity weight.
double hs_total(const PeriodicGrid& space, const Batch& g, int s, double w) { return w * space.hs_squared(g, s).sum(); }

}  // namespace

double KineticSolver::micro_nu_squared(const BatchPair& g) const {
  const BatchPair m = g - proj_.boldP(g);
  const Field& nu = model_.nu();
  const double w = model_.grid().weight;
  return w * space_.cell_volume() *
         ((m.g1.cwiseAbs2() * nu).sum() + (m.g2.cwiseAbs2() * nu).sum());
}

EnergyReport KineticSolver::energy_monitors(const KineticState& st) const {
  const int s = cfg_.sobolev_s;
  const double w = model_.grid().weight;
  const double eps = cfg_.epsilon;
  EnergyReport r;
  r.t = st.t;
  r.E_s = hs_total(space_, st.g.g1, s, w) + hs_total(space_, st.g.g2, s, w);
  const Eigen::VectorXd sq = model_.nu().cwiseSqrt();
  const BatchPair bold = st.g - proj_.boldP(st.g);
  const BatchPair calp = proj_.calP(st.g);
  const BatchPair cal = st.g - calp;
  const double d_bold = hs_total(space_, bold.g1 * sq.asDiagonal(), s, w) + hs_total(space_, bold.g2 * sq.asDiagonal(), s, w);
  const double d_cal = hs_total(space_, cal.g1 * sq.asDiagonal(), s, w) + hs_total(space_, cal.g2 * sq.asDiagonal(), s, w);
  // sum over 1 <= |alpha| <= s of ||d^alpha P g||^2
  const double d_grad = hs_total(space_, calp.g1, s, w) + hs_total(space_, calp.g2, s, w) -
                        w * (space_.l2_squared(calp.g1).sum() + space_.l2_squared(calp.g2).sum());
  r.D_s = d_bold / (eps * eps) + eps * d_cal + std::max(0.0, d_grad);
  return r;
}

Conserved KineticSolver::conserved(const KineticState& st) const {
  const VelocityGrid& vg = model_.grid();
  const double w = vg.weight;
  const Field& s = model_.sqrtM();
  const Field v2s = (vg.vx.cwiseAbs2() + vg.vy.cwiseAbs2() + vg.vz.cwiseAbs2()).cwiseProduct(s);
  Conserved c;
  const Batch* g[2] = {&st.g.g1, &st.g.g2};
  const double nx = double(space_.size());
  for (int l = 0; l < 2; ++l) {
    const Eigen::VectorXd colsum = g[l]->colwise().sum().transpose() / nx;
    c.mass[l] = w * colsum.dot(s);
    c.momentum += w * Vec3(colsum.dot(vg.vx.cwiseProduct(s)), colsum.dot(vg.vy.cwiseProduct(s)),
                           colsum.dot(vg.vz.cwiseProduct(s)));
    c.energy += w * colsum.dot(v2s);
  }
  return c;
}

MonitorRow KineticSolver::monitor_row(const KineticState& st) const {
  const EnergyReport e = energy_monitors(st);
  const Conserved c = conserved(st);
  const BatchPair m = st.g - proj_.boldP(st.g);
  const double w = model_.grid().weight;
  const double micro = std::sqrt(w * (space_.l2_squared(m.g1).sum() + space_.l2_squared(m.g2).sum()));
  return {st.t, e.E_s, e.D_s, c.mass[0], c.mass[1], c.momentum.norm(), c.energy, micro};
}

}  // namespace bte
