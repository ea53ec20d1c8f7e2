#include "bte/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace bte {

InitialProfile parse_initial_profile(const std::string& s) {
  if (s == "zero") return InitialProfile::zero;
  if (s == "shear_wave") return InitialProfile::shear_wave;
  if (s == "taylor_green") return InitialProfile::taylor_green;
  throw std::invalid_argument("unknown initial profile '" + s + "' (expected zero, shear_wave or taylor_green)");
}

std::string to_string(InitialProfile p) {
  switch (p) {
    case InitialProfile::zero: return "zero";
    case InitialProfile::shear_wave: return "shear_wave";
    case InitialProfile::taylor_green: return "taylor_green";
  }
  return "?";
}

MacroFields initial_fields(const PeriodicGrid& space, const LimitConfig& cfg) {
  MacroFields m = MacroFields::zero(space.size());
  if (cfg.profile == InitialProfile::zero) return m;
  const Eigen::ArrayXd x = space.coordinate(0).array();
  const Eigen::ArrayXd y = space.coordinate(1).array();
  for (int l = 0; l < 2; ++l) {
    const double a = cfg.amplitude[l];
    if (cfg.profile == InitialProfile::shear_wave) {
      m.u[l].col(1) = (a * x.sin()).matrix();
      m.theta[l] = (a * x.cos()).matrix();
    } else {
      if (space.dim() != 2) throw std::invalid_argument("taylor_green profile needs a 2-D grid");
      m.u[l].col(0) = (a * x.sin() * y.cos()).matrix();
      m.u[l].col(1) = (-a * x.cos() * y.sin()).matrix();
      m.theta[l] = (a * x.cos() * y.cos()).matrix();
    }
    m.rho[l] = (cfg.density_offset - m.theta[l].array()).matrix();
  }
  return m;
}

FluidState fluid_initial_state(const PeriodicGrid& space, const MacroFields& m) {
  FluidState fl = FluidState::zero(space.size());
  for (int l = 0; l < 2; ++l) {
    fl.u[l] = leray_project(space, m.u[l]);
    fl.theta[l] = 0.6 * m.theta[l] - 0.4 * m.rho[l];
  }
  return fl;
}

double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

namespace {

double l2(const PeriodicGrid& space, const Eigen::MatrixXd& f) { return std::sqrt(space.l2_squared(f).sum()); }

void advance_fluid(const FluidSolver& fs, FluidState& s, double t_target) {
  const double span = t_target - s.t;
  if (span <= 0.0) return;
  const double cap = std::min(fs.max_dt(s), 0.05);
  const long n = std::max<long>(1, long(std::ceil(span / cap - 1e-9)));
  const double dt = span / double(n);
  for (long k = 0; k < n; ++k) fs.step(s, dt);
  s.t = t_target;
}

RunSeries run_one(const CollisionModel& model, const Projections& proj, const PeriodicGrid& space,
                  const LimitConfig& cfg, double eps, const TransportCoefficients& coeffs, const RegimeFlags& flags) {
  const auto wall0 = std::chrono::steady_clock::now();
  RunSeries rs;
  rs.epsilon = eps;
  KineticConfig kc = cfg.kinetic;
  kc.epsilon = eps;
  const MacroFields init = initial_fields(space, cfg);
  KineticSolver ks(space, model, proj, kc);
  KineticState st = make_well_prepared(space, model, init, eps);

  FluidSolver fs(space, coeffs, flags, cfg.fluid_cfl);
  FluidState fl = fluid_initial_state(space, init);

  const long steps = kc.t_end > 0.0 ? std::lround(kc.t_end / ks.time_step()) : 0;
  const long every = std::max<long>(1, steps / std::max(1, cfg.samples));
  const Conserved c0 = ks.conserved(st);
  double micro_acc = 0.0, prev_micro = ks.micro_nu_squared(st.g), prev_t = 0.0;

  auto sample = [&](const KineticState& s) {
    advance_fluid(fs, fl, s.t);
    const KineticMoments km = extract_moments(proj, s.g.g1, s.g.g2);
    double eu = 0.0, et = 0.0, eb = 0.0, ed = 0.0;
    for (int l = 0; l < 2; ++l) {
      const Eigen::MatrixXd pu = leray_project(space, km.m.u[l]);
      eu += space.l2_squared(pu - fl.u[l]).sum();
      et += space.l2_squared(km.theta_fluid[l] - fl.theta[l]).sum();
      const Field rt = km.m.rho[l] + km.m.theta[l];
      Field div = Field::Zero(space.size());
      for (int a = 0; a < space.dim(); ++a) {
        eb += space.l2_squared(space.derivative(rt, a)).sum();
        div += space.derivative(km.m.u[l].col(a), a);
      }
      ed += space.l2_squared(div).sum();
    }
    rs.t.push_back(s.t);
    rs.err_u.push_back(std::sqrt(eu));
    rs.err_theta.push_back(std::sqrt(et));
    rs.boussinesq_res.push_back(std::sqrt(eb));
    rs.div_res.push_back(std::sqrt(ed));
    rs.micro_integral.push_back(micro_acc / (eps * eps));
    rs.monitors.push_back(ks.monitor_row(s));
    const Conserved c = ks.conserved(s);
    const double drift = std::max({std::abs(c.mass[0] - c0.mass[0]), std::abs(c.mass[1] - c0.mass[1]),
                                   (c.momentum - c0.momentum).norm(), std::abs(c.energy - c0.energy)});
    rs.max_conservation_drift = std::max(rs.max_conservation_drift, drift);
  };

  ks.run(st, [&](const KineticState& s, long k) {
    if (k > 0) {
      const double m = ks.micro_nu_squared(s.g);
      micro_acc += 0.5 * (m + prev_micro) * (s.t - prev_t);
      prev_micro = m;
      prev_t = s.t;
    }
    if (k % every == 0 || k == steps) sample(s);
  });
  rs.positivity_warnings = ks.positivity_warnings();
  rs.micro_integral_total = micro_acc / (eps * eps);
  for (std::size_t i = 0; i < rs.t.size(); ++i) {
    rs.sup_err_u = std::max(rs.sup_err_u, rs.err_u[i]);
    rs.sup_err_theta = std::max(rs.sup_err_theta, rs.err_theta[i]);
    rs.sup_boussinesq = std::max(rs.sup_boussinesq, rs.boussinesq_res[i]);
    rs.sup_div = std::max(rs.sup_div, rs.div_res[i]);
  }
  rs.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return rs;
}

}  // namespace

ConvergenceReport run_limit_experiment(const CollisionModel& model, const Projections& proj, const LimitConfig& cfg) {
  if (cfg.eps_values.empty()) throw std::invalid_argument("limit experiment: empty epsilon list");
  for (std::size_t i = 1; i < cfg.eps_values.size(); ++i)
    if (!(cfg.eps_values[i] < cfg.eps_values[i - 1]))
      throw std::invalid_argument("limit experiment: epsilon list must be decreasing");
  const auto wall0 = std::chrono::steady_clock::now();
  ConvergenceReport rep;
  rep.eps_values = cfg.eps_values;
  const Regime regime = classify(cfg.kinetic.r, cfg.kinetic.c1, cfg.kinetic.c2);
  rep.regime = regime.name;
  const auto [mu, kappa] = compute_mu_kappa(model);
  const auto [sigma, lambda] = compute_sigma_lambda(model);
  rep.fluid_coeffs = {mu, kappa, sigma, lambda};

  PeriodicGrid space(cfg.dim, cfg.n);
  rep.runs.resize(cfg.eps_values.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::string first_error;
  auto worker = [&]() {
    for (std::size_t i = next++; i < cfg.eps_values.size(); i = next++) {
      const double eps = cfg.eps_values[i];
      try {
        rep.runs[i] = run_one(model, proj, space, cfg, eps, rep.fluid_coeffs, regime.flags);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        std::ostringstream os;
        os << "epsilon = " << eps << ": " << e.what();
        if (first_error.empty()) first_error = os.str();
      }
    }
  };
  const int nw = std::max(1, std::min<int>(cfg.workers, int(cfg.eps_values.size())));
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!first_error.empty()) throw HarnessError("limit experiment failed at " + first_error);

  if (rep.runs.size() >= 2) {
    std::vector<double> e, u, th, b, d, mi;
    for (const auto& r : rep.runs) {
      e.push_back(r.epsilon);
      u.push_back(r.sup_err_u);
      th.push_back(r.sup_err_theta);
      b.push_back(r.sup_boussinesq);
      d.push_back(r.sup_div);
      mi.push_back(r.micro_integral_total);
    }
    rep.orders["err_u"] = fitted_order(e, u);
    rep.orders["err_theta"] = fitted_order(e, th);
    rep.orders["boussinesq_res"] = fitted_order(e, b);
    rep.orders["div_res"] = fitted_order(e, d);
    rep.orders["micro_integral"] = fitted_order(e, mi);
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return rep;
}

void write_report_csv(const ConvergenceReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "eps,t,metric,value\n" << std::setprecision(12);
  for (const auto& run : r.runs) {
    const std::pair<const char*, const std::vector<double>*> cols[] = {
        {"err_u", &run.err_u},
        {"err_theta", &run.err_theta},
        {"boussinesq_res", &run.boussinesq_res},
        {"div_res", &run.div_res},
        {"micro_integral", &run.micro_integral}};
    for (std::size_t i = 0; i < run.t.size(); ++i)
      for (const auto& [name, v] : cols) out << run.epsilon << ',' << run.t[i] << ',' << name << ',' << (*v)[i] << '\n';
  }
}

void write_monitor_csv(const std::vector<MonitorRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,E_s,D_s,mass1,mass2,mom_total,energy_total,micro_norm\n" << std::setprecision(12);
  for (const auto& r : rows)
    out << r.t << ',' << r.E_s << ',' << r.D_s << ',' << r.mass1 << ',' << r.mass2 << ',' << r.mom_total << ','
        << r.energy_total << ',' << r.micro_norm << '\n';
}

std::vector<ConservationResidual> local_conservation_residuals(const KineticSolver& solver, KineticState state,
                                                               long steps) {
  const PeriodicGrid& space = solver.space();
  const VelocityGrid& vg = solver.model().grid();
  const double w = vg.weight;
  const double eps = solver.config().epsilon;
  const Field& s = solver.model().sqrtM();
  const Field v2 = vg.vx.cwiseAbs2() + vg.vy.cwiseAbs2() + vg.vz.cwiseAbs2();
  const Field* v[3] = {&vg.vx, &vg.vy, &vg.vz};
  const int d = space.dim();

  // Columns: rho1, rho2, m(3), e, then fluxes: F_rho1(d), F_rho2(d), F_m(3 x d), F_e(d).
  Eigen::MatrixXd dens(vg.size(), 6);
  dens.col(0) = s;
  for (int i = 0; i < 3; ++i) dens.col(1 + i) = v[i]->cwiseProduct(s);
  dens.col(4) = v2.cwiseProduct(s);
  dens.col(5) = Field::Zero(vg.size());

  struct Moments {
    Eigen::MatrixXd rho, mom, en;                   // size x 2, size x 3, size x 1
    std::vector<Eigen::MatrixXd> frho, fmom, fen;  // per axis
  };
  auto moments = [&](const KineticState& st) {
    Moments m;
    const Eigen::MatrixXd d1 = w * st.g.g1 * dens, d2 = w * st.g.g2 * dens;
    m.rho.resize(space.size(), 2);
    m.rho.col(0) = d1.col(0);
    m.rho.col(1) = d2.col(0);
    m.mom = d1.middleCols(1, 3) + d2.middleCols(1, 3);
    m.en = d1.col(4) + d2.col(4);
    for (int a = 0; a < d; ++a) {
      const Eigen::MatrixXd f1 = w * st.g.g1 * (v[a]->asDiagonal() * dens);
      const Eigen::MatrixXd f2 = w * st.g.g2 * (v[a]->asDiagonal() * dens);
      Eigen::MatrixXd fr(space.size(), 2);
      fr.col(0) = f1.col(0);
      fr.col(1) = f2.col(0);
      m.frho.push_back(fr);
      m.fmom.push_back(f1.middleCols(1, 3) + f2.middleCols(1, 3));
      m.fen.push_back(f1.col(4) + f2.col(4));
    }
    return m;
  };
  auto divergence = [&](const std::vector<Eigen::MatrixXd>& f) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f[0].rows(), f[0].cols());
    for (int a = 0; a < d; ++a) out += space.derivative(f[a], a);
    return out;
  };

  std::vector<ConservationResidual> res;
  const double dt = solver.time_step();
  Moments prev = moments(state);
  for (long k = 0; k < steps; ++k) {
    solver.step(state);
    const Moments cur = moments(state);
    const Eigen::MatrixXd rr = (cur.rho - prev.rho) / dt + divergence(prev.frho) / eps;
    const Eigen::MatrixXd rm = (cur.mom - prev.mom) / dt + divergence(prev.fmom) / eps;
    const Eigen::MatrixXd re = (cur.en - prev.en) / dt + divergence(prev.fen) / eps;
    ConservationResidual c;
    c.t = state.t;
    const Eigen::VectorXd nr = space.l2_squared(rr).cwiseSqrt();
    c.mass[0] = nr[0];
    c.mass[1] = nr[1];
    c.momentum = l2(space, rm);
    c.energy = l2(space, re);
    res.push_back(c);
    prev = cur;
  }
  return res;
}

}  // namespace bte
