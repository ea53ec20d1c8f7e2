#include "bte/verify.hpp"

#include "bte/harness.hpp"
#include "bte/transport.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace bte {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  Field field(Index n, double a, double b) {
    Field f(n);
    for (Index i = 0; i < n; ++i) f[i] = uniform(a, b);
    return f;
  }
};

// Nonnegative, smooth test distribution: a sum of two random Maxwellians.
Field random_distribution(const VelocityGrid& g, Rng& rng) {
  Field f = Field::Zero(g.size());
  for (int k = 0; k < 2; ++k) {
    const Vec3 u(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    f += maxwellian(g, rng.uniform(0.5, 1.5), u, rng.uniform(0.6, 1.4));
  }
  return f;
}

// f(v) sum_{v*} B f(v*) w: the loss part of Q(f, f), the natural scale of its moments.
Field loss_term(const CollisionModel& model, const Field& f) {
  const VelocityGrid& g = model.grid();
  double bint = 0.0;
  for (std::size_t s = 0; s < model.sphere().size(); ++s)
    bint += model.sphere().weights[s] * model.kernel().b(model.sphere().directions[s].z());
  const double c = model.kernel().amplitude * bint * g.weight;
  const bool hs = model.kernel().gamma == 1.0;
  Field out(g.size());
  for (Index p = 0; p < g.size(); ++p) {
    const double vx = g.vx[p], vy = g.vy[p], vz = g.vz[p];
    double acc = 0.0;
    for (Index q = 0; q < g.size(); ++q) {
      const double dx = vx - g.vx[q], dy = vy - g.vy[q], dz = vz - g.vz[q];
      acc += (hs ? std::sqrt(dx * dx + dy * dy + dz * dz) : 1.0) * f[q];
    }
    out[p] = c * f[p] * acc;
  }
  return out;
}

Batch random_batch(Index rows, const CollisionModel& model, Rng& rng) {
  Batch b(rows, model.grid().size());
  for (Index r = 0; r < rows; ++r) b.row(r) = model.sqrtM().cwiseProduct(rng.field(model.grid().size(), -1, 1)).transpose();
  return b;
}

double dot_rows(const Batch& a, const Batch& b, Index r, double w) { return w * a.row(r).dot(b.row(r)); }

// ---------------------------------------------------------------------------------------------

CriterionResult criterion_conservation(const VerifyOptions& opt) {
  CriterionResult r{1, "collision-invariant conservation", false, "", 0.0, 120.0};
  const auto t0 = Clock::now();
  const int n = opt.quick ? 12 : 32;
  const int samples = opt.quick ? 4 : 50;
  const int chunk = 4;
  CollisionModel model(build_grid(6.0, n), build_sphere(6, 12), hard_sphere_kernel());
  const VelocityGrid& g = model.grid();
  const Eigen::MatrixXd phi = collision_invariant_fields(g, false);
  Rng rng(opt.seed);
  double raw = 0.0, fixed = 0.0;
  for (int s0 = 0; s0 < samples; s0 += chunk) {
    const int m = std::min(chunk, samples - s0);
    Batch F(m, g.size());
    for (int i = 0; i < m; ++i) F.row(i) = random_distribution(g, rng).transpose();
    const Batch Q = q_bilinear(model, F, F);
    const Batch Qc = conservative_correction(model, Q);
    for (int i = 0; i < m; ++i) {
      const Field loss = loss_term(model, F.row(i).transpose());
      for (int c = 0; c < phi.cols(); ++c) {
        const double scale = loss.dot(phi.col(c).cwiseAbs());
        raw = std::max(raw, std::abs(Q.row(i).dot(phi.col(c))) / scale);
        fixed = std::max(fixed, std::abs(Qc.row(i).dot(phi.col(c))) / scale);
      }
    }
    if (opt.log) opt.log("  conservation: " + std::to_string(s0 + m) + "/" + std::to_string(samples) + " samples, " +
                         sci(since(t0)) + " s");
  }
  r.seconds = since(t0);
  const bool numbers = raw <= 1e-3 && fixed <= 1e-9;
  const bool time_ok = opt.quick || r.seconds < r.runtime_target;
  r.pass = numbers && time_ok;
  r.detail = "N=" + std::to_string(n) + ", " + std::to_string(samples) + " samples: raw defect " + sci(raw) +
             (raw <= 1e-3 ? " <= " : " > ") + "1e-3, corrected " + sci(fixed) + (fixed <= 1e-9 ? " <= " : " > ") +
             "1e-9; runtime " + sci(r.seconds) + " s" + (opt.quick ? " (not judged)" : time_ok ? " < 120 s" : " > 120 s");
  return r;
}

CriterionResult criterion_oracle(const VerifyOptions& opt) {
  CriterionResult r{2, "q_bilinear vs direct summation", false, "", 0.0, 60.0};
  const auto t0 = Clock::now();
  CollisionModel model(build_grid(4.0, 8), build_sphere(6, 12), hard_sphere_kernel());
  Rng rng(opt.seed + 11);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Field f = random_distribution(model.grid(), rng).cwiseProduct(rng.field(model.grid().size(), 0.5, 1.5));
    const Field h = random_distribution(model.grid(), rng);
    worst = std::max(worst, (q_bilinear(model, f, h) - q_bilinear_direct(model, f, h)).cwiseAbs().maxCoeff());
  }
  r.seconds = since(t0);
  r.pass = worst <= 1e-12 && (opt.quick || r.seconds < r.runtime_target);
  r.detail = "8^3 grid, 10 inputs: max abs difference " + sci(worst) + " (tol 1e-12), " + sci(r.seconds) + " s";
  return r;
}

struct LinearData {
  std::unique_ptr<CollisionModel> model;
  Batch F1, F2, G1, G2;          // random pairs f, g
  Batch LF1, LF2, LG1, LG2;      // L applied
  Batch CF1, CF2, CG1, CG2;      // calL applied
};

LinearData linear_data(const VerifyOptions& opt, int samples) {
  LinearData d;
  const int n = opt.quick ? 8 : 12;
  d.model = std::make_unique<CollisionModel>(build_grid(6.0, n), build_sphere(6, 12), hard_sphere_kernel());
  Rng rf(opt.seed + 101), rg(opt.seed + 202);
  d.F1 = random_batch(samples, *d.model, rf);
  d.F2 = random_batch(samples, *d.model, rf);
  d.G1 = random_batch(samples, *d.model, rg);
  d.G2 = random_batch(samples, *d.model, rg);
  d.LF1 = l_hat(*d.model, d.F1);
  d.LF2 = l_hat(*d.model, d.F2);
  d.LG1 = l_hat(*d.model, d.G1);
  d.LG2 = l_hat(*d.model, d.G2);
  std::tie(d.CF1, d.CF2) = calL(*d.model, d.F1, d.F2);
  std::tie(d.CG1, d.CG2) = calL(*d.model, d.G1, d.G2);
  return d;
}

CriterionResult criterion_kernel_adjoint(const VerifyOptions& opt, const LinearData& d) {
  CriterionResult r{3, "kernels and self-adjointness", false, "", 0.0, 0.0};
  const auto t0 = Clock::now();
  const CollisionModel& model = *d.model;
  const VelocityGrid& g = model.grid();
  double kl = 0.0, kc = 0.0;
  for (const auto& psi : kernel_basis_L(g)) kl = std::max(kl, norm(g, vector_L(model, psi)) / norm(g, psi));
  for (const auto& phi : kernel_basis_calL(g)) kc = std::max(kc, norm(g, vector_calL(model, phi)) / norm(g, phi));
  const double w = g.weight;
  double adj_l = 0.0, adj_c = 0.0;
  for (Index i = 0; i < d.F1.rows(); ++i) {
    auto defect = [&](const Batch& Lf1, const Batch& Lf2, const Batch& Lg1, const Batch& Lg2) {
      const double a = dot_rows(Lf1, d.G1, i, w) + dot_rows(Lf2, d.G2, i, w);
      const double b = dot_rows(d.F1, Lg1, i, w) + dot_rows(d.F2, Lg2, i, w);
      const double lf = std::sqrt(dot_rows(Lf1, Lf1, i, w) + dot_rows(Lf2, Lf2, i, w));
      const double lg = std::sqrt(dot_rows(Lg1, Lg1, i, w) + dot_rows(Lg2, Lg2, i, w));
      const double nf = std::sqrt(dot_rows(d.F1, d.F1, i, w) + dot_rows(d.F2, d.F2, i, w));
      const double ng = std::sqrt(dot_rows(d.G1, d.G1, i, w) + dot_rows(d.G2, d.G2, i, w));
      return std::abs(a - b) / std::max(lf * ng, nf * lg);
    };
    adj_l = std::max(adj_l, defect(d.LF1, d.LF2, d.LG1, d.LG2));
    adj_c = std::max(adj_c, defect(d.CF1, d.CF2, d.CG1, d.CG2));
  }
  r.seconds = since(t0);
  r.pass = kl <= opt.tol_ker && kc <= opt.tol_ker && adj_l <= 1e-6 && adj_c <= 1e-6;
  r.detail = "N=" + std::to_string(g.n) + ": max |L psi|/|psi| " + sci(kl) + ", max |calL phi|/|phi| " + sci(kc) +
             " (tol " + sci(opt.tol_ker) + "); adjointness defect L " + sci(adj_l) + ", calL " + sci(adj_c) + " over " +
             std::to_string(d.F1.rows()) + " pairs (tol 1e-6)";
  return r;
}

CriterionResult criterion_coercivity(const VerifyOptions& opt, const LinearData& d) {
  CriterionResult r{4, "coercivity", false, "", 0.0, 0.0};
  (void)opt;
  const auto t0 = Clock::now();
  const CollisionModel& model = *d.model;
  const Projections proj(model.grid());
  const double w = model.grid().weight;
  const Field& nu = model.nu();
  auto fitted = [&](const Batch& g1, const Batch& g2, const Batch& L1, const Batch& L2, bool cal) {
    const BatchPair g(g1, g2);
    const BatchPair perp = g - (cal ? proj.calP(g) : proj.boldP(g));
    double lo = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < g1.rows(); ++i) {
      const double form = dot_rows(L1, g1, i, w) + dot_rows(L2, g2, i, w);
      const double pn = w * (perp.g1.row(i).cwiseAbs2().dot(nu) + perp.g2.row(i).cwiseAbs2().dot(nu));
      lo = std::min(lo, form / pn);
    }
    return lo;
  };
  const double dl_a = fitted(d.F1, d.F2, d.LF1, d.LF2, false), dl_b = fitted(d.G1, d.G2, d.LG1, d.LG2, false);
  const double dc_a = fitted(d.F1, d.F2, d.CF1, d.CF2, true), dc_b = fitted(d.G1, d.G2, d.CG1, d.CG2, true);
  const double sl = std::abs(dl_a - dl_b) / std::max(dl_a, dl_b);
  const double sc = std::abs(dc_a - dc_b) / std::max(dc_a, dc_b);
  r.seconds = since(t0);
  r.pass = dl_a > 0 && dl_b > 0 && dc_a > 0 && dc_b > 0 && sl <= 0.1 && sc <= 0.1;
  r.detail = "delta(L) = " + sci(dl_a) + " / " + sci(dl_b) + " (seed spread " + sci(100 * sl) + "%), delta(calL) = " +
             sci(dc_a) + " / " + sci(dc_b) + " (spread " + sci(100 * sc) + "%), " + std::to_string(d.F1.rows()) +
             " samples per seed";
  return r;
}

CriterionResult criterion_gamma_identity(const VerifyOptions& opt) {
  CriterionResult r{5, "Gamma-hat / L-hat identity on Ker L-hat", false, "", 0.0, 0.0};
  const auto t0 = Clock::now();
  const int n = opt.quick ? 8 : 12;
  CollisionModel model(build_grid(6.0, n), build_sphere(6, 12), hard_sphere_kernel());
  const VelocityGrid& g = model.grid();
  const Eigen::MatrixXd ker = collision_invariant_fields(g, true);
  Rng rng(opt.seed + 303);
  const int samples = 20;
  // Rows [samples, 2 samples) repeat the draws without the energy component, which isolates the
  // interpolation error on the quartic g^2 / sqrtM.
  Batch G(2 * samples, g.size()), G2(2 * samples, g.size());
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd c(ker.cols());
    for (Index k = 0; k < c.size(); ++k) c[k] = rng.uniform(-1, 1);
    for (int pass = 0; pass < 2; ++pass) {
      if (pass == 1) c[ker.cols() - 1] = 0.0;
      const Field gi = ker * c;
      G.row(i + pass * samples) = gi.transpose();
      G2.row(i + pass * samples) = square_amplitude(model, gi).transpose();
    }
  }
  const Batch lhs = gamma_hat(model, G, G);
  const Batch rhs = 0.5 * l_hat(model, G2);
  double worst = 0.0, worst_no_energy = 0.0;
  for (int i = 0; i < 2 * samples; ++i) {
    const double gn2 = g.weight * G.row(i).squaredNorm();
    const double e = std::sqrt(g.weight * (lhs.row(i) - rhs.row(i)).squaredNorm()) / gn2;
    (i < samples ? worst : worst_no_energy) = std::max(i < samples ? worst : worst_no_energy, e);
  }
  r.seconds = since(t0);
  r.pass = worst <= 1e-3;
  r.detail = "N=" + std::to_string(n) + ", 20 samples: max |Gamma(g,g) - L(g^2)/2| / |g|^2 = " + sci(worst) +
             " (tol 1e-3); without the energy component " + sci(worst_no_energy);
  return r;
}

CriterionResult criterion_transport(const VerifyOptions& opt) {
  CriterionResult r{6, "transport coefficients", false, "", 0.0, 0.0};
  const auto t0 = Clock::now();
  CollisionModel bgk(build_grid(6.0, 16), build_sphere(6, 12), bgk_kernel(1.0));
  const auto [mu_b, kappa_b] = compute_mu_kappa(bgk);
  const double eb = std::max(std::abs(mu_b - 1.0), std::abs(kappa_b - 1.0));
  const int n = opt.quick ? 10 : 12;
  CollisionModel hs(build_grid(6.0, n), build_sphere(6, 12), hard_sphere_kernel());
  const TransportReport rep = compute_transport(hs);
  const Vec3 is = rep.inv_sigma_components;
  const double sigma_spread = (is.maxCoeff() - is.minCoeff()) / is.mean();
  const double spread = std::max({rep.mu_spread, rep.kappa_spread, sigma_spread});
  const TransportCoefficients& c = rep.coeffs;
  r.seconds = since(t0);
  const bool positive = c.mu > 0 && c.kappa > 0 && c.sigma > 0 && c.lambda > 0;
  r.pass = eb <= 1e-4 && positive && spread <= 0.02;
  r.detail = "BGK nu=1: mu " + sci(mu_b) + ", kappa " + sci(kappa_b) + " (max rel error " + sci(eb) +
             ", tol 1e-4); hard sphere N=" + std::to_string(n) + ": mu " + sci(c.mu) + ", kappa " + sci(c.kappa) +
             ", sigma " + sci(c.sigma) + ", lambda " + sci(c.lambda) + ", isotropy spread " + sci(100 * spread) +
             "% (tol 2%)";
  return r;
}

CriterionResult criterion_regimes(const VerifyOptions& opt) {
  CriterionResult r{7, "regime table", false, "", 0.0, 1.0};
  const auto t0 = Clock::now();
  struct Case {
    const char* header;
    double rr, c1, c2;
    RegimeId id;
  };
  const Case cases[] = {
      {"r=1, c_l=c_n=1", 1.0, 1.0, 1.0, RegimeId::navier_stokes_fourier},
      {"r=1, 1<c_l<2, c_n=1", 1.0, 1.5, 1.0, RegimeId::euler_navier_stokes},
      {"r=1, 1<c_l=c_n<2", 1.0, 1.5, 1.5, RegimeId::euler_fourier},
      {"r>1, c_l=c_n=1", 1.5, 1.0, 1.0, RegimeId::stokes_fourier},
      {"r>1, 1<c_l<2r, c_n=1", 1.5, 2.5, 1.0, RegimeId::relaxation_stokes},
      {"r>1, 1<c_l=c_n<2r", 1.5, 2.5, 2.5, RegimeId::relaxation},
  };
  int ok = 0;
  std::string bad;
  for (const auto& c : cases) {
    const Regime g = classify(c.rr, c.c1, c.c2);
    if (g.id == c.id && g.case_header == c.header)
      ++ok;
    else
      bad += std::string(" [") + c.header + " -> " + g.name + "]";
  }
  bool rejected = false;
  try {
    classify(1.0, 1.3, 1.7);
  } catch (const UnclassifiedError&) {
    rejected = true;
  }
  r.seconds = since(t0);
  r.pass = ok == 6 && rejected && (opt.quick || r.seconds < r.runtime_target);
  r.detail = std::to_string(ok) + "/6 cases reproduced" + bad + "; (1, 1.3, 1.7) " +
             (rejected ? "rejected as unclassified" : "NOT rejected") + ", " + sci(r.seconds) + " s";
  return r;
}

FluidState taylor_green_state(const PeriodicGrid& space, double a1, double a2) {
  FluidState s = FluidState::zero(space.size());
  const Eigen::ArrayXd x = space.coordinate(0).array(), y = space.coordinate(1).array();
  const double a[2] = {a1, a2};
  for (int l = 0; l < 2; ++l) {
    s.u[l].col(0) = (a[l] * x.sin() * y.cos()).matrix();
    s.u[l].col(1) = (-a[l] * x.cos() * y.sin()).matrix();
    s.u[l].col(2) = (0.3 * a[l] * (x + y).sin()).matrix();
    s.theta[l] = (a[l] * (x.cos() + (2.0 * y).sin())).matrix();
  }
  return s;
}

CriterionResult criterion_fluid(const VerifyOptions& opt) {
  CriterionResult r{8, "fluid solver", false, "", 0.0, 120.0};
  const auto t0 = Clock::now();
  const int n = opt.quick ? 16 : 32;
  PeriodicGrid space(2, n);
  const TransportCoefficients coeffs{0.05, 0.08, 0.5, 0.7};
  const RegimeFlags nsf = classify(1, 1, 1).flags;

  // (a) solenoidality
  FluidSolver fs(space, coeffs, nsf);
  FluidState s = taylor_green_state(space, 1.0, 0.6);
  double div = 0.0;
  for (int k = 0; k < 100; ++k) {
    fs.step(s, std::min(0.01, fs.max_dt(s)));
    div = std::max(div, fs.max_divergence(s));
  }
  const bool a_ok = div <= 1e-10 && s.u[0].allFinite();

  // (b) decay of the difference mode with advection off
  const TransportCoefficients cb{0.3, 0.2, 0.8, 1.1};
  const RegimeFlags stokes = classify(1.5, 1, 1).flags;
  FluidSolver fb(space, cb, stokes);
  FluidState d = FluidState::zero(space.size());
  const Eigen::ArrayXd y = space.coordinate(1).array();
  d.u[0].col(0) = (2.0 * y).sin().matrix();
  d.u[1].col(0) = 0.5 * d.u[0].col(0);
  const double rate = cb.mu * 4.0 + 2.0 / cb.sigma;
  const double T = 1.0 / rate;
  const double d0 = std::sqrt(space.l2_squared(d.u[0] - d.u[1]).sum());
  for (int k = 0; k < 50; ++k) fb.step(d, T / 50);
  const double d1 = std::sqrt(space.l2_squared(d.u[0] - d.u[1]).sum());
  const double measured = -std::log(d1 / d0) / T;
  const double rate_err = std::abs(measured - rate) / rate;
  const bool b_ok = rate_err <= 0.01;

  // (c) species swap
  FluidState p = taylor_green_state(space, 1.0, 0.4);
  FluidState q = p;
  std::swap(q.u[0], q.u[1]);
  std::swap(q.theta[0], q.theta[1]);
  for (int k = 0; k < 20; ++k) {
    const double dt = std::min(0.01, fs.max_dt(p));
    fs.step(p, dt);
    fs.step(q, dt);
  }
  const double swap_diff = std::max({(p.u[0] - q.u[1]).cwiseAbs().maxCoeff(), (p.u[1] - q.u[0]).cwiseAbs().maxCoeff(),
                                     (p.theta[0] - q.theta[1]).cwiseAbs().maxCoeff(),
                                     (p.theta[1] - q.theta[0]).cwiseAbs().maxCoeff()});
  const bool c_ok = swap_diff == 0.0;

  // (d) kinetic-energy balance, residual against the trapezoidal integral of the dissipation rate
  auto energy_residual = [&](double dt, double t_end) {
    FluidState e = taylor_green_state(space, 1.0, 0.5);
    auto ke = [&](const FluidState& st) { return 0.5 * space.l2_squared(st.u[0]).sum() + 0.5 * space.l2_squared(st.u[1]).sum(); };
    double worst = 0.0, scale = 0.0;
    double k0 = ke(e), r0 = fs.energy_rate(e);
    const int steps = int(std::lround(t_end / dt));
    for (int k = 0; k < steps; ++k) {
      fs.step(e, dt);
      const double k1 = ke(e), r1 = fs.energy_rate(e);
      worst = std::max(worst, std::abs((k1 - k0) / dt - 0.5 * (r0 + r1)));
      scale = std::max({scale, std::abs(r0), std::abs(r1)});
      k0 = k1;
      r0 = r1;
    }
    return worst / scale;
  };
  const double e1 = energy_residual(0.02, 0.4), e2 = energy_residual(0.01, 0.4);
  const double order = std::log(e1 / e2) / std::log(2.0);
  const bool d_ok = e2 <= 1e-10 || (order >= 0.9 && e2 <= 1e-2);

  r.seconds = since(t0);
  r.pass = a_ok && b_ok && c_ok && d_ok && (opt.quick || r.seconds < r.runtime_target);
  r.detail = "(a) max div " + sci(div) + (a_ok ? " ok" : " FAIL") + "; (b) rate " + sci(measured) + " vs " + sci(rate) +
             ", rel err " + sci(rate_err) + (b_ok ? " ok" : " FAIL") + "; (c) swap difference " + sci(swap_diff) +
             (c_ok ? " ok" : " FAIL") + "; (d) relative energy residual " + sci(e1) + " -> " + sci(e2) + " (order " +
             sci(order) + ")" + (d_ok ? " ok" : " FAIL") + "; " + sci(r.seconds) + " s";
  return r;
}

struct KineticRunData {
  double drift_mass[2] = {0, 0}, drift_mom = 0, drift_energy = 0;
  double max_ratio = 0.0;
  double e0 = 0.0;
  long steps = 0;
  long positivity_warnings = 0;
  double seconds = 0.0;
};

KineticRunData kinetic_conservation_run(const VerifyOptions& opt) {
  const auto t0 = Clock::now();
  KineticRunData out;
  CollisionModel model(build_grid(6.0, 12), build_sphere(6, 12), bgk_kernel(1.0));
  Projections proj(model.grid());
  PeriodicGrid space(1, opt.quick ? 8 : 16);
  LimitConfig lc;
  lc.dim = 1;
  lc.n = space.n();
  const MacroFields m = initial_fields(space, lc);
  KineticConfig kc;
  kc.epsilon = 0.1;
  kc.t_end = 0.5;
  KineticSolver ks(space, model, proj, kc);
  KineticState st = make_well_prepared(space, model, m, kc.epsilon);
  const Conserved c0 = ks.conserved(st);
  double integral = 0.0, prev_d = 0.0, prev_t = 0.0;
  ks.run(st, [&](const KineticState& s, long k) {
    const EnergyReport e = ks.energy_monitors(s);
    if (k == 0) {
      out.e0 = e.E_s;
    } else {
      integral += 0.5 * (e.D_s + prev_d) * (s.t - prev_t);
    }
    prev_d = e.D_s;
    prev_t = s.t;
    out.max_ratio = std::max(out.max_ratio, (e.E_s + integral) / out.e0);
    const Conserved c = ks.conserved(s);
    out.drift_mass[0] = std::max(out.drift_mass[0], std::abs(c.mass[0] - c0.mass[0]));
    out.drift_mass[1] = std::max(out.drift_mass[1], std::abs(c.mass[1] - c0.mass[1]));
    out.drift_mom = std::max(out.drift_mom, (c.momentum - c0.momentum).norm());
    out.drift_energy = std::max(out.drift_energy, std::abs(c.energy - c0.energy));
    out.steps = k;
  });
  out.positivity_warnings = ks.positivity_warnings();
  out.seconds = since(t0);
  return out;
}

CriterionResult criterion_kinetic_conservation(const VerifyOptions& opt, const KineticRunData& d) {
  CriterionResult r{9, "kinetic conservation under evolution", false, "", d.seconds, 600.0};
  const double worst = std::max({d.drift_mass[0], d.drift_mass[1], d.drift_mom, d.drift_energy});
  r.pass = worst <= 1e-6 && (opt.quick || d.seconds < r.runtime_target);
  r.detail = "1-D, eps=0.1, t_end=0.5, " + std::to_string(d.steps) + " steps: drift mass " + sci(d.drift_mass[0]) +
             " / " + sci(d.drift_mass[1]) + ", momentum " + sci(d.drift_mom) + ", energy " + sci(d.drift_energy) +
             " (tol 1e-6); positivity warnings " + std::to_string(d.positivity_warnings) + "; " + sci(d.seconds) + " s";
  return r;
}

CriterionResult criterion_limit(const VerifyOptions& opt) {
  CriterionResult r{10, "hydrodynamic limit", false, "", 0.0, 3600.0};
  const auto t0 = Clock::now();
  CollisionModel model(build_grid(6.0, 12), build_sphere(6, 12), bgk_kernel(1.0));
  Projections proj(model.grid());
  bool ok = true;
  std::ostringstream det;
  for (int dim : {1, 2}) {
    LimitConfig cfg;
    cfg.dim = dim;
    cfg.n = dim == 1 ? 16 : (opt.quick ? 8 : 12);
    cfg.profile = dim == 1 ? InitialProfile::shear_wave : InitialProfile::taylor_green;
    cfg.kinetic.t_end = opt.quick && dim == 2 ? 0.2 : 0.5;
    cfg.workers = opt.workers;
    const ConvergenceReport rep = run_limit_experiment(model, proj, cfg);
    auto decreasing = [&](auto get) {
      for (std::size_t i = 1; i < rep.runs.size(); ++i)
        if (!(get(rep.runs[i]) < get(rep.runs[i - 1]))) return false;
      return true;
    };
    const bool u_dec = decreasing([](const RunSeries& s) { return s.sup_err_u; });
    const bool t_dec = decreasing([](const RunSeries& s) { return s.sup_err_theta; });
    const bool b_dec = decreasing([](const RunSeries& s) { return s.sup_boussinesq; });
    const bool d_dec = decreasing([](const RunSeries& s) { return s.sup_div; });
    double mi_lo = std::numeric_limits<double>::infinity(), mi_hi = 0.0;
    for (const auto& s : rep.runs) {
      mi_lo = std::min(mi_lo, s.micro_integral_total);
      mi_hi = std::max(mi_hi, s.micro_integral_total);
    }
    const double ou = rep.orders.at("err_u"), ot = rep.orders.at("err_theta");
    const double ob = rep.orders.at("boussinesq_res"), od = rep.orders.at("div_res");
    const bool pass = u_dec && t_dec && ou >= 0.8 && ot >= 0.8 && b_dec && d_dec && ob > 0 && od > 0 &&
                      mi_hi <= 2.0 * mi_lo;
    ok = ok && pass;
    det << "d=" << dim << " (n=" << cfg.n << "): order u " << sci(ou) << (u_dec ? "" : " non-monotone") << ", theta "
        << sci(ot) << (t_dec ? "" : " non-monotone") << ", boussinesq " << sci(ob) << (b_dec ? "" : " non-monotone")
        << ", div " << sci(od) << (d_dec ? "" : " non-monotone") << ", micro integral in [" << sci(mi_lo) << ", "
        << sci(mi_hi) << "]" << (pass ? " ok" : " FAIL") << "; ";
    if (opt.log) opt.log("  limit d=" + std::to_string(dim) + " done, " + sci(since(t0)) + " s");
  }
  r.seconds = since(t0);
  r.pass = ok && (opt.quick || r.seconds < r.runtime_target);
  det << sci(r.seconds) << " s";
  r.detail = det.str();
  return r;
}

CriterionResult criterion_energy(const VerifyOptions& opt, const KineticRunData& d) {
  CriterionResult r{11, "energy-functional bookkeeping", false, "", d.seconds, 0.0};
  (void)opt;
  const double bound = 10.0;
  r.pass = std::isfinite(d.max_ratio) && d.max_ratio <= bound;
  r.detail = "max_t [E_s(t) + int D_s] / E_s(0) = " + sci(d.max_ratio) + " (bounded by " + sci(bound) +
             "; E_s(0) = " + sci(d.e0) + ")";
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt) {
  auto want = [&](int id) { return opt.only.empty() || opt.only.count(id) > 0; };
  std::vector<CriterionResult> out;
  auto add = [&](CriterionResult r) {
    if (opt.log) opt.log(format_result(r));
    out.push_back(std::move(r));
  };
  auto guarded = [&](int id, const std::string& title, auto fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      add({id, title, false, std::string("error: ") + e.what(), 0.0, 0.0});
    }
  };
  if (want(1)) guarded(1, "collision-invariant conservation", [&] { add(criterion_conservation(opt)); });
  if (want(2)) guarded(2, "q_bilinear vs direct summation", [&] { add(criterion_oracle(opt)); });
  if (want(3) || want(4)) {
    guarded(3, "kernels and self-adjointness", [&] {
      const auto t0 = Clock::now();
      const LinearData d = linear_data(opt, opt.quick ? 20 : 100);
      const double setup = since(t0);
      if (want(3)) {
        CriterionResult r = criterion_kernel_adjoint(opt, d);
        r.seconds += setup;
        add(r);
      }
      if (want(4)) add(criterion_coercivity(opt, d));
    });
  }
  if (want(5)) guarded(5, "Gamma-hat / L-hat identity on Ker L-hat", [&] { add(criterion_gamma_identity(opt)); });
  if (want(6)) guarded(6, "transport coefficients", [&] { add(criterion_transport(opt)); });
  if (want(7)) guarded(7, "regime table", [&] { add(criterion_regimes(opt)); });
  if (want(8)) guarded(8, "fluid solver", [&] { add(criterion_fluid(opt)); });
  if (want(9) || want(11)) {
    guarded(9, "kinetic conservation under evolution", [&] {
      const KineticRunData d = kinetic_conservation_run(opt);
      if (want(9)) add(criterion_kinetic_conservation(opt, d));
      if (want(11)) add(criterion_energy(opt, d));
    });
  }
  if (want(10)) guarded(10, "hydrodynamic limit", [&] { add(criterion_limit(opt)); });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << "criterion " << (r.id < 10 ? " " : "") << r.id << "  " << (r.pass ? "PASS" : "FAIL") << "  " << r.title
     << ": " << r.detail;
  return os.str();
}

bool acceptance_ok(const std::vector<CriterionResult>& results, const std::set<int>& expected_failures) {
  for (const auto& r : results)
    if (!r.pass && expected_failures.count(r.id) == 0) return false;
  return true;
}

}  // namespace bte
