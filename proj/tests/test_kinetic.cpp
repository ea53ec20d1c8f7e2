#include "bte/kinetic.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bte;

namespace {

struct Setup {
  VelocityGrid vg;
  CollisionModel model;
  Projections proj;
  PeriodicGrid space;
  Setup(CollisionKernel k, int nv, double R, int dim, int nx)
      : vg(build_grid(R, nv)), model(vg, build_sphere(4, 8), std::move(k)), proj(vg), space(dim, nx) {}
};

Setup& bgk1d() {
  static Setup s(bgk_kernel(1.0), 8, 5.0, 1, 8);
  return s;
}

KineticConfig config(double eps = 0.1, double t_end = 0.05) {
  KineticConfig c;
  c.epsilon = eps;
  c.t_end = t_end;
  return c;
}

// Every spatial row equal to the same velocity field.
Batch uniform(Index nx, const Field& f) { return f.transpose().replicate(nx, 1); }

// Small amplitude: the quadratic BGK surrogate term blows up in finite time for O(1) polynomial tails.
BatchPair random_state(const Setup& s, std::mt19937_64& rng, double amp = 0.02) {
  BatchPair g = BatchPair::zero(s.space.size(), s.vg.size());
  const Field c1 = test::random_amplitude(s.vg, rng, 0.0), c2 = test::random_amplitude(s.vg, rng, 0.0);
  const Field d1 = test::random_amplitude(s.vg, rng, 0.0), d2 = test::random_amplitude(s.vg, rng, 0.0);
  for (Index p = 0; p < s.space.size(); ++p) {
    const double x = s.space.x(p, 0), y = s.space.x(p, 1);
    const double a = std::sin(x + 0.3) + 0.5 * std::cos(y), b = std::cos(2 * x) + 0.2;
    g.g1.row(p) = amp * (a * c1 + b * d1).transpose();
    g.g2.row(p) = amp * (b * c2 - a * d2).transpose();
  }
  return g;
}

double max_abs(const BatchPair& g) { return std::max(g.g1.cwiseAbs().maxCoeff(), g.g2.cwiseAbs().maxCoeff()); }

}  // namespace

TEST_CASE("configuration checks") {
  Setup& s = bgk1d();
  CHECK(parse_integrator("imex_euler") == Integrator::imex_euler);
  CHECK(to_string(parse_transport_scheme("upwind")) == "upwind");
  CHECK_THROWS_AS(parse_integrator("rk4"), std::invalid_argument);
  KineticConfig bad = config();
  bad.c1 = 2.5;
  CHECK_THROWS_AS(KineticSolver(s.space, s.model, s.proj, bad), std::invalid_argument);
  bad = config();
  bad.dt = 1.0;
  CHECK_THROWS_AS(KineticSolver(s.space, s.model, s.proj, bad), std::invalid_argument);
  const KineticSolver k(s.space, s.model, s.proj, config());
  CHECK(k.time_step() <= k.cfl_bound() * (1 + 1e-12));
  CHECK(std::abs(0.05 / k.time_step() - std::round(0.05 / k.time_step())) <= 1e-9);
  const Projections other(build_grid(5.0, 10));
  CHECK_THROWS_AS(KineticSolver(s.space, s.model, other, config()), std::invalid_argument);
}

TEST_CASE("the zero state is steady") {
  Setup& s = bgk1d();
  const KineticSolver k(s.space, s.model, s.proj, config());
  const BatchPair z = BatchPair::zero(s.space.size(), s.vg.size());
  CHECK(max_abs(k.rhs(z)) == 0.0);
  KineticState st{z, 0.0};
  k.step(st);
  CHECK(max_abs(st.g) == 0.0);
}

TEST_CASE("free transport") {
  Setup& s = bgk1d();
  const Field phi = sqrt_maxwellian(s.vg);
  auto wave = [&](const PeriodicGrid& sp, bool derivative) {
    Batch g(sp.size(), s.vg.size());
    for (Index p = 0; p < sp.size(); ++p)
      g.row(p) = (derivative ? Field(std::cos(sp.x(p, 0)) * s.vg.vx.cwiseProduct(phi)) : Field(std::sin(sp.x(p, 0)) * phi)).transpose();
    return g;
  };
  const KineticSolver spectral(s.space, s.model, s.proj, config());
  CHECK((spectral.transport_apply(wave(s.space, false)) - wave(s.space, true)).cwiseAbs().maxCoeff() <= 1e-12);

  KineticConfig up = config();
  up.transport = TransportScheme::upwind;
  double err[2];
  int i = 0;
  for (int n : {16, 32}) {
    const PeriodicGrid sp(1, n);
    const KineticSolver k(sp, s.model, s.proj, up);
    err[i++] = (k.transport_apply(wave(sp, false)) - wave(sp, true)).cwiseAbs().maxCoeff();
  }
  MESSAGE("upwind transport errors " << err[0] << " -> " << err[1]);
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(1.0).epsilon(0.15));

  // 2-D: v . grad acts along both axes
  const PeriodicGrid sp2(2, 8);
  const KineticSolver k2(sp2, s.model, s.proj, config());
  Batch g(sp2.size(), s.vg.size()), expect(sp2.size(), s.vg.size());
  for (Index p = 0; p < sp2.size(); ++p) {
    const double x = sp2.x(p, 0), y = sp2.x(p, 1);
    g.row(p) = (std::sin(x + 2 * y) * phi).transpose();
    expect.row(p) = (std::cos(x + 2 * y) * (s.vg.vx + 2 * s.vg.vy).cwiseProduct(phi)).transpose();
  }
  CHECK((k2.transport_apply(g) - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("uniform states in the joint kernel are steady") {
  Setup& s = bgk1d();
  KineticConfig lin = config();
  lin.nonlinear = false;
  const KineticSolver k(s.space, s.model, s.proj, lin);
  MomentState m;
  m.rho1 = 0.3;
  m.rho2 = -0.1;
  m.u = Vec3(0.2, -0.1, 0.05);
  m.theta = 0.15;
  const DistributionPair f = s.proj.reconstruct(m);
  const BatchPair g{uniform(s.space.size(), f.g1), uniform(s.space.size(), f.g2)};
  CHECK(max_abs(k.rhs(g)) <= 1e-11 * max_abs(g) / (0.1 * 0.1 * 0.1));
  // different species velocities exchange momentum
  PCoefficients c;
  c.b1 = Vec3(0.2, 0.0, 0.0);
  const DistributionPair h = s.proj.reconstruct(c);
  const BatchPair gh{uniform(s.space.size(), h.g1), uniform(s.space.size(), h.g2)};
  CHECK(max_abs(k.rhs(gh)) > 1e-3);
}

TEST_CASE("the micro part relaxes") {
  Setup& s = bgk1d();
  KineticConfig lin = config(0.1, 0.02);
  lin.nonlinear = false;
  const KineticSolver k(s.space, s.model, s.proj, lin);
  const Field sq = sqrt_maxwellian(s.vg);
  const Field b12 = s.vg.vx.cwiseProduct(s.vg.vy).cwiseProduct(sq);
  KineticState st{{uniform(s.space.size(), b12), uniform(s.space.size(), Field(-0.5 * b12))}, 0.0};
  double prev = k.micro_nu_squared(st.g);
  const double first = prev;
  k.run(st, [&](const KineticState& x, long step) {
    if (step == 0) return;
    const double now = k.micro_nu_squared(x.g);
    CHECK(now < prev);
    prev = now;
  });
  // BGK nu = 1 relaxes at eps^-2 = 100 per unit time, so e^-2 in energy after t = 0.02 and more with exchange
  CHECK(prev <= std::exp(-3.0) * first);
}

TEST_CASE("conservation") {
  Setup& s = bgk1d();
  std::mt19937_64 rng(5);
  for (auto integ : {Integrator::imex_rk2, Integrator::imex_euler}) {
    KineticConfig cfg = config(0.2, 0.05);
    cfg.integrator = integ;
    cfg.cfl = 0.1;
    const KineticSolver k(s.space, s.model, s.proj, cfg);
    KineticState st{random_state(s, rng), 0.0};
    const Conserved c0 = k.conserved(st);
    k.run(st);
    const Conserved c1 = k.conserved(st);
    CHECK(std::abs(c1.mass[0] - c0.mass[0]) <= 1e-13);
    CHECK(std::abs(c1.mass[1] - c0.mass[1]) <= 1e-13);
    CHECK((c1.momentum - c0.momentum).norm() <= 1e-13);
    CHECK(std::abs(c1.energy - c0.energy) <= 1e-12);
    CHECK(st.t == doctest::Approx(0.05));
  }
}

TEST_CASE("hard-sphere smoke run conserves the invariants") {
  static Setup hs(hard_sphere_kernel(), 8, 5.0, 1, 4);
  std::mt19937_64 rng(9);
  KineticConfig cfg = config(0.3, 0.02);
  const KineticSolver k(hs.space, hs.model, hs.proj, cfg);
  KineticState st{random_state(hs, rng), 0.0};
  const Conserved c0 = k.conserved(st);
  k.run(st);
  const Conserved c1 = k.conserved(st);
  const double drift = std::max({std::abs(c1.mass[0] - c0.mass[0]), std::abs(c1.mass[1] - c0.mass[1]),
                                 (c1.momentum - c0.momentum).norm(), std::abs(c1.energy - c0.energy)});
  MESSAGE("hard-sphere invariant drift " << drift);
  CHECK(drift <= 1e-12);
  CHECK(std::isfinite(k.energy_monitors(st).E_s));
}

TEST_CASE("energy monitors") {
  Setup& s = bgk1d();
  const KineticSolver k(s.space, s.model, s.proj, config());
  const BatchPair z = BatchPair::zero(s.space.size(), s.vg.size());
  const EnergyReport e0 = k.energy_monitors({z, 0.0});
  CHECK(e0.E_s == 0.0);
  CHECK(e0.D_s == 0.0);
  std::mt19937_64 rng(3);
  const DistributionPair f = test::random_pair(s.vg, rng);
  const KineticState st{{uniform(s.space.size(), f.g1), uniform(s.space.size(), f.g2)}, 0.0};
  const double expected = s.space.volume() * s.vg.weight * (f.g1.squaredNorm() + f.g2.squaredNorm());
  CHECK(k.energy_monitors(st).E_s == doctest::Approx(expected).epsilon(1e-12));
  const MonitorRow row = k.monitor_row(st);
  CHECK(row.E_s == doctest::Approx(expected).epsilon(1e-12));
  CHECK(row.micro_norm >= 0.0);
}

TEST_CASE("well-prepared initial data") {
  Setup& s = bgk1d();
  const Index nx = s.space.size();
  MacroFields m = MacroFields::zero(nx);
  const KineticState z = make_well_prepared(s.space, s.model, m, 0.1);
  CHECK(max_abs(z.g) == 0.0);

  for (Index p = 0; p < nx; ++p) {
    const double x = s.space.x(p, 0);
    m.u[0](p, 1) = 0.3 * std::sin(x);
    m.u[1](p, 2) = -0.2 * std::cos(x);
    m.theta[0][p] = 0.1 * std::cos(x);
    m.rho[0][p] = 0.05 - m.theta[0][p];
    m.theta[1][p] = -0.2;
    m.rho[1][p] = 0.3;
  }
  const KineticState st = make_well_prepared(s.space, s.model, m, 0.1, true);
  const KineticMoments back = extract_moments(s.proj, st.g.g1, st.g.g2);
  // lattice moments of the Gaussian at 8^3 on [-5, 5]^3 carry a small quadrature error
  const double tol = 2e-3;
  for (int l = 0; l < 2; ++l) {
    CHECK((back.m.rho[l] - m.rho[l]).cwiseAbs().maxCoeff() <= tol);
    CHECK((back.m.u[l] - m.u[l]).cwiseAbs().maxCoeff() <= tol);
    CHECK((back.m.theta[l] - m.theta[l]).cwiseAbs().maxCoeff() <= tol);
    const Field fluid = 0.6 * m.theta[l] - 0.4 * m.rho[l];
    CHECK((back.theta_fluid[l] - fluid).cwiseAbs().maxCoeff() <= tol);
  }
  CHECK(positivity_margin(s.model, st.g, 0.1) > 0.0);

  MacroFields big = MacroFields::zero(nx);
  big.rho[0].setConstant(-20.0);
  CHECK_THROWS_AS(make_well_prepared(s.space, s.model, big, 0.1), KineticError);

  MacroFields compressible = MacroFields::zero(nx);
  for (Index p = 0; p < nx; ++p) compressible.u[0](p, 0) = 0.1 * std::sin(s.space.x(p, 0));
  CHECK_NOTHROW(make_well_prepared(s.space, s.model, compressible, 0.1));
  CHECK_THROWS_AS(make_well_prepared(s.space, s.model, compressible, 0.1, true), std::invalid_argument);
  MacroFields boussinesq = MacroFields::zero(nx);
  for (Index p = 0; p < nx; ++p) boussinesq.rho[1][p] = 0.1 * std::cos(s.space.x(p, 0));
  CHECK_THROWS_AS(make_well_prepared(s.space, s.model, boussinesq, 0.1, true), std::invalid_argument);
  CHECK_THROWS_AS(make_well_prepared(s.space, s.model, MacroFields::zero(nx + 1), 0.1), std::invalid_argument);
}

TEST_CASE("time-step refinement") {
  Setup& s = bgk1d();
  std::mt19937_64 rng(13);
  const BatchPair init = random_state(s, rng);
  auto solve = [&](Integrator integ, double dt) {
    KineticConfig cfg = config(0.5, 0.2);
    cfg.integrator = integ;
    cfg.dt = dt;
    const KineticSolver k(s.space, s.model, s.proj, cfg);
    KineticState st{init, 0.0};
    k.run(st);
    return st.g;
  };
  for (auto [integ, expected] : {std::pair{Integrator::imex_rk2, 2.0}, std::pair{Integrator::imex_euler, 1.0}}) {
    const BatchPair a = solve(integ, 0.02), b = solve(integ, 0.01), c = solve(integ, 0.005);
    const double order = std::log2(max_abs(a - b) / max_abs(b - c));
    MESSAGE(to_string(integ) << " observed order " << order);
    CHECK(order == doctest::Approx(expected).epsilon(0.15));
  }
}
