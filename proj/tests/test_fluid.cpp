#include "bte/fluid.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bte;

namespace {

TransportCoefficients coeffs(double mu = 0.7, double kappa = 0.9, double sigma = 1.3, double lambda = 2.1) {
  TransportCoefficients c;
  c.mu = mu;
  c.kappa = kappa;
  c.sigma = sigma;
  c.lambda = lambda;
  return c;
}

RegimeFlags all_on() { return classify(1, 1, 1).flags; }

RegimeFlags coupling_only() { return classify(2, 3, 3).flags; }

// Random smooth state with a few low modes per field; velocities are projected.
FluidState random_state(const PeriodicGrid& g, std::mt19937_64& rng, double amp = 0.3) {
  std::normal_distribution<double> nd;
  FluidState s = FluidState::zero(g.size());
  auto smooth = [&]() {
    Field f = Field::Zero(g.size());
    for (int k = 0; k < 4; ++k) {
      const int k0 = 1 + k % 3, k1 = g.dim() == 2 ? k % 2 : 0;
      const double a = amp * nd(rng) / (1 + k), ph = nd(rng);
      for (Index p = 0; p < g.size(); ++p) f[p] += a * std::cos(k0 * g.x(p, 0) + k1 * g.x(p, 1) + ph);
    }
    return f;
  };
  for (int l = 0; l < 2; ++l) {
    Eigen::MatrixXd u(g.size(), 3);
    for (int c = 0; c < 3; ++c) u.col(c) = smooth();
    s.u[l] = leray_project(g, u);
    s.theta[l] = smooth();
  }
  return s;
}

FluidState swapped(const FluidState& s) {
  FluidState o = s;
  std::swap(o.u[0], o.u[1]);
  std::swap(o.theta[0], o.theta[1]);
  std::swap(o.p[0], o.p[1]);
  return o;
}

double l2(const PeriodicGrid& g, const Eigen::MatrixXd& f) { return std::sqrt(g.l2_squared(f).sum()); }

}  // namespace

TEST_CASE("Leray projection") {
  const PeriodicGrid g(2, 16);
  Field phi(g.size());
  for (Index p = 0; p < g.size(); ++p) phi[p] = std::sin(g.x(p, 0)) * std::cos(2 * g.x(p, 1)) + std::cos(3 * g.x(p, 0));
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(g.size(), 3);
  grad.col(0) = g.derivative(phi, 0);
  grad.col(1) = g.derivative(phi, 1);
  CHECK(leray_project(g, grad).cwiseAbs().maxCoeff() <= 1e-12);

  Eigen::MatrixXd tg = Eigen::MatrixXd::Zero(g.size(), 3);
  for (Index p = 0; p < g.size(); ++p) {
    tg(p, 0) = std::sin(g.x(p, 0)) * std::cos(g.x(p, 1));
    tg(p, 1) = -std::cos(g.x(p, 0)) * std::sin(g.x(p, 1));
    tg(p, 2) = std::sin(g.x(p, 1));  // unresolved component passes through
  }
  CHECK((leray_project(g, tg) - tg).cwiseAbs().maxCoeff() <= 1e-13);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd w(g.size(), 3);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = nd(rng);
  const Eigen::MatrixXd pw = leray_project(g, w);
  CHECK((leray_project(g, pw) - pw).cwiseAbs().maxCoeff() <= 1e-12);
  // the mean survives, and the projection is orthogonal
  CHECK(std::abs(pw.col(0).mean() - w.col(0).mean()) <= 1e-13);
  CHECK(std::abs((pw.array() * (w - pw).array()).sum()) <= 1e-9 * w.squaredNorm());
  CHECK_THROWS_AS(leray_project(g, Eigen::MatrixXd::Zero(g.size(), 2)), std::invalid_argument);
}

TEST_CASE("exchange and diffusion of a single shear mode") {
  const PeriodicGrid g(1, 16);
  const TransportCoefficients c = coeffs();
  const FluidSolver solver(g, c, all_on());
  const int k = 2;
  Field shear(g.size()), th(g.size());
  for (Index p = 0; p < g.size(); ++p) {
    shear[p] = std::sin(k * g.x(p, 0));
    th[p] = std::cos(k * g.x(p, 0));
  }
  const double T = 0.4, dt = 0.01;
  auto run = [&](double s2, double t2) {
    FluidState s = FluidState::zero(g.size());
    s.u[0].col(1) = shear;
    s.u[1].col(1) = s2 * shear;
    s.theta[0] = th;
    s.theta[1] = t2 * th;
    for (int n = 0; n < int(std::lround(T / dt)); ++n) solver.step(s, dt);
    return s;
  };
  // equal species: no exchange, pure diffusion
  const FluidState same = run(1.0, 1.0);
  CHECK((same.u[0].col(1) - std::exp(-c.mu * k * k * T) * shear).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((same.theta[1] - std::exp(-c.kappa * k * k * T) * th).cwiseAbs().maxCoeff() <= 1e-12);
  // opposite species: the difference also relaxes at 2/sigma and 2/lambda
  const FluidState opp = run(-1.0, -1.0);
  CHECK((opp.u[0].col(1) - std::exp(-(c.mu * k * k + 2 / c.sigma) * T) * shear).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((opp.theta[0] - std::exp(-(c.kappa * k * k + 2 / c.lambda) * T) * th).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((opp.u[0] + opp.u[1]).cwiseAbs().maxCoeff() <= 1e-14);
  // the zero state stays zero
  FluidState z = FluidState::zero(g.size());
  solver.step(z, dt);
  CHECK(z.u[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.theta[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pressure") {
  const PeriodicGrid g(2, 16);
  FluidState s = FluidState::zero(g.size());
  Field expected(g.size());
  for (Index p = 0; p < g.size(); ++p) {
    const double x = g.x(p, 0), y = g.x(p, 1);
    s.u[0](p, 0) = s.u[1](p, 0) = std::sin(x) * std::cos(y);
    s.u[0](p, 1) = s.u[1](p, 1) = -std::cos(x) * std::sin(y);
    expected[p] = 0.25 * (std::cos(2 * x) + std::cos(2 * y));
  }
  const auto [p1, p2] = FluidSolver(g, coeffs(), all_on()).pressure(s);
  CHECK((p1 - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((p2 - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(p1.mean()) <= 1e-14);
  const auto [q1, q2] = FluidSolver(g, coeffs(), classify(2, 1, 1).flags).pressure(s);
  CHECK(q1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(q2.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("relaxation regime: sums conserved, differences decay exactly") {
  const PeriodicGrid g(2, 12);
  const TransportCoefficients c = coeffs();
  const FluidSolver solver(g, c, coupling_only());
  std::mt19937_64 rng(2);
  FluidState s = random_state(g, rng);
  const FluidState s0 = s;
  const double dt = 0.05;
  for (int n = 0; n < 10; ++n) solver.step(s, dt);
  const double T = 0.5;
  CHECK(((s.u[0] + s.u[1]) - (s0.u[0] + s0.u[1])).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(((s.theta[0] + s.theta[1]) - (s0.theta[0] + s0.theta[1])).cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::MatrixXd du = std::exp(-2 * T / c.sigma) * (s0.u[0] - s0.u[1]);
  const Field dth = std::exp(-2 * T / c.lambda) * (s0.theta[0] - s0.theta[1]);
  CHECK((s.u[0] - s.u[1] - du).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((s.theta[0] - s.theta[1] - dth).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::isinf(solver.max_dt(s)));
}

TEST_CASE("energy balance converges at second order") {
  const PeriodicGrid g(2, 16);
  const FluidSolver solver(g, coeffs(0.2, 0.3, 1.0, 5.0 / 3.0), all_on());
  std::mt19937_64 rng(4);
  const FluidState init = random_state(g, rng, 0.5);
  const double T = 0.4;
  auto residual = [&](int steps) {
    FluidState s = init;
    const double dt = T / steps;
    auto ke = [&](const FluidState& x) { return 0.5 * (g.l2_squared(x.u[0]).sum() + g.l2_squared(x.u[1]).sum()); };
    const double e0 = ke(s);
    double integral = 0.0, r_prev = solver.energy_rate(s);
    for (int n = 0; n < steps; ++n) {
      solver.step(s, dt);
      const double r = solver.energy_rate(s);
      integral += 0.5 * dt * (r_prev + r);
      r_prev = r;
    }
    return std::abs(ke(s) - e0 - integral);
  };
  const double r1 = residual(20), r2 = residual(40);
  MESSAGE("energy residuals " << r1 << " -> " << r2);
  CHECK(std::log2(r1 / r2) >= 1.8);
}

TEST_CASE("species swap symmetry and incompressibility") {
  const PeriodicGrid g(2, 16);
  const FluidSolver solver(g, coeffs(), all_on());
  std::mt19937_64 rng(6);
  FluidState a = random_state(g, rng);
  FluidState b = swapped(a);
  for (int n = 0; n < 5; ++n) {
    solver.step(a, 0.02);
    solver.step(b, 0.02);
  }
  const FluidState sb = swapped(b);
  CHECK((a.u[0] - sb.u[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.u[1] - sb.u[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.theta[0] - sb.theta[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK(solver.max_divergence(a) <= 1e-10);
  CHECK(a.t == doctest::Approx(0.1));

  // a mixed regime: swapping species and flags together
  const FluidSolver mixed(g, coeffs(), classify(1, 1.5, 1).flags);
  const FluidSolver mixed_swapped(g, coeffs(), classify(1, 1, 1.5).flags);
  FluidState c = random_state(g, rng), d = swapped(c);
  for (int n = 0; n < 5; ++n) {
    mixed.step(c, 0.02);
    mixed_swapped.step(d, 0.02);
  }
  CHECK((c.u[0] - swapped(d).u[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((c.theta[1] - swapped(d).theta[1]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a non-solenoidal start is projected") {
  const PeriodicGrid g(2, 16);
  const FluidSolver solver(g, coeffs(), all_on());
  FluidState s = FluidState::zero(g.size());
  for (Index p = 0; p < g.size(); ++p) s.u[0](p, 0) = 0.2 * std::sin(g.x(p, 0));
  CHECK(solver.max_divergence(s) > 0.1);
  solver.step(s, 0.01);
  CHECK(solver.max_divergence(s) <= 1e-12);
  CHECK(l2(g, s.u[0]) <= 1e-12);
}

TEST_CASE("failures are reported") {
  const PeriodicGrid g(1, 8);
  CHECK_THROWS_AS(FluidSolver(g, coeffs(-1.0), all_on()), std::invalid_argument);
  CHECK_THROWS_AS(FluidSolver(g, coeffs(1, 1, 0.0), all_on()), std::invalid_argument);
  const FluidSolver solver(g, coeffs(), all_on());
  FluidState s = FluidState::zero(g.size());
  CHECK_THROWS_AS(solver.step(s, 0.0), FluidError);
  s.theta[0][3] = NAN;
  CHECK_THROWS_AS(solver.step(s, 0.01), FluidError);
  FluidState fast = FluidState::zero(g.size());
  fast.u[0].col(0).setConstant(100.0);
  CHECK_THROWS_AS(solver.step(fast, 0.1), FluidError);
}
