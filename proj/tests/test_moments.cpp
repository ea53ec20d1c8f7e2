#include "bte/moments.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace bte;

namespace {

const VelocityGrid& grid() {
  static const VelocityGrid g = build_grid(6.0, 12);
  return g;
}

const Projections& proj() {
  static const Projections p(grid());
  return p;
}

double dist(const DistributionPair& a, const DistributionPair& b) { return norm(grid(), a - b); }

DistributionPair scaled(const DistributionPair& a, double s) { return {a.g1 * s, a.g2 * s}; }

}  // namespace

TEST_CASE("kernel bases and their containment") {
  const auto psi = kernel_basis_L(grid());
  const auto phi = kernel_basis_calL(grid());
  REQUIRE(psi.size() == 10);
  REQUIRE(phi.size() == 6);
  for (int i = 0; i < 3; ++i) CHECK(dist(phi[2 + i], psi[2 + i] + psi[5 + i]) <= 1e-14);
  CHECK(dist(phi[5], scaled(psi[8] + psi[9], 1.5)) <= 1e-14);
  CHECK(dist(phi[0], psi[0]) == 0.0);
  CHECK(dist(phi[1], psi[1]) == 0.0);
  // every phi lies in span(psi): boldP leaves it unchanged
  for (const auto& f : phi) CHECK(dist(proj().boldP(f), f) <= 1e-12 * norm(grid(), f));
}

TEST_CASE("seventeen-moment basis is independent") {
  const auto b = seventeen_basis(grid());
  REQUIRE(b.size() == 17);
  const double cond = proj().space_17().gram_condition();
  MESSAGE("Gram condition number of the 17-moment basis: " << cond);
  CHECK(std::isfinite(cond));
  CHECK(cond < 1e6);
}

TEST_CASE("calP coefficients") {
  const auto phi = kernel_basis_calL(grid());
  const MomentState m3 = proj().calP_coefficients(phi[2]);
  CHECK(m3.u.x() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(m3.u.y()) <= 1e-12);
  CHECK(std::abs(m3.rho1) <= 1e-12);
  const Field s = sqrt_maxwellian(grid());
  const MomentState m1 = proj().calP_coefficients(DistributionPair{s, Field::Zero(grid().size())});
  CHECK(m1.rho1 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(m1.rho2) <= 1e-12);
  CHECK(m1.u.norm() <= 1e-12);
  CHECK(std::abs(m1.theta) <= 1e-8);
  // <phi_3, phi_3> = 2 summed over species
  CHECK(inner_product(grid(), phi[2], phi[2]) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("boldP coefficients") {
  const Field s = sqrt_maxwellian(grid());
  const PCoefficients c = proj().boldP_coefficients(DistributionPair{s, Field::Zero(grid().size())});
  CHECK(c.a1 == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(c.c1) <= 1e-8);
  CHECK(std::abs(c.a2) <= 1e-12);
  PCoefficients r;
  r.a1 = 0.3;
  r.a2 = -1.1;
  r.b1 = Vec3(0.2, 0.4, -0.5);
  r.b2 = Vec3(-0.7, 0.1, 0.9);
  r.c1 = 0.25;
  r.c2 = -0.6;
  const PCoefficients back = proj().boldP_coefficients(proj().reconstruct(r));
  CHECK(std::abs(back.a1 - r.a1) <= 1e-12);
  CHECK(std::abs(back.a2 - r.a2) <= 1e-12);
  CHECK((back.b1 - r.b1).norm() <= 1e-12);
  CHECK((back.b2 - r.b2).norm() <= 1e-12);
  CHECK(std::abs(back.c1 - r.c1) <= 1e-12);
  CHECK(std::abs(back.c2 - r.c2) <= 1e-12);
  MomentState m;
  m.rho1 = 0.4;
  m.rho2 = -0.2;
  m.u = Vec3(0.1, -0.3, 0.2);
  m.theta = 0.7;
  const MomentState mb = proj().calP_coefficients(proj().reconstruct(m));
  CHECK(std::abs(mb.rho1 - m.rho1) <= 1e-12);
  CHECK(std::abs(mb.rho2 - m.rho2) <= 1e-12);
  CHECK((mb.u - m.u).norm() <= 1e-12);
  CHECK(std::abs(mb.theta - m.theta) <= 1e-12);
}

TEST_CASE("projections are self-adjoint idempotents with calP inside boldP") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 10; ++k) {
    const DistributionPair f = test::random_pair(grid(), rng), g = test::random_pair(grid(), rng);
    const double nf = norm(grid(), f), ng = norm(grid(), g);
    const DistributionPair cf = proj().calP(f), bf = proj().boldP(f);
    CHECK(dist(proj().calP(cf), cf) <= 1e-10 * nf);
    CHECK(dist(proj().boldP(bf), bf) <= 1e-10 * nf);
    CHECK(std::abs(inner_product(grid(), cf, g) - inner_product(grid(), f, proj().calP(g))) <= 1e-10 * nf * ng);
    CHECK(std::abs(inner_product(grid(), bf, g) - inner_product(grid(), f, proj().boldP(g))) <= 1e-10 * nf * ng);
    CHECK(dist(proj().boldP(cf), cf) <= 1e-10 * nf);
    CHECK(dist(proj().calP(bf), cf) <= 1e-10 * nf);
  }
}

TEST_CASE("macro-micro split") {
  std::mt19937_64 rng(43);
  for (bool which : {true, false}) {
    for (int k = 0; k < 5; ++k) {
      const DistributionPair g = test::random_pair(grid(), rng);
      const auto [macro, micro] = proj().macro_micro_split(g, which);
      const double n2 = inner_product(grid(), g, g);
      CHECK(std::abs(inner_product(grid(), macro, micro)) <= 1e-10 * n2);
      CHECK(std::abs(n2 - inner_product(grid(), macro, macro) - inner_product(grid(), micro, micro)) <= 1e-10 * n2);
      CHECK(dist(macro + micro, g) <= 1e-14 * std::sqrt(n2));
      const auto [m2, micro2] = proj().macro_micro_split(micro, which);
      CHECK(dist(micro2, micro) <= 1e-10 * std::sqrt(n2));
      CHECK(norm(grid(), m2) <= 1e-10 * std::sqrt(n2));
    }
    for (const auto& b : kernel_basis_calL(grid()))
      CHECK(norm(grid(), proj().macro_micro_split(b, which).second) <= 1e-10 * norm(grid(), b));
  }
}

TEST_CASE("seventeen-moment coefficients") {
  const auto b = seventeen_basis(grid());
  for (int k = 0; k < 17; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(17);
    e[k] = 1.0;
    CHECK((proj().project_17(b[k]) - e).norm() <= 1e-10);
  }
  std::mt19937_64 rng(47);
  const DistributionPair f = test::random_pair(grid(), rng);
  const DistributionPair perp = f - proj().space_17().apply(f, true);
  CHECK(proj().project_17(perp).norm() <= 1e-10 * norm(grid(), f));
  // A calP-form field rho_l sqrtM + u.v sqrtM + theta (|v|^2 - 3)/2 sqrtM expands on beta^l, beta^l_i and beta_i:
  // (|v|^2 - 3)/2 = sum_i (v_i^2 - 1)/2, so beta_i carries theta/2 and beta^l picks up -3 theta/2.
  MomentState m;
  m.rho1 = 0.5;
  m.rho2 = -0.25;
  m.u = Vec3(0.2, -0.1, 0.3);
  m.theta = 0.4;
  const Eigen::VectorXd c = proj().project_17(proj().reconstruct(m));
  CHECK(c[0] == doctest::Approx(m.rho1 - 1.5 * m.theta).epsilon(1e-10));
  CHECK(c[1] == doctest::Approx(m.rho2 - 1.5 * m.theta).epsilon(1e-10));
  for (int i = 0; i < 3; ++i) {
    CHECK(c[2 + i] == doctest::Approx(m.u[i]).epsilon(1e-10));
    CHECK(c[5 + i] == doctest::Approx(m.u[i]).epsilon(1e-10));
    CHECK(c[8 + i] == doctest::Approx(0.5 * m.theta).epsilon(1e-10));
    CHECK(std::abs(c[11 + i]) <= 1e-10);
    CHECK(std::abs(c[14 + i]) <= 1e-10);
  }
}

TEST_CASE("hydrodynamic moments of the infinitesimal Maxwellian") {
  const VelocityGrid& g = grid();
  const Field s = sqrt_maxwellian(g);
  const Field v2 = (g.vx.array().square() + g.vy.array().square() + g.vz.array().square()).matrix();
  const double rho = 0.3, theta = -0.2;
  const Vec3 u(0.1, 0.25, -0.4);
  const Field f = ((rho + u.x() * g.vx.array() + u.y() * g.vy.array() + u.z() * g.vz.array() +
                    theta * 0.5 * (v2.array() - 3.0)) *
                   s.array())
                      .matrix();
  const HydroMoments h = proj().hydro_moments(DistributionPair{f, Field(2.0 * f)});
  // moments are plain grid quadratures: exact up to the lattice error of the Gaussian moments
  const double tol = 1e-5;
  CHECK(std::abs(h.rho[0] - rho) <= tol);
  CHECK((h.u[0] - u).norm() <= tol);
  CHECK(std::abs(h.theta[0] - theta) <= tol);
  CHECK(std::abs(h.rho[1] - 2 * rho) <= tol);
  CHECK((h.u[1] - 2 * u).norm() <= tol);
  // <f, (|v|^2/5 - 1) sqrtM> = 3/5 theta - 2/5 rho
  const Eigen::MatrixXd& obs = proj().observables();
  CHECK(std::abs(g.weight * f.dot(obs.col(5)) - (0.6 * theta - 0.4 * rho)) <= tol);
  const HydroMoments z = proj().hydro_moments(DistributionPair{Field::Zero(g.size()), Field::Zero(g.size())});
  CHECK(z.rho[0] == 0.0);
  CHECK(z.theta[1] == 0.0);
  CHECK(z.u[0].norm() == 0.0);
}

TEST_CASE("continuum coefficient formulas agree with the discrete Gram solve") {
  const Projections cont(grid(), false);
  std::mt19937_64 rng(53);
  for (int k = 0; k < 5; ++k) {
    const DistributionPair f = test::random_pair(grid(), rng);
    const double n = norm(grid(), f);
    CHECK(dist(cont.calP(f), proj().calP(f)) <= 1e-5 * n);
    CHECK(dist(cont.boldP(f), proj().boldP(f)) <= 1e-5 * n);
  }
}

TEST_CASE("batched projections agree with single-field ones") {
  std::mt19937_64 rng(59);
  BatchPair B = BatchPair::zero(3, grid().size());
  for (int r = 0; r < 3; ++r) B.set_row(r, test::random_pair(grid(), rng));
  const BatchPair C = proj().calP(B), P = proj().boldP(B);
  for (int r = 0; r < 3; ++r) {
    CHECK(dist(C.row(r), proj().calP(B.row(r))) <= 1e-13 * norm(grid(), B.row(r)));
    CHECK(dist(P.row(r), proj().boldP(B.row(r))) <= 1e-13 * norm(grid(), B.row(r)));
  }
}
