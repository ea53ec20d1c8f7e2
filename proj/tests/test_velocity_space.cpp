#include "bte/velocity_space.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace bte;

TEST_CASE("grid layout and weights") {
  const VelocityGrid g = build_grid(6.0, 16);
  CHECK(g.size() == 4096);
  CHECK(g.weights().sum() == doctest::Approx(1728.0).epsilon(1e-14));
  CHECK(g.vx.minCoeff() > -6.0);
  CHECK(g.vx.maxCoeff() < 6.0);
  CHECK((g.weights().array() > 0).all());
}

TEST_CASE("grid preconditions") {
  CHECK_THROWS_AS(build_grid(3.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(6.0, 15), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(6.0, 6), std::invalid_argument);
}

TEST_CASE("Maxwellian mass is one-sided and matches the Gaussian tail bound") {
  const VelocityGrid g = build_grid(6.0, 16);
  const double mass = g.weight * global_maxwellian(g).sum();
  const double tail = std::pow(std::erf(6.0 / std::sqrt(2.0)), 3);
  CHECK(mass <= 1.0);
  CHECK(mass >= 0.999);
  CHECK(std::abs(mass - tail) <= 5e-9);
}

TEST_CASE("Maxwellian values and moments") {
  CHECK(maxwellian_value<double>(Vec3::Zero(), 1.0, Vec3::Zero(), 1.0) ==
        doctest::Approx(std::pow(2.0 * EIGEN_PI, -1.5)).epsilon(1e-15));
  CHECK(std::pow(2.0 * EIGEN_PI, -1.5) == doctest::Approx(0.06349).epsilon(1e-4));
  const VelocityGrid g = build_grid(6.0, 16);
  const Field m = maxwellian(g, 1.0, Vec3::Zero(), 1.0);
  const Field v2 = (g.vx.array().square() + g.vy.array().square() + g.vz.array().square()).matrix();
  CHECK(g.weight * m.sum() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(g.weight * m.dot(g.vx)) < 1e-14);
  CHECK(g.weight * m.dot(v2) == doctest::Approx(3.0).epsilon(1e-6));
  const Field m2 = maxwellian(g, 2.0, Vec3::Zero(), 1.0);
  CHECK((m2 - 2.0 * m).cwiseAbs().maxCoeff() == 0.0);
  const Field shifted = maxwellian(g, 1.3, Vec3(0.4, -0.2, 0.1), 0.8);
  CHECK(g.weight * shifted.sum() == doctest::Approx(1.3).epsilon(1e-7));
  CHECK(g.weight * shifted.dot(g.vx) / 1.3 == doctest::Approx(0.4).epsilon(1e-7));
  CHECK_THROWS_AS(maxwellian(g, 0.0, Vec3::Zero(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(maxwellian(g, 1.0, Vec3::Zero(), -1.0), std::invalid_argument);
}

TEST_CASE("quadrature exactness for v^alpha M with |alpha| <= 4") {
  const VelocityGrid g = build_grid(6.0, 32);
  const Field m = global_maxwellian(g);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b)
      for (int c = 0; a + b + c <= 4; ++c) {
        const double q =
            g.weight * (g.vx.array().pow(a) * g.vy.array().pow(b) * g.vz.array().pow(c) * m.array()).sum();
        const double exact = test::gauss_moment(a, b, c);
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(c);
        if (exact == 0.0) {
          CHECK(std::abs(q) <= 1e-12);
        } else {
          CHECK(std::abs(q - exact) <= 1e-6 * exact);
        }
      }
}

TEST_CASE("doubling the points per axis reduces the Maxwellian quadrature error") {
  const double exact = std::pow(std::erf(6.0 / std::sqrt(2.0)), 3);
  for (int n0 : {8, 12}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int n = n0; n <= 32; n *= 2) {
      const VelocityGrid g = build_grid(6.0, n);
      const double e = std::abs(g.weight * global_maxwellian(g).sum() - exact);
      CAPTURE(n);
      CHECK(e < prev);
      prev = e;
    }
  }
}

TEST_CASE("sphere quadrature") {
  const SphereQuadrature s = build_sphere(6, 12);
  double w = 0.0, z2 = 0.0, x4 = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(std::abs(s.directions[k].norm() - 1.0) <= 1e-14);
    w += s.weights[k];
    z2 += s.weights[k] * std::pow(s.directions[k].z(), 2);
    x4 += s.weights[k] * std::pow(s.directions[k].x(), 4);
  }
  CHECK(w == doctest::Approx(4.0 * EIGEN_PI).epsilon(1e-12));
  CHECK(z2 == doctest::Approx(4.0 * EIGEN_PI / 3.0).epsilon(1e-12));
  CHECK(x4 == doctest::Approx(4.0 * EIGEN_PI / 5.0).epsilon(1e-12));
  CHECK_THROWS_AS(build_sphere(0, 12), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre nodes integrate polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(5, x, w);
  double s0 = 0, s8 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s8 += w[i] * std::pow(x[i], 8);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s8 == doctest::Approx(2.0 / 9.0).epsilon(1e-13));
}

TEST_CASE("inner products") {
  const VelocityGrid g = build_grid(6.0, 16);
  const Field s = sqrt_maxwellian(g);
  CHECK(inner_product(g, s, s) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(inner_product(g, s, Field(g.vx.cwiseProduct(s)))) <= 1e-12);
  const Field nu = collision_frequency(g);
  // <sqrtM, sqrtM>_nu = E|X - Y| for independent standard normals = sqrt(2) E|X| = 4 / sqrt(pi)
  CHECK(inner_product(g, s, s, Weight::nu, nu) == doctest::Approx(4.0 / std::sqrt(EIGEN_PI)).epsilon(1e-3));
  CHECK_THROWS_AS(inner_product(g, s, Field(Field::Ones(10))), std::invalid_argument);
  CHECK(norm(g, s) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("collision frequency against the closed form") {
  const VelocityGrid g = build_grid(6.0, 16);
  CHECK(collision_frequency_at(g, Vec3::Zero()) == doctest::Approx(2.0 * std::sqrt(2.0 / EIGEN_PI)).epsilon(1e-3));
  CHECK(2.0 * std::sqrt(2.0 / EIGEN_PI) == doctest::Approx(1.5958).epsilon(1e-4));
  const double at6 = collision_frequency_at(g, Vec3(6.0, 0.0, 0.0));
  CHECK(at6 >= 5.5);
  CHECK(at6 <= 6.5);
  CHECK(at6 == doctest::Approx(test::nu_exact(6.0)).epsilon(1e-3));
  const Field nu = collision_frequency(g);
  double lo = 1e300, hi = 0.0;
  for (Index p = 0; p < g.size(); ++p) {
    CHECK(std::abs(nu[p] - nu[test::mirror(g, p)]) <= 1e-12);
    const double r = g.node(p).norm();
    lo = std::min(lo, nu[p] / (1.0 + r));
    hi = std::max(hi, nu[p] / (1.0 + r));
    if (p % 97 == 0) CHECK(nu[p] == doctest::Approx(test::nu_exact(r)).epsilon(2e-3));
  }
  CHECK(lo > 0.5);
  CHECK(hi < 2.0);
}

TEST_CASE("subspace projector is an orthogonal projection") {
  const VelocityGrid g = build_grid(6.0, 12);
  const SubspaceProjector P(g, collision_invariant_fields(g, true));
  CHECK(P.rank() == 5);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 5; ++k) {
    const Field f = test::random_amplitude(g, rng), h = test::random_amplitude(g, rng);
    const Field pf = P.apply(f);
    CHECK((P.apply(pf) - pf).norm() <= 1e-12 * pf.norm());
    CHECK(std::abs(inner_product(g, pf, h) - inner_product(g, f, P.apply(h))) <= 1e-12 * norm(g, f) * norm(g, h));
    CHECK(std::abs(inner_product(g, pf, P.complement(f))) <= 1e-12 * norm(g, f) * norm(g, f));
  }
}
