#include "bte/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bte;

namespace {

const double pi = EIGEN_PI;

Field apply(const PeriodicGrid& g, double (*f)(double, double)) {
  Field out(g.size());
  for (Index p = 0; p < g.size(); ++p) out[p] = f(g.x(p, 0), g.x(p, 1));
  return out;
}

}  // namespace

TEST_CASE("grid construction and layout") {
  CHECK_THROWS_AS(PeriodicGrid(3, 8), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicGrid(1, 7), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicGrid(1, 2), std::invalid_argument);
  const PeriodicGrid g(2, 8);
  CHECK(g.size() == 64);
  CHECK(g.spectral_size() == 8 * 5);
  CHECK(g.x(9, 0) == doctest::Approx(g.dx()));
  CHECK(g.x(9, 1) == doctest::Approx(g.dx()));
  CHECK(g.x(3, 1) == doctest::Approx(3 * g.dx()));
  CHECK(g.volume() == doctest::Approx(4 * pi * pi));
  // every (k0, k1) with k1 >= 0 appears once
  int count = 0;
  for (Index s = 0; s < g.spectral_size(); ++s) {
    CHECK(g.wavenumber(s, 0) >= -3);
    CHECK(g.wavenumber(s, 0) <= 4);
    CHECK(g.wavenumber(s, 1) >= 0);
    count += g.wavenumber(s, 0) == 0 && g.wavenumber(s, 1) == 0;
  }
  CHECK(count == 1);
}

TEST_CASE("forward and backward transforms are inverse") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int dim : {1, 2}) {
    const PeriodicGrid g(dim, 16);
    Eigen::MatrixXd f(g.size(), 3);
    for (Index i = 0; i < f.size(); ++i) f.data()[i] = nd(rng);
    const Eigen::MatrixXd back = g.backward(g.forward(f));
    CHECK((back - f).cwiseAbs().maxCoeff() <= 1e-13);
    // a batch transforms like its columns
    const Spectrum F = g.forward(f);
    CHECK((g.forward(Eigen::MatrixXd(f.col(1))).col(0) - F.col(1)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(g.forward(Eigen::MatrixXd::Zero(g.size() + 1, 1)), std::invalid_argument);
  }
}

TEST_CASE("spectral derivatives are exact on resolved modes") {
  const PeriodicGrid g1(1, 16);
  const Field s3 = apply(g1, [](double x, double) { return std::sin(3 * x); });
  const Field c3 = apply(g1, [](double x, double) { return 3 * std::cos(3 * x); });
  CHECK((g1.derivative(s3, 0) - c3).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(g1.derivative(s3, 1).cwiseAbs().maxCoeff() == 0.0);

  const PeriodicGrid g2(2, 16);
  const Field f = apply(g2, [](double x, double y) { return std::sin(2 * x) * std::cos(5 * y); });
  const Field fx = apply(g2, [](double x, double y) { return 2 * std::cos(2 * x) * std::cos(5 * y); });
  const Field fy = apply(g2, [](double x, double y) { return -5 * std::sin(2 * x) * std::sin(5 * y); });
  CHECK((g2.derivative(f, 0) - fx).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((g2.derivative(f, 1) - fy).cwiseAbs().maxCoeff() <= 1e-11);
  // mixed partials commute
  const Eigen::MatrixXd xy = g2.derivative(g2.derivative(f, 0), 1), yx = g2.derivative(g2.derivative(f, 1), 0);
  CHECK((xy - yx).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("the Nyquist mode has no derivative") {
  const PeriodicGrid g(1, 8);
  const Field alt = apply(g, [](double x, double) { return std::cos(4 * x); });
  CHECK(g.derivative(alt, 0).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(g.multiplicity()[0] == 1.0);
  CHECK(g.multiplicity()[4] == 1.0);
  CHECK(g.multiplicity()[2] == 2.0);
  CHECK(g.dealias_mask()[2] == 1.0);
  CHECK(g.dealias_mask()[3] == 0.0);
}

TEST_CASE("norms") {
  const PeriodicGrid g1(1, 32);
  const Field s = apply(g1, [](double x, double) { return std::sin(x); });
  CHECK(g1.l2_squared(s)[0] == doctest::Approx(pi).epsilon(1e-12));
  const Field s2 = apply(g1, [](double x, double) { return std::sin(2 * x); });
  // (1 + 4 + 16) pi
  CHECK(g1.hs_squared(s2, 2)[0] == doctest::Approx(21 * pi).epsilon(1e-12));
  CHECK(g1.hs_squared(s2, 0)[0] == doctest::Approx(pi).epsilon(1e-12));

  const PeriodicGrid g2(2, 16);
  const Field ss = apply(g2, [](double x, double y) { return std::sin(x) * std::sin(y); });
  CHECK(g2.l2_squared(ss)[0] == doctest::Approx(pi * pi / 1.0).epsilon(1e-12));
  // multi-indices (0,0) (1,0) (0,1) each contribute pi^2, and (2,0) (1,1) (0,2) add three more
  CHECK(g2.hs_squared(ss, 1)[0] == doctest::Approx(3 * pi * pi).epsilon(1e-12));
  CHECK(g2.hs_squared(ss, 2)[0] == doctest::Approx(6 * pi * pi).epsilon(1e-12));
}

TEST_CASE("Parseval") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int dim : {1, 2})
    for (int n : {8, 12}) {
      const PeriodicGrid g(dim, n);
      Eigen::MatrixXd f(g.size(), 2);
      for (Index i = 0; i < f.size(); ++i) f.data()[i] = nd(rng);
      const Eigen::VectorXd phys = g.l2_squared(f), spec = g.hs_squared(f, 0);
      for (int c = 0; c < 2; ++c) CHECK(spec[c] == doctest::Approx(phys[c]).epsilon(1e-12));
    }
}

TEST_CASE("Sobolev symbol") {
  const PeriodicGrid g(1, 8);
  const Eigen::VectorXd w = g.sobolev_symbol(2);
  for (Index s = 0; s < g.spectral_size(); ++s) {
    const double k = g.wavenumber(s, 0);
    CHECK(w[s] == doctest::Approx(1 + k * k + k * k * k * k));
  }
  const PeriodicGrid g2(2, 8);
  const Eigen::VectorXd w2 = g2.sobolev_symbol(1);
  for (Index s = 0; s < g2.spectral_size(); ++s) CHECK(w2[s] == doctest::Approx(1 + g2.k2()[s]));
}
