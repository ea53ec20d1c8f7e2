#pragma once

#include "bte/collision.hpp"

#include <cmath>
#include <random>

namespace bte::test {

// E[v1^a v2^b v3^c] for a standard normal vector.
inline double gauss_moment(int a, int b, int c) {
  auto m = [](int k) {
    if (k % 2) return 0.0;
    double r = 1.0;
    for (int j = k - 1; j > 0; j -= 2) r *= j;
    return r;
  };
  return m(a) * m(b) * m(c);
}

// E|v - X| for X standard normal: the closed form of the hard-sphere collision frequency.
inline double nu_exact(double r) {
  if (r < 1e-8) return 2.0 * std::sqrt(2.0 / EIGEN_PI);
  return (r + 1.0 / r) * std::erf(r / std::sqrt(2.0)) + std::sqrt(2.0 / EIGEN_PI) * std::exp(-0.5 * r * r);
}

// Smooth random amplitude: a random polynomial of degree <= 2 in v times sqrtM, plus white noise times sqrtM.
inline Field random_amplitude(const VelocityGrid& g, std::mt19937_64& rng, double noise = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  const Field s = sqrt_maxwellian(g);
  Field f(g.size());
  const double c0 = n(rng), c1 = n(rng), c2 = n(rng), c3 = n(rng), c4 = n(rng), c5 = n(rng);
  for (Index p = 0; p < g.size(); ++p)
    f[p] = (c0 + c1 * g.vx[p] + c2 * g.vy[p] + c3 * g.vz[p] + c4 * g.vx[p] * g.vy[p] + c5 * g.vz[p] * g.vz[p] +
            noise * n(rng)) *
           s[p];
  return f;
}

inline DistributionPair random_pair(const VelocityGrid& g, std::mt19937_64& rng, double noise = 1.0) {
  return {random_amplitude(g, rng, noise), random_amplitude(g, rng, noise)};
}

// Index of the node mirrored through the origin.
inline Index mirror(const VelocityGrid& g, Index p) {
  const int n = g.n;
  const int i = int(p / (Index(n) * n)), j = int((p / n) % n), k = int(p % n);
  return g.index(n - 1 - i, n - 1 - j, n - 1 - k);
}

}  // namespace bte::test
