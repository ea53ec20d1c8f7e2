#include "bte/velocity_space.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bte {

VelocityGrid build_grid(double radius, int n) {
  if (n < 8 || n % 2 != 0)
    throw std::invalid_argument("velocity grid: points per axis must be even and >= 8, got " + std::to_string(n));
  if (!(radius >= 4.0))
    throw std::invalid_argument("velocity grid: radius must be >= 4, got " + std::to_string(radius));
  VelocityGrid g;
  g.radius = radius;
  g.n = n;
  g.h = 2.0 * radius / n;
  g.weight = g.h * g.h * g.h;
  g.axis.resize(n);
  for (int i = 0; i < n; ++i) g.axis[i] = -radius + (i + 0.5) * g.h;
  const Index total = Index(n) * n * n;
  g.vx.resize(total);
  g.vy.resize(total);
  g.vz.resize(total);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Index p = g.index(i, j, k);
        g.vx[p] = g.axis[i];
        g.vy[p] = g.axis[j];
        g.vz[p] = g.axis[k];
      }
  return g;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(EIGEN_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

SphereQuadrature build_sphere(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("sphere quadrature: node counts must be positive");
  std::vector<double> ct, wt;
  gauss_legendre(n_theta, ct, wt);
  SphereQuadrature s;
  const double dphi = 2.0 * EIGEN_PI / n_phi;
  for (int a = 0; a < n_theta; ++a) {
    const double st = std::sqrt(std::max(0.0, 1.0 - ct[a] * ct[a]));
    for (int b = 0; b < n_phi; ++b) {
      const double phi = (b + 0.5) * dphi;
      Vec3 d(st * std::cos(phi), st * std::sin(phi), ct[a]);
      s.directions.push_back(d.normalized());
      s.weights.push_back(wt[a] * dphi);
    }
  }
  return s;
}

Field maxwellian(const VelocityGrid& grid, double rho, const Vec3& u, double theta) {
  if (!(rho > 0.0) || !(theta > 0.0)) throw std::invalid_argument("maxwellian: rho and theta must be positive");
  Field m(grid.size());
  for (Index p = 0; p < grid.size(); ++p) m[p] = maxwellian_value<double>(grid.node(p), rho, u, theta);
  return m;
}

Field global_maxwellian(const VelocityGrid& grid) { return maxwellian(grid, 1.0, Vec3::Zero(), 1.0); }

Field sqrt_maxwellian(const VelocityGrid& grid) { return global_maxwellian(grid).cwiseSqrt(); }

static void check_sizes(const VelocityGrid& grid, const Field& f, const Field& g) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw std::invalid_argument("inner product: field length does not match the grid");
}

double inner_product(const VelocityGrid& grid, const Field& f, const Field& g) {
  check_sizes(grid, f, g);
  return grid.weight * f.dot(g);
}

double inner_product(const VelocityGrid& grid, const Field& f, const Field& g, Weight w, const Field& nu) {
  if (w == Weight::unit) return inner_product(grid, f, g);
  check_sizes(grid, f, g);
  if (nu.size() != grid.size()) throw std::invalid_argument("inner product: nu has wrong length");
  return grid.weight * (f.array() * g.array() * nu.array()).sum();
}

double norm(const VelocityGrid& grid, const Field& f) { return std::sqrt(inner_product(grid, f, f)); }

double collision_frequency_at(const VelocityGrid& grid, const Vec3& v) {
  const Field m = global_maxwellian(grid);
  double s = 0.0;
  for (Index p = 0; p < grid.size(); ++p) s += (v - grid.node(p)).norm() * m[p];
  return s * grid.weight;
}

Field collision_frequency(const VelocityGrid& grid) {
  const Field m = global_maxwellian(grid);
  const int n = grid.n;
  // |v - v*| only depends on the index offset, so tabulate it once.
  const int span = 2 * n - 1;
  std::vector<double> dist(std::size_t(span) * span * span);
  for (int a = 0; a < span; ++a)
    for (int b = 0; b < span; ++b)
      for (int c = 0; c < span; ++c)
        dist[(std::size_t(a) * span + b) * span + c] =
            grid.h * std::sqrt(double((a - n + 1) * (a - n + 1) + (b - n + 1) * (b - n + 1) + (c - n + 1) * (c - n + 1)));
  Field nu(grid.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const double* drow = &dist[(std::size_t(i - a + n - 1) * span + (j - b + n - 1)) * span + (k + n - 1)];
            const double* mrow = &m[grid.index(a, b, 0)];
            for (int c = 0; c < n; ++c) s += drow[-c] * mrow[c];
          }
        nu[grid.index(i, j, k)] = s * grid.weight;
      }
  return nu;
}

SubspaceProjector::SubspaceProjector(const VelocityGrid& grid, const Eigen::MatrixXd& basis)
    : w_(grid.weight), basis_(basis) {
  gram_ = w_ * basis.transpose() * basis;
  gram_ldlt_.compute(gram_);
  // Orthonormal (under the grid weight) copy, via a thin Householder QR.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(std::sqrt(w_) * basis);
  q_ = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
}

Field SubspaceProjector::apply(const Field& f) const {
  const Eigen::VectorXd c = q_.transpose() * f;
  return q_ * c;
}

Eigen::VectorXd SubspaceProjector::coefficients(const Field& f) const {
  return gram_ldlt_.solve(w_ * basis_.transpose() * f);
}

Eigen::MatrixXd collision_invariant_fields(const VelocityGrid& grid, bool times_sqrt_m) {
  Eigen::MatrixXd b(grid.size(), 5);
  const Field s = times_sqrt_m ? sqrt_maxwellian(grid) : Field::Ones(grid.size());
  b.col(0) = s;
  b.col(1) = grid.vx.cwiseProduct(s);
  b.col(2) = grid.vy.cwiseProduct(s);
  b.col(3) = grid.vz.cwiseProduct(s);
  b.col(4) = (grid.vx.array().square() + grid.vy.array().square() + grid.vz.array().square()).matrix().cwiseProduct(s);
  return b;
}

}  // namespace bte
