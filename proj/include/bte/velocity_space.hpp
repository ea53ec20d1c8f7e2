#pragma once

#include <Eigen/Dense>

#include <vector>

namespace bte {

template <class S> using FieldT = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S> using Vec3T = Eigen::Matrix<S, 3, 1>;
using Field = FieldT<double>;
using Vec3 = Vec3T<double>;
using Index = Eigen::Index;
// A batch of fields, one per row; column-major, so the samples of one node are contiguous.
using Batch = Eigen::MatrixXd;

// Uniform midpoint lattice on [-R, R]^3. Node (i,j,k) has linear index (i*n + j)*n + k.
struct VelocityGrid {
  double radius = 6.0;
  int n = 32;
  double h = 0.0;
  double weight = 0.0;  // h^3, identical for every node
  Field axis;           // 1-D node coordinates
  Field vx, vy, vz;

  Index size() const { return vx.size(); }
  Index index(int i, int j, int k) const { return (Index(i) * n + j) * n + k; }
  Vec3 node(Index p) const { return {vx[p], vy[p], vz[p]}; }
  Field weights() const { return Field::Constant(size(), weight); }
  bool same_as(const VelocityGrid& o) const { return n == o.n && radius == o.radius; }
};

VelocityGrid build_grid(double radius, int n);

struct SphereQuadrature {
  std::vector<Vec3> directions;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

// Product Gauss-Legendre in cos(theta) times uniform azimuth.
SphereQuadrature build_sphere(int n_theta, int n_phi);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

template <class S>
S maxwellian_value(const Vec3T<S>& v, S rho, const Vec3T<S>& u, S theta) {
  using std::exp;
  using std::pow;
  const S two_pi = S(2) * S(EIGEN_PI);
  return rho * pow(two_pi * theta, S(-1.5)) * exp(-(v - u).squaredNorm() / (S(2) * theta));
}

Field maxwellian(const VelocityGrid& grid, double rho, const Vec3& u, double theta);
Field global_maxwellian(const VelocityGrid& grid);  // M = M_[1,0,1]
Field sqrt_maxwellian(const VelocityGrid& grid);

enum class Weight { unit, nu };

double inner_product(const VelocityGrid& grid, const Field& f, const Field& g);
double inner_product(const VelocityGrid& grid, const Field& f, const Field& g, Weight w, const Field& nu);
double norm(const VelocityGrid& grid, const Field& f);

// nu(v) = int |v - v*| M(v*) dv*, by lattice quadrature.
Field collision_frequency(const VelocityGrid& grid);
double collision_frequency_at(const VelocityGrid& grid, const Vec3& v);

// Orthogonal projector (grid inner product) onto the span of a few fields.
// The basis is orthonormalised once, so apply() is idempotent to rounding.
class SubspaceProjector {
 public:
  SubspaceProjector() = default;
  SubspaceProjector(const VelocityGrid& grid, const Eigen::MatrixXd& basis);

  Field apply(const Field& f) const;
  Field complement(const Field& f) const { return f - apply(f); }
  // Coefficients c with P f = basis * c.
  Eigen::VectorXd coefficients(const Field& f) const;
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  Index rank() const { return q_.cols(); }
  // Euclidean-orthonormal basis of the same span (the grid weight is uniform).
  const Eigen::MatrixXd& orthonormal() const { return q_; }

 private:
  double w_ = 0.0;
  Eigen::MatrixXd basis_, q_, gram_;
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt_;
};

// Columns sqrt(M), v_i sqrt(M), |v|^2 sqrt(M).
Eigen::MatrixXd collision_invariant_fields(const VelocityGrid& grid, bool times_sqrt_m);

}  // namespace bte
