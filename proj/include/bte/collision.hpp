#pragma once

#include "bte/velocity_space.hpp"

#include <functional>
#include <string>
#include <utility>

namespace bte {

enum class KernelKind { hard_sphere, maxwellian_molecule, bgk };

KernelKind parse_kernel_kind(const std::string& s);
std::string to_string(KernelKind k);

struct CollisionKernel {
  KernelKind kind = KernelKind::hard_sphere;
  double gamma = 1.0;      // |v - v*|^gamma
  double amplitude = 1.0;  // overall collision strength
  std::function<double(double)> angular;  // b(cos theta); empty means 1/(4 pi)
  double bgk_nu = 1.0;
  bool conservative_fix = false;

  bool is_quadrature() const { return kind != KernelKind::bgk; }
  double b(double cos_theta) const;
};

CollisionKernel hard_sphere_kernel();
CollisionKernel maxwell_molecule_kernel();
CollisionKernel bgk_kernel(double nu);

// g = (g1, g2), perturbation amplitudes against sqrt(M).
struct DistributionPair {
  Field g1, g2;

  DistributionPair() = default;
  DistributionPair(Field a, Field b) : g1(std::move(a)), g2(std::move(b)) {}
  static DistributionPair zero(Index n) { return {Field::Zero(n), Field::Zero(n)}; }

  DistributionPair operator+(const DistributionPair& o) const { return {g1 + o.g1, g2 + o.g2}; }
  DistributionPair operator-(const DistributionPair& o) const { return {g1 - o.g1, g2 - o.g2}; }
  DistributionPair operator*(double s) const { return {g1 * s, g2 * s}; }
  DistributionPair swapped() const { return {g2, g1}; }
};

double inner_product(const VelocityGrid& grid, const DistributionPair& a, const DistributionPair& b);
double norm(const VelocityGrid& grid, const DistributionPair& a);

// Precomputed, immutable collision set-up shared by every operator.
class CollisionModel {
 public:
  CollisionModel(VelocityGrid grid, SphereQuadrature sphere, CollisionKernel kernel);

  const VelocityGrid& grid() const { return grid_; }
  const SphereQuadrature& sphere() const { return sphere_; }
  const CollisionKernel& kernel() const { return kernel_; }
  const Field& M() const { return m_; }
  const Field& sqrtM() const { return sqrt_m_; }
  // Collision frequency used as the nu-weight; bgk_nu for the BGK kernel.
  const Field& nu() const { return nu_; }
  // Projector onto Ker L-hat = span{sqrtM, v sqrtM, |v|^2 sqrtM}.
  const SubspaceProjector& kernel_projector() const { return ker_; }
  // Projector onto span{v sqrtM, (|v|^2 - c) sqrtM}, c chosen so the last direction is discretely
  // orthogonal to sqrtM: the exchange directions of the BGK cross term.
  const SubspaceProjector& exchange_projector() const { return exch_; }
  // Projector onto span{1, v, |v|^2} for raw distributions (conservative correction).
  const SubspaceProjector& invariant_projector() const { return inv_; }

  // Sphere nodes with antipodal partners folded together (sigma and -sigma give the same collision).
  struct FoldedDirection {
    Vec3 sigma;
    double w_plus, w_minus;  // weights of sigma and of -sigma
  };
  const std::vector<FoldedDirection>& folded() const { return folded_; }

 private:
  VelocityGrid grid_;
  SphereQuadrature sphere_;
  CollisionKernel kernel_;
  Field m_, sqrt_m_, nu_;
  SubspaceProjector ker_, exch_, inv_;
  std::vector<FoldedDirection> folded_;
};

std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v_star, const Vec3& sigma);

// Symmetrised bilinear operator on raw distributions, trilinear interpolation off-lattice.
Field q_bilinear(const CollisionModel& model, const Field& f, const Field& g);
// Same quantity by the literal quadruple sum; the reference for q_bilinear.
Field q_bilinear_direct(const CollisionModel& model, const Field& f, const Field& g);
// Removes the components along 1, v, |v|^2 (least-squares fix of the discrete moments).
Field conservative_correction(const CollisionModel& model, const Field& q);
Batch conservative_correction(const CollisionModel& model, const Batch& q);

Field l_hat(const CollisionModel& model, const Field& g);
Field l_hat_pair(const CollisionModel& model, const Field& g, const Field& h);
Field gamma_hat(const CollisionModel& model, const Field& g, const Field& h);

// Batched forms: each row of the batch is one field; one sweep over the collision geometry serves all rows.
Batch q_bilinear(const CollisionModel& model, const Batch& f, const Batch& g);
Batch l_hat(const CollisionModel& model, const Batch& g);
Batch l_hat_pair(const CollisionModel& model, const Batch& g, const Batch& h);
Batch gamma_hat(const CollisionModel& model, const Batch& g, const Batch& h);
// (calL g)_1 and (calL g)_2 for a batch of pairs.
std::pair<Batch, Batch> calL(const CollisionModel& model, const Batch& g1, const Batch& g2);

DistributionPair vector_L(const CollisionModel& model, const DistributionPair& g);
DistributionPair vector_calL(const CollisionModel& model, const DistributionPair& g);
DistributionPair vector_Gamma(const CollisionModel& model, const DistributionPair& g, const DistributionPair& h);
DistributionPair vector_GammaTilde(const CollisionModel& model, const DistributionPair& g, const DistributionPair& h);

Field bgk_apply(const Field& g, double nu, const SubspaceProjector& projector);

// The amplitude whose polynomial part is the square of g's: g^2 / sqrt(M).
Field square_amplitude(const CollisionModel& model, const Field& g);

namespace reference {
// Literal sums over all (v, v*, sigma) of the quadratic forms behind l_hat / l_hat_pair / gamma_hat.
double l_hat_form(const CollisionModel& model, const Field& g, const Field& h);
double l_hat_pair_form(const CollisionModel& model, const Field& g1, const Field& g2, const Field& k1);
double gamma_hat_form(const CollisionModel& model, const Field& g, const Field& h, const Field& k);
// L-hat through two q_bilinear calls on raw distributions (strong form).
Field l_hat_strong(const CollisionModel& model, const Field& g);
}  // namespace reference

}  // namespace bte
