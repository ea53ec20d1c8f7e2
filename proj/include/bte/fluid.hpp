#pragma once

#include "bte/regime.hpp"
#include "bte/spectral.hpp"
#include "bte/transport.hpp"

#include <array>
#include <map>
#include <stdexcept>

namespace bte {

// Per-species velocity (size x 3; all three components are carried, derivatives act along the
// resolved axes only), temperature, and the recovered pressure.
struct FluidState {
  std::array<Eigen::MatrixXd, 2> u;
  std::array<Field, 2> theta;
  std::array<Field, 2> p;
  double t = 0.0;

  static FluidState zero(Index size);
};

struct FluidDiagnostics {
  double t = 0.0;
  double ke1 = 0.0, ke2 = 0.0;  // 1/2 int |u_l|^2
  double th1_l2 = 0.0, th2_l2 = 0.0;
  double u_diff_l2 = 0.0, theta_diff_l2 = 0.0;
  double div_max = 0.0;
};

class FluidError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// w - grad Delta^{-1} div w on the resolved components; the zero mode passes through.
Eigen::MatrixXd leray_project(const PeriodicGrid& grid, const Eigen::MatrixXd& w);

class FluidSolver {
 public:
  FluidSolver(const PeriodicGrid& grid, const TransportCoefficients& coeffs, const RegimeFlags& flags,
              double cfl = 0.5);

  const PeriodicGrid& grid() const { return grid_; }
  const TransportCoefficients& coefficients() const { return coeffs_; }
  const RegimeFlags& flags() const { return flags_; }

  // One Lawson (integrating-factor) RK4 step: diffusion and species exchange exact per mode,
  // advection explicit and dealiased. Projects the initial velocities if they are not solenoidal.
  void step(FluidState& s, double dt) const;
  // Largest dt allowed by the advective CFL (infinity if nothing advects).
  double max_dt(const FluidState& s) const;

  std::pair<Field, Field> pressure(const FluidState& s) const;
  double max_divergence(const FluidState& s) const;
  FluidDiagnostics diagnostics(const FluidState& s) const;
  // Right-hand side of the kinetic-energy balance: -sum_l [diffuse_l] mu |grad u_l|^2 - (1/sigma)|u1 - u2|^2.
  double energy_rate(const FluidState& s) const;

  // Spectral layout used internally: columns u1(3), u2(3), theta1, theta2.
  Spectrum to_spectrum(const FluidState& s) const;
  void from_spectrum(const Spectrum& S, FluidState& s) const;
  // Applies exp(h A) mode by mode.
  Spectrum propagate(const Spectrum& S, double h) const;

 private:
  Spectrum nonlinear(const Spectrum& S) const;

  const PeriodicGrid& grid_;
  TransportCoefficients coeffs_;
  RegimeFlags flags_;
  double cfl_;
};

}  // namespace bte
