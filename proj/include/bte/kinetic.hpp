#pragma once

#include "bte/moments.hpp"
#include "bte/spectral.hpp"

#include <array>
#include <functional>
#include <stdexcept>
#include <string>

namespace bte {

enum class Integrator { imex_euler, imex_rk2 };
enum class TransportScheme { spectral, upwind };

Integrator parse_integrator(const std::string& s);
std::string to_string(Integrator i);
TransportScheme parse_transport_scheme(const std::string& s);
std::string to_string(TransportScheme t);

struct KineticConfig {
  double epsilon = 0.1;
  double r = 1.0, c1 = 1.0, c2 = 1.0;
  double dt = 0.0;  // 0 selects cfl * dx * epsilon / (R_v d_x)
  double t_end = 0.5;
  double cfl = 0.5;
  Integrator integrator = Integrator::imex_rk2;
  TransportScheme transport = TransportScheme::spectral;
  int sobolev_s = 2;
  int monitor_every = 1;
  int positivity_every = 10;
  bool nonlinear = true;
  double implicit_tol = 1e-12;
  int implicit_max_iter = 200;

  void validate() const;
};

class KineticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row x of g1/g2 is the velocity field at spatial node x.
struct KineticState {
  BatchPair g;
  double t = 0.0;
};

struct EnergyReport {
  double t = 0.0, E_s = 0.0, D_s = 0.0;
};

// Spatial averages of the conserved moments.
struct Conserved {
  double mass[2] = {0.0, 0.0};
  Vec3 momentum = Vec3::Zero();  // summed over species
  double energy = 0.0;           // summed over species
};

struct MonitorRow {
  double t, E_s, D_s, mass1, mass2, mom_total, energy_total, micro_norm;
};

// Per-species fluid fields on the spatial grid; u is size x 3.
struct MacroFields {
  std::array<Field, 2> rho, theta;
  std::array<Eigen::MatrixXd, 2> u;
  static MacroFields zero(Index size);
};

// Moments read from a kinetic state: rho = <g, sqrtM>, u = <g, v sqrtM>, theta = <g, (|v|^2/3 - 1) sqrtM>,
// theta_fluid = <g, (|v|^2/5 - 1) sqrtM> (the combination that converges to the fluid temperature).
struct KineticMoments {
  MacroFields m;
  std::array<Field, 2> theta_fluid;
};

KineticMoments extract_moments(const Projections& proj, const Batch& g1, const Batch& g2);

// [rho + u.v + theta (|v|^2 - 3)/2] sqrtM per species and node. Throws if M + eps g sqrtM < 0 somewhere,
// or (strict) if div u or grad(rho + theta) is not zero to 1e-8.
KineticState make_well_prepared(const PeriodicGrid& space, const CollisionModel& model, const MacroFields& m,
                                double epsilon, bool strict = false);

// min over (x, v) of M + eps g sqrtM, relative to max M.
double positivity_margin(const CollisionModel& model, const BatchPair& g, double epsilon);

class KineticSolver {
 public:
  KineticSolver(const PeriodicGrid& space, const CollisionModel& model, const Projections& proj, KineticConfig cfg);

  const KineticConfig& config() const { return cfg_; }
  const PeriodicGrid& space() const { return space_; }
  const CollisionModel& model() const { return model_; }
  const Projections& projections() const { return proj_; }

  // The time step actually taken: the configured one capped by the CFL bound, shrunk to land on t_end.
  double time_step() const { return dt_; }
  double cfl_bound() const;

  // v . grad_x g for one species batch.
  Batch transport_apply(const Batch& g) const;
  BatchPair rhs(const BatchPair& g) const;
  // Everything except the stiff eps^{-1-c_l} L-hat term.
  BatchPair explicit_part(const BatchPair& g) const;
  // The stiff term -eps^{-1-c_l} L-hat g_l.
  BatchPair implicit_part(const BatchPair& g) const;
  // (I + a_l L-hat) x_l = b_l, per species and node.
  BatchPair solve_shifted(const BatchPair& b, double a1, double a2) const;

  void step(KineticState& s) const;
  // Steps to t_end; calls observe(state, step_index) after the initial state and every monitor_every steps.
  void run(KineticState& s, const std::function<void(const KineticState&, long)>& observe = {}) const;

  EnergyReport energy_monitors(const KineticState& s) const;
  Conserved conserved(const KineticState& s) const;
  // int ||boldP^perp g||^2_nu dx (both species).
  double micro_nu_squared(const BatchPair& g) const;
  MonitorRow monitor_row(const KineticState& s) const;

  long positivity_warnings() const { return positivity_warnings_; }

 private:
  Batch solve_species(const Batch& b, double a) const;
  double stiff_coefficient(int l) const;

  const PeriodicGrid& space_;
  const CollisionModel& model_;
  const Projections& proj_;
  KineticConfig cfg_;
  double dt_ = 0.0;
  mutable long positivity_warnings_ = 0;
};

}  // namespace bte
