#pragma once

#include "bte/fluid.hpp"
#include "bte/kinetic.hpp"
#include "bte/regime.hpp"

#include <map>
#include <string>
#include <vector>

namespace bte {

// Initial fluid data for the limit experiment.
enum class InitialProfile { zero, shear_wave, taylor_green };

InitialProfile parse_initial_profile(const std::string& s);
std::string to_string(InitialProfile p);

struct LimitConfig {
  std::vector<double> eps_values = {0.2, 0.1, 0.05};
  KineticConfig kinetic;  // epsilon is overwritten per run
  int dim = 1;
  int n = 16;
  InitialProfile profile = InitialProfile::shear_wave;
  double amplitude[2] = {0.1, 0.05};
  double density_offset = 0.1;  // rho0 = offset - theta0 keeps rho + theta constant with nonzero mass
  int samples = 20;             // comparison times per run
  int workers = 1;
  double fluid_cfl = 0.5;
};

// Well-prepared fields for a profile: div u = 0 and rho + theta constant.
MacroFields initial_fields(const PeriodicGrid& space, const LimitConfig& cfg);

// Fluid data matching kinetic moments: the projected velocity and theta = 3/5 theta0 - 2/5 rho0.
FluidState fluid_initial_state(const PeriodicGrid& space, const MacroFields& m);

struct RunSeries {
  double epsilon = 0.0;
  std::vector<double> t, err_u, err_theta, boussinesq_res, div_res, micro_integral;
  std::vector<MonitorRow> monitors;
  double sup_err_u = 0.0, sup_err_theta = 0.0, sup_boussinesq = 0.0, sup_div = 0.0;
  double micro_integral_total = 0.0;
  double max_conservation_drift = 0.0;
  long positivity_warnings = 0;
  double wall_seconds = 0.0;
};

struct ConvergenceReport {
  std::vector<double> eps_values;
  std::vector<RunSeries> runs;
  // Log-log slope of each sup metric against epsilon; empty with fewer than two runs.
  std::map<std::string, double> orders;
  TransportCoefficients fluid_coeffs;
  std::string regime;
  double wall_seconds = 0.0;
};

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Least-squares slope of log(y) against log(x).
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

// Runs kinetic and fluid solvers for each epsilon from the same moments and measures the limit.
ConvergenceReport run_limit_experiment(const CollisionModel& model, const Projections& proj, const LimitConfig& cfg);

// Long-format table eps,t,metric,value.
void write_report_csv(const ConvergenceReport& r, const std::string& path);
void write_monitor_csv(const std::vector<MonitorRow>& rows, const std::string& path);

struct ConservationResidual {
  double t = 0.0;
  double mass[2] = {0.0, 0.0};
  double momentum = 0.0, energy = 0.0;
};

// Residuals of the discrete local conservation laws
//   d_t rho_l + eps^{-1} div <g_l, v sqrtM> = 0,
//   d_t sum_l <g_l, v sqrtM> + eps^{-1} div sum_l <g_l, v (x) v sqrtM> = 0,
//   d_t sum_l <g_l, |v|^2 sqrtM> + eps^{-1} div sum_l <g_l, |v|^2 v sqrtM> = 0,
// with forward differences in time and the solver's spatial derivative; L2 norms over space.
std::vector<ConservationResidual> local_conservation_residuals(const KineticSolver& solver, KineticState state,
                                                               long steps);

}  // namespace bte
