#pragma once

#include "bte/collision.hpp"
#include "bte/harness.hpp"
#include "bte/regime.hpp"
#include "bte/transport.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bte {

// Every tunable of the command-line tool. The file format is YAML with one section per module; every key
// is optional and unknown keys are rejected.
struct RunConfig {
  struct {
    double radius = 6.0;
    int n = 32;
  } velocity;
  struct {
    std::string scheme = "gauss_legendre";
    int n_theta = 6, n_phi = 12;
  } sphere;
  struct {
    std::string kind = "hard_sphere";
    double gamma = 1.0;  // 1 hard sphere, 0 Maxwell molecules
    double bgk_nu = 1.0;
    bool conservative_fix = false;
  } kernel;
  struct {
    double tol_ker = 1e-3;
    bool use_gram = true;
  } proj;
  struct {
    double tol = 1e-8;
    int max_iter = 500;
  } transport;
  struct {
    double epsilon = 0.1, r = 1.0, c1 = 1.0, c2 = 1.0;
    double dt = 0.0, t_end = 0.5, cfl = 0.5;
    std::string integrator = "imex_rk2";
    std::string transport = "spectral";
    bool nonlinear = true;
    double implicit_tol = 1e-12;
    int implicit_max_iter = 200;
    int positivity_every = 10;
  } kinetic;
  struct {
    int dim = 1, n = 16;
  } space;
  struct {
    int s = 2, every = 1;
  } monitor;
  struct {
    std::string profile = "shear_wave";
    double amplitude1 = 0.1, amplitude2 = 0.05;
    double density_offset = 0.1;
  } initial;
  struct {
    double mu = 1.0, kappa = 1.0, sigma = 1.0, lambda = 5.0 / 3.0;
    bool from_transport = false;  // take the coefficients from the configured kernel instead
    double dt = 0.0;              // 0 selects the advective CFL bound, capped at 0.05
    double t_end = 1.0, cfl = 0.5;
    int every = 1;
    struct {
      bool from_regime = true;  // derive from (kinetic.r, c1, c2); else use the switches below
      bool advect1 = true, diffuse1 = true, advect2 = true, diffuse2 = true, coupling = true;
    } flags;
  } fluid;
  struct {
    double band_lo = 0.5, band_hi = 2.0, strong_delta = 0.5;
  } regime;
  struct {
    std::vector<double> eps = {0.2, 0.1, 0.05};
    double t_end = 1.0;
    int samples = 20;
  } harness;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = "out";

  // Throws ConfigError naming the offending key.
  void validate() const;

  CollisionModel make_model() const;
  KineticConfig kinetic_config() const;
  LimitConfig limit_config() const;
  RegimeFlags fluid_flags() const;
  InteractionThresholds thresholds() const;
  SolveOptions solve_options() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing file, malformed YAML, wrong types and unknown keys raise ConfigError with file:line and key.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& yaml_text, const std::string& origin = "<string>");
// Applies key=value (dotted key, YAML scalar value) on top of cfg.
void apply_override(RunConfig& cfg, const std::string& assignment);

nlohmann::ordered_json to_json(const RunConfig& cfg);
// Every key in declaration order.
std::vector<std::string> config_keys();

}  // namespace bte
