#pragma once

#include <stdexcept>
#include <string>

namespace bte {

// Which terms each species keeps in the limiting two-fluid system.
struct SpeciesFlags {
  bool advect = true;
  bool diffuse = true;
};

struct RegimeFlags {
  SpeciesFlags species[2];
  bool coupling = true;  // the 1/sigma, 1/lambda exchange terms

  bool operator==(const RegimeFlags& o) const {
    return species[0].advect == o.species[0].advect && species[0].diffuse == o.species[0].diffuse &&
           species[1].advect == o.species[1].advect && species[1].diffuse == o.species[1].diffuse &&
           coupling == o.coupling;
  }
  RegimeFlags swapped() const {
    RegimeFlags f = *this;
    std::swap(f.species[0], f.species[1]);
    return f;
  }
};

enum class RegimeId {
  navier_stokes_fourier,   // r = 1, c1 = c2 = 1
  euler_navier_stokes,     // r = 1, 1 < c_l < 2, c_n = 1
  euler_fourier,           // r = 1, 1 < c1 = c2 < 2
  stokes_fourier,          // r > 1, c1 = c2 = 1
  relaxation_stokes,       // r > 1, 1 < c_l < 2r, c_n = 1
  relaxation,              // r > 1, 1 < c1 = c2 < 2r
};

struct Regime {
  RegimeId id;
  std::string name;
  std::string case_header;  // the (r, c) condition that selected it
  RegimeFlags flags;
  int inviscid_species = -1;  // 0 or 1 for the mixed cases, else -1
};

class UnclassifiedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string to_string(RegimeId id);

// Exponent equalities are tested to within 1e-12.
Regime classify(double r, double c1, double c2);

// St = eps, Kn_l = eps^c_l, delta = eps^q with 4q = 2 + c1 + c2 (very weak inter-species interaction).
struct ScalingParams {
  double epsilon = 0.1, r = 1.0, c1 = 1.0, c2 = 1.0, q = 1.0;
  double St = 0.1, Kn1 = 0.1, Kn2 = 0.1, delta_bar = 0.1;
};

ScalingParams scaling_from_exponents(double epsilon, double r, double c1, double c2);

struct PhysicalScales {
  double t0 = 1.0, L0 = 1.0, T0 = 1.0, m = 1.0, k = 1.0;
  double tau1 = 1.0, tau2 = 1.0, delta_bar = 1.0;
};

enum class Interaction { strong, weak, very_weak };
std::string to_string(Interaction i);

struct InteractionThresholds {
  double band_lo = 0.5, band_hi = 2.0;  // ratio band read as "very weak ~ 1"
  double strong_delta = 0.5;            // delta_bar at or above this is O(1)
};

struct Dimensionless {
  double U0 = 0.0, c0 = 0.0;
  double tau[2][2] = {{0, 0}, {0, 0}};
  double mfp[2][2] = {{0, 0}, {0, 0}};
  double St = 0.0, Kn1 = 0.0, Kn2 = 0.0, delta_bar = 0.0;
  double ratio = 0.0;  // delta_bar / (Kn1 Kn2 St^2)^(1/4)
  bool in_band = false;
  Interaction interaction = Interaction::very_weak;
};

Dimensionless derive_dimensionless(const PhysicalScales& s, const InteractionThresholds& th = {});

}  // namespace bte
