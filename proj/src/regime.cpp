#include "bte/regime.hpp"

#include <cmath>
#include <sstream>

namespace bte {

namespace {

constexpr double kEq = 1e-12;

bool eq(double a, double b) { return std::abs(a - b) <= kEq; }

std::string fmt(double r, double c1, double c2) {
  std::ostringstream os;
  os << "(r=" << r << ", c1=" << c1 << ", c2=" << c2 << ")";
  return os.str();
}

Regime make(RegimeId id, const char* header, bool adv0, bool dif0, bool adv1, bool dif1, int inviscid = -1) {
  Regime g{id, to_string(id), header, {}, inviscid};
  g.flags.species[0] = {adv0, dif0};
  g.flags.species[1] = {adv1, dif1};
  return g;
}

}  // namespace

std::string to_string(RegimeId id) {
  switch (id) {
    case RegimeId::navier_stokes_fourier: return "navier_stokes_fourier";
    case RegimeId::euler_navier_stokes: return "euler_navier_stokes";
    case RegimeId::euler_fourier: return "euler_fourier";
    case RegimeId::stokes_fourier: return "stokes_fourier";
    case RegimeId::relaxation_stokes: return "relaxation_stokes";
    case RegimeId::relaxation: return "relaxation";
  }
  return "?";
}

std::string to_string(Interaction i) {
  switch (i) {
    case Interaction::strong: return "strong";
    case Interaction::weak: return "weak";
    case Interaction::very_weak: return "very_weak";
  }
  return "?";
}

Regime classify(double r, double c1, double c2) {
  if (!std::isfinite(r) || !std::isfinite(c1) || !std::isfinite(c2))
    throw UnclassifiedError("unclassified: non-finite exponents");
  if (r < 1.0 - kEq) throw UnclassifiedError("unclassified: r must be >= 1, got " + fmt(r, c1, c2));
  if (c1 < 1.0 - kEq || c2 < 1.0 - kEq) throw UnclassifiedError("unclassified: c_l must be >= 1 " + fmt(r, c1, c2));
  if (c1 >= 2.0 * r - kEq || c2 >= 2.0 * r - kEq)
    throw UnclassifiedError("unclassified: c_l must be < 2r " + fmt(r, c1, c2));

  const bool one1 = eq(c1, 1.0), one2 = eq(c2, 1.0);
  const bool same = eq(c1, c2);
  if (eq(r, 1.0)) {
    if (one1 && one2) return make(RegimeId::navier_stokes_fourier, "r=1, c_l=c_n=1", true, true, true, true);
    if (!one1 && one2) return make(RegimeId::euler_navier_stokes, "r=1, 1<c_l<2, c_n=1", true, false, true, true, 0);
    if (one1 && !one2) return make(RegimeId::euler_navier_stokes, "r=1, 1<c_l<2, c_n=1", true, true, true, false, 1);
    if (same) return make(RegimeId::euler_fourier, "r=1, 1<c_l=c_n<2", true, false, true, false);
  } else {
    if (one1 && one2) return make(RegimeId::stokes_fourier, "r>1, c_l=c_n=1", false, true, false, true);
    if (!one1 && one2) return make(RegimeId::relaxation_stokes, "r>1, 1<c_l<2r, c_n=1", false, false, false, true, 0);
    if (one1 && !one2) return make(RegimeId::relaxation_stokes, "r>1, 1<c_l<2r, c_n=1", false, true, false, false, 1);
    if (same) return make(RegimeId::relaxation, "r>1, 1<c_l=c_n<2r", false, false, false, false);
  }
  throw UnclassifiedError("unclassified: c1 != c2 with both > 1 is not covered " + fmt(r, c1, c2));
}

ScalingParams scaling_from_exponents(double epsilon, double r, double c1, double c2) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw std::invalid_argument("scaling: epsilon must lie in (0, 1)");
  ScalingParams p;
  p.epsilon = epsilon;
  p.r = r;
  p.c1 = c1;
  p.c2 = c2;
  p.q = (2.0 + c1 + c2) / 4.0;
  p.St = epsilon;
  p.Kn1 = std::pow(epsilon, c1);
  p.Kn2 = std::pow(epsilon, c2);
  p.delta_bar = std::pow(epsilon, p.q);
  return p;
}

Dimensionless derive_dimensionless(const PhysicalScales& s, const InteractionThresholds& th) {
  if (!(s.t0 > 0 && s.L0 > 0 && s.T0 > 0 && s.m > 0 && s.k > 0 && s.tau1 > 0 && s.tau2 > 0 && s.delta_bar > 0))
    throw std::invalid_argument("dimensionless analysis: all scales must be positive");
  Dimensionless d;
  d.U0 = s.L0 / s.t0;
  d.c0 = std::sqrt(5.0 * s.k * s.T0 / (3.0 * s.m));
  const double tau[2] = {s.tau1, s.tau2};
  for (int l = 0; l < 2; ++l)
    for (int n = 0; n < 2; ++n) {
      const double delta = l == n ? 1.0 : s.delta_bar;
      d.tau[l][n] = std::sqrt(tau[l] * tau[n]) / (delta * delta);
      d.mfp[l][n] = d.c0 * d.tau[l][n];
    }
  d.St = s.L0 / (d.c0 * s.t0);
  d.Kn1 = d.mfp[0][0] / s.L0;
  d.Kn2 = d.mfp[1][1] / s.L0;
  d.delta_bar = s.delta_bar;
  d.ratio = s.delta_bar / std::pow(d.Kn1 * d.Kn2 * d.St * d.St, 0.25);
  d.in_band = d.ratio >= th.band_lo && d.ratio <= th.band_hi;
  if (d.ratio <= th.band_hi)
    d.interaction = Interaction::very_weak;
  else if (s.delta_bar >= th.strong_delta)
    d.interaction = Interaction::strong;
  else
    d.interaction = Interaction::weak;
  return d;
}

}  // namespace bte
