#include "bte/collision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace bte {

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "hard_sphere") return KernelKind::hard_sphere;
  if (s == "maxwellian_molecule") return KernelKind::maxwellian_molecule;
  if (s == "bgk") return KernelKind::bgk;
  throw std::invalid_argument("unknown kernel kind '" + s + "'");
}

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::hard_sphere: return "hard_sphere";
    case KernelKind::maxwellian_molecule: return "maxwellian_molecule";
    case KernelKind::bgk: return "bgk";
  }
  return "?";
}

double CollisionKernel::b(double cos_theta) const {
  return angular ? angular(cos_theta) : 1.0 / (4.0 * EIGEN_PI);
}

CollisionKernel hard_sphere_kernel() { return {}; }

CollisionKernel maxwell_molecule_kernel() {
  CollisionKernel k;
  k.kind = KernelKind::maxwellian_molecule;
  k.gamma = 0.0;
  return k;
}

CollisionKernel bgk_kernel(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("bgk kernel: nu must be positive");
  CollisionKernel k;
  k.kind = KernelKind::bgk;
  k.bgk_nu = nu;
  return k;
}

double inner_product(const VelocityGrid& grid, const DistributionPair& a, const DistributionPair& b) {
  return inner_product(grid, a.g1, b.g1) + inner_product(grid, a.g2, b.g2);
}

double norm(const VelocityGrid& grid, const DistributionPair& a) { return std::sqrt(inner_product(grid, a, a)); }

CollisionModel::CollisionModel(VelocityGrid grid, SphereQuadrature sphere, CollisionKernel kernel)
    : grid_(std::move(grid)), sphere_(std::move(sphere)), kernel_(std::move(kernel)) {
  if (kernel_.is_quadrature() && kernel_.gamma != 0.0 && kernel_.gamma != 1.0)
    throw std::invalid_argument("collision kernel: gamma must be 0 or 1");
  if (!(kernel_.amplitude > 0.0)) throw std::invalid_argument("collision kernel: amplitude must be positive");
  m_ = global_maxwellian(grid_);
  sqrt_m_ = m_.cwiseSqrt();
  if (kernel_.kind == KernelKind::bgk) {
    nu_ = Field::Constant(grid_.size(), kernel_.bgk_nu);
  } else {
    double bint = 0.0;
    for (std::size_t s = 0; s < sphere_.size(); ++s) bint += sphere_.weights[s] * kernel_.b(sphere_.directions[s].z());
    const Field base = kernel_.gamma == 1.0 ? collision_frequency(grid_)
                                            : Field::Constant(grid_.size(), grid_.weight * m_.sum());
    nu_ = kernel_.amplitude * bint * base;
  }
  ker_ = SubspaceProjector(grid_, collision_invariant_fields(grid_, true));
  Eigen::MatrixXd ex(grid_.size(), 4);
  ex.col(0) = grid_.vx.cwiseProduct(sqrt_m_);
  ex.col(1) = grid_.vy.cwiseProduct(sqrt_m_);
  ex.col(2) = grid_.vz.cwiseProduct(sqrt_m_);
  // |v|^2 sqrtM minus its discrete sqrtM-component, so the exchange term carries no mass.
  const Field v2s = ((grid_.vx.array().square() + grid_.vy.array().square() + grid_.vz.array().square()) *
                     sqrt_m_.array()).matrix();
  ex.col(3) = v2s - (v2s.dot(sqrt_m_) / sqrt_m_.squaredNorm()) * sqrt_m_;
  exch_ = SubspaceProjector(grid_, ex);
  inv_ = SubspaceProjector(grid_, collision_invariant_fields(grid_, false));

  std::vector<bool> used(sphere_.size(), false);
  for (std::size_t a = 0; a < sphere_.size(); ++a) {
    if (used[a]) continue;
    used[a] = true;
    FoldedDirection fd{sphere_.directions[a], sphere_.weights[a], 0.0};
    for (std::size_t b = a + 1; b < sphere_.size(); ++b)
      if (!used[b] && (sphere_.directions[a] + sphere_.directions[b]).norm() < 1e-12) {
        used[b] = true;
        fd.w_minus = sphere_.weights[b];
        break;
      }
    folded_.push_back(fd);
  }
}

std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v_star, const Vec3& sigma) {
  if (std::abs(sigma.norm() - 1.0) > 1e-12) throw std::invalid_argument("post_collision: sigma must be a unit vector");
  const Vec3 d = (v - v_star).dot(sigma) * sigma;
  return {v - d, v_star + d};
}

namespace {

// Interpolation stencil for a point at fractional lattice position s (index units).
// Trilinear weights; with `corrected`, a second-difference term per axis makes it exact on quadratics.
struct Stencil {
  int count = 0;
  std::array<std::array<int, 3>, 16> o{};
  std::array<double, 16> w{};
  std::array<int, 3> lo{}, hi{};

  void add(int x, int y, int z, double wt) {
    for (int q = 0; q < count; ++q)
      if (o[q][0] == x && o[q][1] == y && o[q][2] == z) {
        w[q] += wt;
        return;
      }
    o[count] = {x, y, z};
    w[count] = wt;
    ++count;
  }
};

Stencil make_stencil(const Vec3& s, bool corrected) {
  Stencil st;
  int b[3], nt[3], r[3];
  double t[3], tau[3];
  for (int a = 0; a < 3; ++a) {
    b[a] = int(std::floor(s[a]));
    t[a] = s[a] - b[a];
    nt[a] = t[a] == 0.0 ? 1 : 2;
    st.lo[a] = b[a];
    st.hi[a] = b[a] + nt[a] - 1;
    r[a] = b[a];
    tau[a] = 0.0;
    if (corrected && t[a] != 0.0) {
      r[a] = t[a] < 0.5 ? b[a] : b[a] + 1;
      tau[a] = 0.5 * t[a] * (1.0 - t[a]);
      st.lo[a] = std::min(st.lo[a], r[a] - 1);
      st.hi[a] = std::max(st.hi[a], r[a] + 1);
    }
  }
  for (int x = 0; x < nt[0]; ++x)
    for (int y = 0; y < nt[1]; ++y)
      for (int z = 0; z < nt[2]; ++z) {
        const double wx = nt[0] == 1 ? 1.0 : (x ? t[0] : 1.0 - t[0]);
        const double wy = nt[1] == 1 ? 1.0 : (y ? t[1] : 1.0 - t[1]);
        const double wz = nt[2] == 1 ? 1.0 : (z ? t[2] : 1.0 - t[2]);
        st.add(b[0] + x, b[1] + y, b[2] + z, wx * wy * wz);
      }
  for (int a = 0; a < 3; ++a) {
    if (tau[a] == 0.0) continue;
    int lo[3] = {r[0], r[1], r[2]}, hi[3] = {r[0], r[1], r[2]};
    lo[a] -= 1;
    hi[a] += 1;
    st.add(lo[0], lo[1], lo[2], -tau[a]);
    st.add(hi[0], hi[1], hi[2], -tau[a]);
    st.add(r[0], r[1], r[2], 2.0 * tau[a]);
  }
  return st;
}

bool inside(const Stencil& st, int n) {
  for (int a = 0; a < 3; ++a)
    if (st.lo[a] < 0 || st.hi[a] > n - 1) return false;
  return true;
}

double interpolate(const VelocityGrid& g, const Stencil& st, const double* f) {
  double s = 0.0;
  for (int q = 0; q < st.count; ++q) s += st.w[q] * f[g.index(st.o[q][0], st.o[q][1], st.o[q][2])];
  return s;
}

Vec3 lattice_position(const VelocityGrid& g, const Vec3& v) {
  return (v - Vec3::Constant(g.axis[0])) / g.h;
}

// Geometry of one (relative offset m, folded sigma) class of collisions; shift-invariant over the box.
struct RowGeom {
  int n1 = 0, n2 = 0;
  std::array<Index, 16> off1{}, off2{};
  std::array<double, 16> w1{}, w2{};
  Index moff = 0;  // linear offset from v to v*
  double B = 0.0;  // kernel times folded sphere weight
};

// Visits every box row of collisions (v, v* = v - m h, sigma) with m in a half space.
// fn(geom, p0, len): nodes p0 .. p0+len-1 are the v's of the row.
template <class Fn>
void for_each_row(const CollisionModel& model, bool corrected, Fn&& fn) {
  const VelocityGrid& g = model.grid();
  const CollisionKernel& ker = model.kernel();
  const int n = g.n;
  const Index nn = Index(n) * n;
  RowGeom geom;
  for (int mx = 0; mx < n; ++mx)
    for (int my = -(n - 1); my < n; ++my)
      for (int mz = -(n - 1); mz < n; ++mz) {
        if (mx == 0 && (my < 0 || (my == 0 && mz <= 0))) continue;
        const int m[3] = {mx, my, mz};
        const Vec3 gv = Vec3(mx, my, mz) * g.h;
        const double gn = gv.norm();
        const Vec3 ghat = gv / gn;
        const double gpow = ker.gamma == 1.0 ? gn : std::pow(gn, ker.gamma);
        geom.moff = Index(mx) * nn + Index(my) * n + mz;
        for (const auto& fd : model.folded()) {
          const double c = ghat.dot(fd.sigma);
          const double B = ker.amplitude * gpow * (fd.w_plus * ker.b(c) + (fd.w_minus != 0.0 ? fd.w_minus * ker.b(-c) : 0.0));
          if (B == 0.0) continue;
          const Vec3 d = gv.dot(fd.sigma) * fd.sigma / g.h;
          const Stencil s1 = make_stencil(-d, corrected);
          const Stencil s2 = make_stencil(Vec3(-mx, -my, -mz) + d, corrected);
          int lo[3], hi[3];
          bool empty = false;
          for (int a = 0; a < 3; ++a) {
            lo[a] = std::max({0, m[a], -s1.lo[a], -s2.lo[a]});
            hi[a] = std::min({n, n + m[a], n - s1.hi[a], n - s2.hi[a]});
            if (lo[a] >= hi[a]) empty = true;
          }
          if (empty) continue;
          geom.B = B;
          geom.n1 = s1.count;
          geom.n2 = s2.count;
          for (int q = 0; q < s1.count; ++q) {
            geom.off1[q] = Index(s1.o[q][0]) * nn + Index(s1.o[q][1]) * n + s1.o[q][2];
            geom.w1[q] = s1.w[q];
          }
          for (int q = 0; q < s2.count; ++q) {
            geom.off2[q] = Index(s2.o[q][0]) * nn + Index(s2.o[q][1]) * n + s2.o[q][2];
            geom.w2[q] = s2.w[q];
          }
          const int len = hi[2] - lo[2];
          for (int i = lo[0]; i < hi[0]; ++i)
            for (int j = lo[1]; j < hi[1]; ++j) fn(geom, g.index(i, j, lo[2]), len);
        }
      }
}

// Batched rows: a batch holds S fields interleaved, value of field s at node p is data[p*S + s].
inline void gather(const RowGeom& geom, bool first, const double* f, Index p0, int len, int S, double* __restrict out) {
  const int cnt = first ? geom.n1 : geom.n2;
  const Index* off = first ? geom.off1.data() : geom.off2.data();
  const double* w = first ? geom.w1.data() : geom.w2.data();
  const int e = len * S;
  for (int k = 0; k < e; ++k) out[k] = 0.0;
  for (int q = 0; q < cnt; ++q) {
    const double wq = w[q];
    const double* __restrict src = f + (p0 + off[q]) * S;
    for (int k = 0; k < e; ++k) out[k] += wq * src[k];
  }
}

inline void scatter(const RowGeom& geom, bool first, double* f, Index p0, int len, int S, const double* __restrict val) {
  const int cnt = first ? geom.n1 : geom.n2;
  const Index* off = first ? geom.off1.data() : geom.off2.data();
  const double* w = first ? geom.w1.data() : geom.w2.data();
  const int e = len * S;
  for (int q = 0; q < cnt; ++q) {
    const double wq = w[q];
    double* __restrict dst = f + (p0 + off[q]) * S;
    for (int k = 0; k < e; ++k) dst[k] += wq * val[k];
  }
}

inline void add_row(double* f, Index p0, int len, int S, const double* __restrict val, double sign) {
  double* __restrict dst = f + p0 * S;
  const int e = len * S;
  for (int k = 0; k < e; ++k) dst[k] += sign * val[k];
}

void require_quadrature(const CollisionModel& model, const char* what) {
  if (!model.kernel().is_quadrature())
    throw std::invalid_argument(std::string(what) + ": kernel is not a quadrature kind");
}

void require_size(const CollisionModel& model, const Field& f) {
  if (f.size() != model.grid().size()) throw std::invalid_argument("collision: field length does not match the grid");
}

void require_batch(const CollisionModel& model, const Batch& f) {
  if (f.cols() != model.grid().size()) throw std::invalid_argument("collision: batch width does not match the grid");
}

Field to_polynomial(const CollisionModel& model, const Field& g) { return g.cwiseQuotient(model.sqrtM()); }

Batch to_polynomial(const CollisionModel& model, const Batch& g) {
  return g * model.sqrtM().cwiseInverse().asDiagonal();
}

Batch from_gradient(const CollisionModel& model, const Batch& out) {
  return out * model.sqrtM().cwiseInverse().asDiagonal();
}

// Weak-form linear pass in polynomial variables (g / sqrtM). Species-a output of the cross form
// into oa and species-b output into ob; with pa == pb, oa alone is L-hat.
void linear_pass(const CollisionModel& model, const double* fa, const double* fb, int S, double* oa, double* ob) {
  const double* M = model.M().data();
  const double w = model.grid().weight;
  const int n = model.grid().n * S;
  std::vector<double> buf(6 * n);
  double *Aa = buf.data(), *Sa = Aa + n, *Ab = Sa + n, *Sb = Ab + n, *D12 = Sb + n, *D21 = D12 + n;
  const bool same = fa == fb;
  for_each_row(model, true, [&](const RowGeom& geom, Index p0, int len) {
    const double coef = 0.5 * w * geom.B;
    const Index ps = p0 - geom.moff;
    gather(geom, true, fa, p0, len, S, Aa);
    gather(geom, false, fa, p0, len, S, Sa);
    if (!same) {
      gather(geom, true, fb, p0, len, S, Ab);
      gather(geom, false, fb, p0, len, S, Sb);
    }
    const double* Abp = same ? Aa : Ab;
    const double* Sbp = same ? Sa : Sb;
    const double* a0 = fa + p0 * S;
    const double* as = fa + ps * S;
    const double* b0 = fb + p0 * S;
    const double* bs = fb + ps * S;
    for (int k = 0; k < len; ++k) {
      const double c = coef * M[p0 + k] * M[ps + k];
      for (int s = 0; s < S; ++s) {
        const int e = k * S + s;
        D12[e] = c * (Aa[e] + Sbp[e] - a0[e] - bs[e]);
        D21[e] = c * (Abp[e] + Sa[e] - b0[e] - as[e]);
      }
    }
    if (oa) {
      scatter(geom, true, oa, p0, len, S, D12);
      add_row(oa, p0, len, S, D12, -1.0);
      scatter(geom, false, oa, p0, len, S, D21);
      add_row(oa, ps, len, S, D21, -1.0);
    }
    if (ob) {
      scatter(geom, false, ob, p0, len, S, D12);
      add_row(ob, ps, len, S, D12, -1.0);
      scatter(geom, true, ob, p0, len, S, D21);
      add_row(ob, p0, len, S, D21, -1.0);
    }
  });
}

// Both species of calL in one sweep: self forms plus the cross form.
void call_pass(const CollisionModel& model, const double* f1, const double* f2, int S, double* o1, double* o2) {
  const double* M = model.M().data();
  const double w = model.grid().weight;
  const int n = model.grid().n * S;
  std::vector<double> buf(8 * n);
  double *A1 = buf.data(), *S1 = A1 + n, *A2 = S1 + n, *S2 = A2 + n;
  double *E1 = S2 + n, *E2 = E1 + n, *F1 = E2 + n, *F2 = F1 + n;
  for_each_row(model, true, [&](const RowGeom& geom, Index p0, int len) {
    const double coef = 0.5 * w * geom.B;
    const Index ps = p0 - geom.moff;
    gather(geom, true, f1, p0, len, S, A1);
    gather(geom, false, f1, p0, len, S, S1);
    gather(geom, true, f2, p0, len, S, A2);
    gather(geom, false, f2, p0, len, S, S2);
    const double *x0 = f1 + p0 * S, *xs = f1 + ps * S, *y0 = f2 + p0 * S, *ys = f2 + ps * S;
    for (int k = 0; k < len; ++k) {
      const double c = coef * M[p0 + k] * M[ps + k];
      for (int s = 0; s < S; ++s) {
        const int e = k * S + s;
        const double d11 = A1[e] + S1[e] - x0[e] - xs[e];
        const double d22 = A2[e] + S2[e] - y0[e] - ys[e];
        const double d12 = A1[e] + S2[e] - x0[e] - ys[e];
        const double d21 = A2[e] + S1[e] - y0[e] - xs[e];
        E1[e] = c * (d11 + d12);  // species 1 at v
        F1[e] = c * (d11 + d21);  // species 1 at v*
        E2[e] = c * (d22 + d21);
        F2[e] = c * (d22 + d12);
      }
    }
    scatter(geom, true, o1, p0, len, S, E1);
    add_row(o1, p0, len, S, E1, -1.0);
    scatter(geom, false, o1, p0, len, S, F1);
    add_row(o1, ps, len, S, F1, -1.0);
    scatter(geom, true, o2, p0, len, S, E2);
    add_row(o2, p0, len, S, E2, -1.0);
    scatter(geom, false, o2, p0, len, S, F2);
    add_row(o2, ps, len, S, F2, -1.0);
  });
}

// Weak form of Gamma-hat, averaged over the pre- and post-collisional representations.
void gamma_pass(const CollisionModel& model, const double* fg, const double* fh, int S, double* out) {
  const double* M = model.M().data();
  const double w = model.grid().weight;
  const int n = model.grid().n * S;
  std::vector<double> buf(5 * n);
  double *Ag = buf.data(), *Sg = Ag + n, *Ah = Sg + n, *Sh = Ah + n, *T = Sh + n;
  const bool same = fg == fh;
  for_each_row(model, true, [&](const RowGeom& geom, Index p0, int len) {
    const double coef = 0.25 * w * geom.B;
    const Index ps = p0 - geom.moff;
    gather(geom, true, fg, p0, len, S, Ag);
    gather(geom, false, fg, p0, len, S, Sg);
    if (!same) {
      gather(geom, true, fh, p0, len, S, Ah);
      gather(geom, false, fh, p0, len, S, Sh);
    }
    const double* Ahp = same ? Ag : Ah;
    const double* Shp = same ? Sg : Sh;
    const double *g0 = fg + p0 * S, *gs = fg + ps * S, *h0 = fh + p0 * S, *hs = fh + ps * S;
    for (int k = 0; k < len; ++k) {
      const double c = coef * M[p0 + k] * M[ps + k];
      for (int s = 0; s < S; ++s) {
        const int e = k * S + s;
        const double pre = g0[e] * hs[e] + gs[e] * h0[e];
        const double post = Ag[e] * Shp[e] + Sg[e] * Ahp[e];
        T[e] = c * (pre - post);
      }
    }
    scatter(geom, true, out, p0, len, S, T);
    add_row(out, p0, len, S, T, -1.0);
    scatter(geom, false, out, p0, len, S, T);
    add_row(out, ps, len, S, T, -1.0);
  });
}

void q_pass(const CollisionModel& model, const double* fa, const double* ga, int S, double* o) {
  const double w = model.grid().weight;
  const int n = model.grid().n * S;
  std::vector<double> buf(5 * n);
  double *Fp = buf.data(), *Fs = Fp + n, *Gp = Fs + n, *Gs = Gp + n, *T = Gs + n;
  const bool same = fa == ga;
  for_each_row(model, false, [&](const RowGeom& geom, Index p0, int len) {
    const double coef = 0.5 * w * geom.B;
    const Index ps = p0 - geom.moff;
    gather(geom, true, fa, p0, len, S, Fp);
    gather(geom, false, fa, p0, len, S, Fs);
    if (!same) {
      gather(geom, true, ga, p0, len, S, Gp);
      gather(geom, false, ga, p0, len, S, Gs);
    }
    const double* gp = same ? Fp : Gp;
    const double* gs = same ? Fs : Gs;
    const double *f0 = fa + p0 * S, *fs = fa + ps * S, *g0 = ga + p0 * S, *g1 = ga + ps * S;
    const int e = len * S;
    for (int k = 0; k < e; ++k) T[k] = coef * (Fp[k] * gs[k] + Fs[k] * gp[k] - f0[k] * g1[k] - fs[k] * g0[k]);
    add_row(o, p0, len, S, T, 1.0);
    add_row(o, ps, len, S, T, 1.0);
  });
}

Batch bgk_batch(const Batch& g, double nu, const SubspaceProjector& projector) {
  const Eigen::MatrixXd& q = projector.orthonormal();
  return nu * (g - (g * q) * q.transpose());
}

}  // namespace

Field conservative_correction(const CollisionModel& model, const Field& q) {
  return model.invariant_projector().complement(q);
}

Batch conservative_correction(const CollisionModel& model, const Batch& q) {
  const Eigen::MatrixXd& b = model.invariant_projector().orthonormal();
  return q - (q * b) * b.transpose();
}

Batch q_bilinear(const CollisionModel& model, const Batch& f, const Batch& g) {
  require_quadrature(model, "q_bilinear");
  require_batch(model, f);
  require_batch(model, g);
  if (f.rows() != g.rows()) throw std::invalid_argument("q_bilinear: batch sizes differ");
  Batch out = Batch::Zero(f.rows(), f.cols());
  q_pass(model, f.data(), &f == &g ? f.data() : g.data(), int(f.rows()), out.data());
  if (model.kernel().conservative_fix) out = conservative_correction(model, out);
  return out;
}

Field q_bilinear(const CollisionModel& model, const Field& f, const Field& g) {
  require_quadrature(model, "q_bilinear");
  require_size(model, f);
  require_size(model, g);
  Field out = Field::Zero(f.size());
  q_pass(model, f.data(), &f == &g ? f.data() : g.data(), 1, out.data());
  if (model.kernel().conservative_fix) out = conservative_correction(model, out);
  return out;
}

Field q_bilinear_direct(const CollisionModel& model, const Field& f, const Field& g) {
  require_quadrature(model, "q_bilinear_direct");
  require_size(model, f);
  require_size(model, g);
  const VelocityGrid& grid = model.grid();
  const CollisionKernel& ker = model.kernel();
  const SphereQuadrature& sph = model.sphere();
  Field out = Field::Zero(grid.size());
  for (Index p = 0; p < grid.size(); ++p) {
    const Vec3 v = grid.node(p);
    double acc = 0.0;
    for (Index s = 0; s < grid.size(); ++s) {
      const Vec3 vs = grid.node(s);
      const Vec3 rel = v - vs;
      const double gn = rel.norm();
      if (gn == 0.0) continue;
      for (std::size_t k = 0; k < sph.size(); ++k) {
        const Vec3& sig = sph.directions[k];
        const auto [vp, vsp] = post_collision(v, vs, sig);
        const Stencil a = make_stencil(lattice_position(grid, vp), false);
        const Stencil b = make_stencil(lattice_position(grid, vsp), false);
        if (!inside(a, grid.n) || !inside(b, grid.n)) continue;
        const double B = ker.amplitude * std::pow(gn, ker.gamma) * ker.b(rel.dot(sig) / gn) * sph.weights[k];
        const double gain = interpolate(grid, a, f.data()) * interpolate(grid, b, g.data()) +
                            interpolate(grid, b, f.data()) * interpolate(grid, a, g.data());
        acc += B * (gain - f[p] * g[s] - f[s] * g[p]);
      }
    }
    out[p] = 0.5 * grid.weight * acc;
  }
  if (ker.conservative_fix) out = conservative_correction(model, out);
  return out;
}

Field bgk_apply(const Field& g, double nu, const SubspaceProjector& projector) {
  return nu * projector.complement(g);
}

Field square_amplitude(const CollisionModel& model, const Field& g) {
  return g.cwiseProduct(g).cwiseQuotient(model.sqrtM());
}

Batch l_hat(const CollisionModel& model, const Batch& g) {
  require_batch(model, g);
  if (!model.kernel().is_quadrature()) return bgk_batch(g, model.kernel().bgk_nu, model.kernel_projector());
  const Batch phi = to_polynomial(model, g);
  Batch out = Batch::Zero(g.rows(), g.cols());
  linear_pass(model, phi.data(), phi.data(), int(g.rows()), out.data(), nullptr);
  return from_gradient(model, out);
}

Batch l_hat_pair(const CollisionModel& model, const Batch& g, const Batch& h) {
  require_batch(model, g);
  require_batch(model, h);
  if (!model.kernel().is_quadrature()) {
    const double nu = model.kernel().bgk_nu;
    const Eigen::MatrixXd& q = model.exchange_projector().orthonormal();
    return bgk_batch(g, nu, model.kernel_projector()) + nu * (((g - h) * q) * q.transpose());
  }
  const Batch pa = to_polynomial(model, g);
  const Batch pb = to_polynomial(model, h);
  Batch out = Batch::Zero(g.rows(), g.cols());
  linear_pass(model, pa.data(), pb.data(), int(g.rows()), out.data(), nullptr);
  return from_gradient(model, out);
}

Batch gamma_hat(const CollisionModel& model, const Batch& g, const Batch& h) {
  require_batch(model, g);
  require_batch(model, h);
  if (!model.kernel().is_quadrature()) {
    const Batch prod = g.cwiseProduct(h) * model.sqrtM().cwiseInverse().asDiagonal();
    return 0.5 * bgk_batch(prod, model.kernel().bgk_nu, model.kernel_projector());
  }
  const Batch pg = to_polynomial(model, g);
  Batch out = Batch::Zero(g.rows(), g.cols());
  if (&g == &h) {
    gamma_pass(model, pg.data(), pg.data(), int(g.rows()), out.data());
  } else {
    const Batch ph = to_polynomial(model, h);
    gamma_pass(model, pg.data(), ph.data(), int(g.rows()), out.data());
  }
  return from_gradient(model, out);
}

std::pair<Batch, Batch> calL(const CollisionModel& model, const Batch& g1, const Batch& g2) {
  require_batch(model, g1);
  require_batch(model, g2);
  if (!model.kernel().is_quadrature())
    return {l_hat_pair(model, g1, g2) + l_hat(model, g1), l_hat_pair(model, g2, g1) + l_hat(model, g2)};
  const Batch p1 = to_polynomial(model, g1);
  const Batch p2 = to_polynomial(model, g2);
  Batch o1 = Batch::Zero(g1.rows(), g1.cols()), o2 = Batch::Zero(g2.rows(), g2.cols());
  call_pass(model, p1.data(), p2.data(), int(g1.rows()), o1.data(), o2.data());
  return {from_gradient(model, o1), from_gradient(model, o2)};
}

namespace {
Batch as_batch(const Field& f) { return f.transpose(); }
Field as_field(const Batch& b) { return b.row(0).transpose(); }
}  // namespace

Field l_hat(const CollisionModel& model, const Field& g) {
  require_size(model, g);
  return as_field(l_hat(model, as_batch(g)));
}

Field l_hat_pair(const CollisionModel& model, const Field& g, const Field& h) {
  require_size(model, g);
  require_size(model, h);
  return as_field(l_hat_pair(model, as_batch(g), as_batch(h)));
}

Field gamma_hat(const CollisionModel& model, const Field& g, const Field& h) {
  require_size(model, g);
  require_size(model, h);
  if (&g == &h) {
    const Batch b = as_batch(g);
    return as_field(gamma_hat(model, b, b));
  }
  return as_field(gamma_hat(model, as_batch(g), as_batch(h)));
}

DistributionPair vector_L(const CollisionModel& model, const DistributionPair& g) {
  return {l_hat(model, g.g1), l_hat(model, g.g2)};
}

DistributionPair vector_calL(const CollisionModel& model, const DistributionPair& g) {
  require_size(model, g.g1);
  require_size(model, g.g2);
  auto [a, b] = calL(model, as_batch(g.g1), as_batch(g.g2));
  return {as_field(a), as_field(b)};
}

DistributionPair vector_Gamma(const CollisionModel& model, const DistributionPair& g, const DistributionPair& h) {
  return {gamma_hat(model, g.g1, h.g1), gamma_hat(model, g.g2, h.g2)};
}

DistributionPair vector_GammaTilde(const CollisionModel& model, const DistributionPair& g, const DistributionPair& h) {
  return {gamma_hat(model, g.g1, h.g2), gamma_hat(model, g.g2, h.g1)};
}


namespace reference {

namespace {
template <class Fn>
void for_each_collision(const CollisionModel& model, Fn&& fn) {
  const VelocityGrid& grid = model.grid();
  const CollisionKernel& ker = model.kernel();
  const SphereQuadrature& sph = model.sphere();
  for (Index p = 0; p < grid.size(); ++p)
    for (Index s = 0; s < grid.size(); ++s) {
      const Vec3 v = grid.node(p), vs = grid.node(s);
      const double gn = (v - vs).norm();
      if (gn == 0.0) continue;
      for (std::size_t k = 0; k < sph.size(); ++k) {
        const auto [vp, vsp] = post_collision(v, vs, sph.directions[k]);
        const Stencil a = make_stencil(lattice_position(grid, vp), true);
        const Stencil b = make_stencil(lattice_position(grid, vsp), true);
        if (!inside(a, grid.n) || !inside(b, grid.n)) continue;
        const double B = ker.amplitude * std::pow(gn, ker.gamma) * ker.b((v - vs).dot(sph.directions[k]) / gn) *
                         sph.weights[k];
        const double c = grid.weight * grid.weight * B * model.M()[p] * model.M()[s];
        fn(p, s, a, b, c);
      }
    }
}
}  // namespace

double l_hat_form(const CollisionModel& model, const Field& g, const Field& h) {
  require_quadrature(model, "l_hat_form");
  const Field phi = to_polynomial(model, g), chi = to_polynomial(model, h);
  const VelocityGrid& grid = model.grid();
  double acc = 0.0;
  for_each_collision(model, [&](Index p, Index s, const Stencil& a, const Stencil& b, double c) {
    const double dp = interpolate(grid, a, phi.data()) + interpolate(grid, b, phi.data()) - phi[p] - phi[s];
    const double dc = interpolate(grid, a, chi.data()) + interpolate(grid, b, chi.data()) - chi[p] - chi[s];
    acc += c * dp * dc;
  });
  return 0.25 * acc;
}

double l_hat_pair_form(const CollisionModel& model, const Field& g1, const Field& g2, const Field& k1) {
  require_quadrature(model, "l_hat_pair_form");
  const Field p1 = to_polynomial(model, g1), p2 = to_polynomial(model, g2), c1 = to_polynomial(model, k1);
  const VelocityGrid& grid = model.grid();
  double acc = 0.0;
  for_each_collision(model, [&](Index p, Index s, const Stencil& a, const Stencil& b, double c) {
    const double d = interpolate(grid, a, p1.data()) + interpolate(grid, b, p2.data()) - p1[p] - p2[s];
    acc += c * d * (interpolate(grid, a, c1.data()) - c1[p]);
  });
  return 0.5 * acc;
}

double gamma_hat_form(const CollisionModel& model, const Field& g, const Field& h, const Field& k) {
  require_quadrature(model, "gamma_hat_form");
  const Field pg = to_polynomial(model, g), ph = to_polynomial(model, h), pk = to_polynomial(model, k);
  const VelocityGrid& grid = model.grid();
  double acc = 0.0;
  for_each_collision(model, [&](Index p, Index s, const Stencil& a, const Stencil& b, double c) {
    const double pre = pg[p] * ph[s] + pg[s] * ph[p];
    const double post = interpolate(grid, a, pg.data()) * interpolate(grid, b, ph.data()) +
                        interpolate(grid, b, pg.data()) * interpolate(grid, a, ph.data());
    const double dk = interpolate(grid, a, pk.data()) + interpolate(grid, b, pk.data()) - pk[p] - pk[s];
    acc += c * (pre - post) * dk;
  });
  return 0.125 * acc;
}

Field l_hat_strong(const CollisionModel& model, const Field& g) {
  const Field gm = g.cwiseProduct(model.sqrtM());
  const Field q = q_bilinear(model, gm, model.M()) + q_bilinear(model, model.M(), gm);
  return -q.cwiseQuotient(model.sqrtM());
}

}  // namespace reference

}  // namespace bte
