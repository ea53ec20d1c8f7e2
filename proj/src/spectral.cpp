#include "bte/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <stdexcept>

namespace bte {

struct PeriodicGrid::Plans {
  fftw_plan fwd = nullptr, bwd = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

namespace {
// The FFTW planner is not reentrant; every plan creation goes through this lock.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

PeriodicGrid::PeriodicGrid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("periodic grid: dimension must be 1 or 2");
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("periodic grid: points per axis must be even and >= 4");
  const Index half = n / 2 + 1;
  size_ = dim == 1 ? n : Index(n) * n;
  spec_ = dim == 1 ? half : Index(n) * half;
  k2_.resize(spec_);
  mult_.resize(spec_);
  dealias_.resize(spec_);
  for (int a = 0; a < 2; ++a) ik_[a] = Eigen::VectorXcd::Zero(spec_);
  for (Index s = 0; s < spec_; ++s) {
    const int k0 = wavenumber(s, 0);
    const int k1 = dim == 2 ? wavenumber(s, 1) : 0;
    k2_[s] = double(k0) * k0 + double(k1) * k1;
    const Index last = dim == 1 ? s : s % half;
    mult_[s] = (last == 0 || last == n / 2) ? 1.0 : 2.0;
    const bool keep = 3 * std::abs(k0) < n && 3 * std::abs(k1) < n;
    dealias_[s] = keep ? 1.0 : 0.0;
    ik_[0][s] = std::abs(k0) == n / 2 ? 0.0 : std::complex<double>(0.0, k0);
    if (dim == 2) ik_[1][s] = std::abs(k1) == n / 2 ? 0.0 : std::complex<double>(0.0, k1);
  }
}

PeriodicGrid::~PeriodicGrid() = default;

double PeriodicGrid::x(Index p, int axis) const {
  if (axis >= dim_) return 0.0;
  const Index i = dim_ == 1 ? p : (axis == 0 ? p / n_ : p % n_);
  return dx() * double(i);
}

Field PeriodicGrid::coordinate(int axis) const {
  Field c(size_);
  for (Index p = 0; p < size_; ++p) c[p] = x(p, axis);
  return c;
}

int PeriodicGrid::wavenumber(Index s, int axis) const {
  const Index half = n_ / 2 + 1;
  if (dim_ == 1) return axis == 0 ? int(s) : 0;
  if (axis == 1) return int(s % half);
  const int i = int(s / half);
  return i <= n_ / 2 ? i : i - n_;
}

PeriodicGrid::Plans& PeriodicGrid::plans_for(Index howmany) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = plans_.find(howmany);
  if (it != plans_.end()) return *it->second;
  std::lock_guard<std::mutex> plock(planner_mutex());
  auto p = std::make_unique<Plans>();
  int dims[2] = {n_, n_};
  Eigen::MatrixXd rin(size_, howmany);
  Spectrum cout_(spec_, howmany);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p->fwd = fftw_plan_many_dft_r2c(dim_, dims, int(howmany), rin.data(), nullptr, 1, int(size_),
                                  reinterpret_cast<fftw_complex*>(cout_.data()), nullptr, 1, int(spec_), flags);
  p->bwd = fftw_plan_many_dft_c2r(dim_, dims, int(howmany), reinterpret_cast<fftw_complex*>(cout_.data()), nullptr, 1,
                                  int(spec_), rin.data(), nullptr, 1, int(size_), flags);
  if (!p->fwd || !p->bwd) throw std::runtime_error("periodic grid: FFTW planning failed");
  auto& ref = *p;
  plans_.emplace(howmany, std::move(p));
  return ref;
}

Spectrum PeriodicGrid::forward(const Eigen::MatrixXd& f) const {
  if (f.rows() != size_) throw std::invalid_argument("periodic grid: field length does not match the grid");
  Spectrum F(spec_, f.cols());
  if (f.cols() == 0) return F;
  Eigen::MatrixXd in = f;  // planner-compatible, contiguous copy
  fftw_execute_dft_r2c(plans_for(f.cols()).fwd, in.data(), reinterpret_cast<fftw_complex*>(F.data()));
  return F;
}

Eigen::MatrixXd PeriodicGrid::backward(const Spectrum& F) const {
  if (F.rows() != spec_) throw std::invalid_argument("periodic grid: spectrum length does not match the grid");
  Eigen::MatrixXd f(size_, F.cols());
  if (F.cols() == 0) return f;
  Spectrum tmp = F;  // c2r destroys its input
  fftw_execute_dft_c2r(plans_for(F.cols()).bwd, reinterpret_cast<fftw_complex*>(tmp.data()), f.data());
  f /= double(size_);
  return f;
}

Field PeriodicGrid::backward_field(const Eigen::VectorXcd& F) const {
  Spectrum m = F;
  return backward(m).col(0);
}

Eigen::MatrixXd PeriodicGrid::derivative(const Eigen::MatrixXd& f, int axis) const {
  if (axis >= dim_) return Eigen::MatrixXd::Zero(f.rows(), f.cols());
  Spectrum F = forward(f);
  F = ik_[axis].asDiagonal() * F;
  return backward(F);
}

Eigen::VectorXd PeriodicGrid::l2_squared(const Eigen::MatrixXd& f) const {
  return cell_volume() * f.colwise().squaredNorm().transpose();
}

Eigen::VectorXd PeriodicGrid::sobolev_symbol(int s) const {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(spec_);
  for (Index q = 0; q < spec_; ++q) {
    const double a = double(wavenumber(q, 0)) * wavenumber(q, 0);
    const double b = dim_ == 2 ? double(wavenumber(q, 1)) * wavenumber(q, 1) : 0.0;
    double sum = 0.0;
    if (dim_ == 1) {
      for (int j = 0; j <= s; ++j) sum += std::pow(a, j);
    } else {
      for (int i = 0; i <= s; ++i)
        for (int j = 0; i + j <= s; ++j) sum += std::pow(a, i) * std::pow(b, j);
    }
    w[q] = sum;
  }
  return w;
}

Eigen::VectorXd PeriodicGrid::hs_squared_spectrum(const Spectrum& F, int s) const {
  const Eigen::VectorXd w = sobolev_symbol(s).cwiseProduct(mult_);
  return (cell_volume() / double(size_)) * (w.transpose() * F.cwiseAbs2()).transpose();
}

Eigen::VectorXd PeriodicGrid::hs_squared(const Eigen::MatrixXd& f, int s) const { return hs_squared_spectrum(forward(f), s); }

}  // namespace bte
