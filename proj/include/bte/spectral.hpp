#pragma once

#include "bte/velocity_space.hpp"

#include <complex>
#include <map>
#include <memory>
#include <mutex>

namespace bte {

using Spectrum = Eigen::MatrixXcd;  // one column of half-spectrum coefficients per field

// Uniform periodic grid on [0, 2pi)^dim, dim in {1, 2}; node (i, j) has index i*n + j.
// Fields are columns of a column-major matrix, so many fields transform in one FFTW call.
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int n);
  ~PeriodicGrid();
  PeriodicGrid(const PeriodicGrid&) = delete;
  PeriodicGrid& operator=(const PeriodicGrid&) = delete;

  int dim() const { return dim_; }
  int n() const { return n_; }
  Index size() const { return size_; }
  Index spectral_size() const { return spec_; }
  double dx() const { return 2.0 * EIGEN_PI / n_; }
  double cell_volume() const { return dim_ == 1 ? dx() : dx() * dx(); }
  double volume() const { return dim_ == 1 ? 2.0 * EIGEN_PI : 4.0 * EIGEN_PI * EIGEN_PI; }

  // Coordinate along axis (0 or 1) of node p.
  double x(Index p, int axis) const;
  Field coordinate(int axis) const;
  // Integer wavenumber along axis of half-spectrum index s.
  int wavenumber(Index s, int axis) const;
  // |k|^2 per spectral index.
  const Eigen::VectorXd& k2() const { return k2_; }
  // Weight of a half-spectrum coefficient in Parseval sums (2 for the mirrored half, else 1).
  const Eigen::VectorXd& multiplicity() const { return mult_; }
  // 2/3-rule mask.
  const Eigen::VectorXd& dealias_mask() const { return dealias_; }

  Spectrum forward(const Eigen::MatrixXd& f) const;
  Eigen::MatrixXd backward(const Spectrum& F) const;  // normalised inverse
  Field backward_field(const Eigen::VectorXcd& F) const;

  // Spectral partial derivative along axis; the Nyquist mode of that axis is dropped.
  Eigen::MatrixXd derivative(const Eigen::MatrixXd& f, int axis) const;
  // i k_axis factor per spectral index (Nyquist zeroed).
  const Eigen::VectorXcd& ik(int axis) const { return ik_[axis]; }

  // int |f|^2 dx for each column, computed in physical space.
  Eigen::VectorXd l2_squared(const Eigen::MatrixXd& f) const;
  // sum over |alpha| <= s of |k^alpha|^2 per spectral index (the H^s symbol).
  Eigen::VectorXd sobolev_symbol(int s) const;
  // Squared H^s norm of each column (the sum of all the int |d^alpha f|^2).
  Eigen::VectorXd hs_squared(const Eigen::MatrixXd& f, int s) const;
  // Same from a spectrum.
  Eigen::VectorXd hs_squared_spectrum(const Spectrum& F, int s) const;

 private:
  struct Plans;
  Plans& plans_for(Index howmany) const;

  int dim_, n_;
  Index size_, spec_;
  Eigen::VectorXd k2_, mult_, dealias_;
  Eigen::VectorXcd ik_[2];
  mutable std::mutex mutex_;
  mutable std::map<Index, std::unique_ptr<Plans>> plans_;
};

}  // namespace bte
