#pragma once

// Frequency grids, per-frequency 4x4 quadrature transfer matrices, noise port
// bookkeeping and covariance assembly.
//
// Every matrix in this library acts on the quadrature vector
//   (X_s1, X_s2, X_i1, X_i2)
// i.e. amplitude and phase quadrature of the signal field followed by those of
// the idler field. Each noise port is an independent vacuum input with unit
// spectral variance per quadrature, so shot noise reads 1 per field.

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eprsq/constants.hpp"

namespace eprsq {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

enum class GridScale { Linear, Logarithmic };

const char* to_string(GridScale scale) noexcept;
GridScale parse_grid_scale(const std::string& text);

// Ordered sideband frequencies in rad/s. Copies share storage.
class FrequencyGrid {
 public:
  // Validates: at least two points, strictly increasing, all positive.
  FrequencyGrid(std::vector<double> omegas, GridScale scale);

  std::span<const double> omegas() const noexcept { return *points_; }
  double omega(std::size_t i) const { return (*points_)[i]; }
  double frequency_hz(std::size_t i) const { return (*points_)[i] / kTwoPi; }
  std::size_t size() const noexcept { return points_->size(); }
  GridScale scale() const noexcept { return scale_; }

  bool operator==(const FrequencyGrid& other) const noexcept;

 private:
  std::shared_ptr<const std::vector<double>> points_;
  GridScale scale_;
};

// Grid bounds are given in Hz; the returned points are Omega = 2*pi*f.
FrequencyGrid make_grid(double f_min_hz, double f_max_hz, std::size_t n, GridScale scale);

// Fixed basis change from (a_s, a_s^dag, a_i, a_i^dag) to quadratures.
const Mat4& quadrature_basis();
const Mat4& quadrature_basis_inverse();

class QuadratureTransfer {
 public:
  // Throws InconsistentState on a size mismatch and InvalidArgument on
  // non-finite entries.
  QuadratureTransfer(FrequencyGrid grid, std::vector<Mat4> matrices);

  static QuadratureTransfer identity(const FrequencyGrid& grid);

  const FrequencyGrid& grid() const noexcept { return grid_; }
  const Mat4& at(std::size_t i) const { return matrices_[i]; }
  const std::vector<Mat4>& matrices() const noexcept { return matrices_; }
  std::size_t size() const noexcept { return matrices_.size(); }

 private:
  FrequencyGrid grid_;
  std::vector<Mat4> matrices_;
};

struct NoisePort {
  std::string label;
  QuadratureTransfer transfer;
};

// Independent vacuum inputs of a network, each with its transfer to the
// network output. Labels are unique and all transfers share one grid.
class NoisePortSet {
 public:
  explicit NoisePortSet(FrequencyGrid grid);

  // Throws InconsistentState for a grid mismatch or a duplicate label.
  void add(std::string label, QuadratureTransfer transfer);

  bool contains(const std::string& label) const noexcept;
  const NoisePort* find(const std::string& label) const noexcept;

  const FrequencyGrid& grid() const noexcept { return grid_; }
  const std::vector<NoisePort>& ports() const noexcept { return ports_; }
  std::size_t size() const noexcept { return ports_.size(); }
  bool empty() const noexcept { return ports_.empty(); }

 private:
  FrequencyGrid grid_;
  std::vector<NoisePort> ports_;
};

// Symmetrised quadrature noise spectrum of the network output, in shot-noise
// units, one Hermitian 4x4 matrix per grid point.
class SpectralCovariance {
 public:
  SpectralCovariance(FrequencyGrid grid, std::vector<Mat4> matrices);

  const FrequencyGrid& grid() const noexcept { return grid_; }
  const Mat4& at(std::size_t i) const { return matrices_[i]; }
  const std::vector<Mat4>& matrices() const noexcept { return matrices_; }
  std::size_t size() const noexcept { return matrices_.size(); }

 private:
  FrequencyGrid grid_;
  std::vector<Mat4> matrices_;
};

// S(Omega) = sum_k T_k(Omega) T_k(Omega)^dag. Result is explicitly symmetrised
// so that Hermiticity holds to rounding.
SpectralCovariance covariance_from_ports(const NoisePortSet& ports);

}  // namespace eprsq
