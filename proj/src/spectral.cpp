#include "eprsq/spectral.hpp"

#include <cmath>
#include <utility>

#include "eprsq/errors.hpp"

namespace eprsq {

const char* to_string(GridScale scale) noexcept {
  return scale == GridScale::Linear ? "linear" : "log";
}

GridScale parse_grid_scale(const std::string& text) {
  if (text == "linear" || text == "lin") return GridScale::Linear;
  if (text == "log" || text == "logarithmic") return GridScale::Logarithmic;
  throw Error(ErrorKind::InvalidArgument, "unknown grid scale '" + text + "' (expected linear or log)");
}

FrequencyGrid::FrequencyGrid(std::vector<double> omegas, GridScale scale) : scale_(scale) {
  if (omegas.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "frequency grid needs at least 2 points");
  }
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!std::isfinite(omegas[i]) || omegas[i] <= 0.0) {
      throw Error(ErrorKind::InvalidArgument, "frequency grid points must be finite and positive");
    }
    if (i > 0 && omegas[i] <= omegas[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "frequency grid must be strictly increasing");
    }
  }
  points_ = std::make_shared<const std::vector<double>>(std::move(omegas));
}

bool FrequencyGrid::operator==(const FrequencyGrid& other) const noexcept {
  return points_ == other.points_ || *points_ == *other.points_;
}

FrequencyGrid make_grid(double f_min_hz, double f_max_hz, std::size_t n, GridScale scale) {
  if (!(f_min_hz > 0.0) || !std::isfinite(f_max_hz) || !(f_min_hz < f_max_hz)) {
    throw Error(ErrorKind::InvalidArgument, "grid bounds must satisfy 0 < f_min < f_max");
  }
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");

  std::vector<double> omegas(n);
  const double last = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / last;
    double f;
    if (scale == GridScale::Linear) {
      f = f_min_hz + t * (f_max_hz - f_min_hz);
    } else {
      f = std::exp(std::log(f_min_hz) + t * (std::log(f_max_hz) - std::log(f_min_hz)));
    }
    omegas[k] = kTwoPi * f;
  }
  omegas.front() = kTwoPi * f_min_hz;
  omegas.back() = kTwoPi * f_max_hz;
  return FrequencyGrid(std::move(omegas), scale);
}

const Mat4& quadrature_basis() {
  static const Mat4 gamma = [] {
    const Complex i(0.0, 1.0);
    Mat4 g = Mat4::Zero();
    g(0, 0) = 1.0;
    g(0, 1) = 1.0;
    g(1, 0) = -i;
    g(1, 1) = i;
    g(2, 2) = 1.0;
    g(2, 3) = 1.0;
    g(3, 2) = -i;
    g(3, 3) = i;
    return g;
  }();
  return gamma;
}

const Mat4& quadrature_basis_inverse() {
  static const Mat4 inverse = quadrature_basis().inverse();
  return inverse;
}

QuadratureTransfer::QuadratureTransfer(FrequencyGrid grid, std::vector<Mat4> matrices)
    : grid_(std::move(grid)), matrices_(std::move(matrices)) {
  if (matrices_.size() != grid_.size()) {
    throw Error(ErrorKind::InconsistentState, "transfer needs one matrix per grid point");
  }
  for (const Mat4& m : matrices_) {
    if (!m.allFinite()) throw Error(ErrorKind::InvalidArgument, "transfer matrix has non-finite entries");
  }
}

QuadratureTransfer QuadratureTransfer::identity(const FrequencyGrid& grid) {
  return QuadratureTransfer(grid, std::vector<Mat4>(grid.size(), Mat4::Identity()));
}

NoisePortSet::NoisePortSet(FrequencyGrid grid) : grid_(std::move(grid)) {}

void NoisePortSet::add(std::string label, QuadratureTransfer transfer) {
  if (!(transfer.grid() == grid_)) {
    throw Error(ErrorKind::InconsistentState, "port '" + label + "' uses a different frequency grid");
  }
  if (contains(label)) {
    throw Error(ErrorKind::InconsistentState, "duplicate port label '" + label + "'");
  }
  ports_.push_back(NoisePort{std::move(label), std::move(transfer)});
}

bool NoisePortSet::contains(const std::string& label) const noexcept {
  return find(label) != nullptr;
}

const NoisePort* NoisePortSet::find(const std::string& label) const noexcept {
  for (const NoisePort& p : ports_) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

SpectralCovariance::SpectralCovariance(FrequencyGrid grid, std::vector<Mat4> matrices)
    : grid_(std::move(grid)), matrices_(std::move(matrices)) {
  if (matrices_.size() != grid_.size()) {
    throw Error(ErrorKind::InconsistentState, "covariance needs one matrix per grid point");
  }
}

SpectralCovariance covariance_from_ports(const NoisePortSet& ports) {
  if (ports.empty()) throw Error(ErrorKind::InvalidArgument, "covariance of an empty port set");
  const FrequencyGrid& grid = ports.grid();
  for (const NoisePort& p : ports.ports()) {
    if (!(p.transfer.grid() == grid)) {
      throw Error(ErrorKind::InconsistentState, "port '" + p.label + "' uses a different frequency grid");
    }
  }

  std::vector<Mat4> out(grid.size(), Mat4::Zero());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Mat4& s = out[i];
    for (const NoisePort& p : ports.ports()) {
      const Mat4& t = p.transfer.at(i);
      s.noalias() += t * t.adjoint();
    }
    s = 0.5 * (s + s.adjoint()).eval();
  }
  return SpectralCovariance(grid, std::move(out));
}

}  // namespace eprsq
