#include "eprsq/elements.hpp"

#include <cmath>
#include <utility>

#include "eprsq/errors.hpp"

namespace eprsq {
namespace {

const Complex kI(0.0, 1.0);

const Mat2& field_basis() {
  static const Mat2 gamma = (Mat2() << 1.0, 1.0, -kI, kI).finished();
  return gamma;
}

const Mat2& field_basis_inverse() {
  static const Mat2 inverse = field_basis().inverse();
  return inverse;
}

bool finite(double v) { return std::isfinite(v); }

// (i*Omega/gamma - M_tc)^{-1} for one cavity field; diagonal in the
// (a, a^dag) basis.
Mat2 cavity_resolvent(double detuning, double omega_norm) {
  Mat2 r = Mat2::Zero();
  r(0, 0) = 1.0 / (Complex(1.0, omega_norm) - kI * detuning);
  r(1, 1) = 1.0 / (Complex(1.0, omega_norm) + kI * detuning);
  return r;
}

Mat4 block_diag(const Mat2& upper, const Mat2& lower) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<2, 2>() = upper;
  m.bottomRightCorner<2, 2>() = lower;
  return m;
}

}  // namespace

OpoParams OpoParams::from_linewidth(double x, double pump_phase, double gamma_tot,
                                    double escape_efficiency) {
  if (!(escape_efficiency > 0.0 && escape_efficiency <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "OPO escape efficiency must lie in (0, 1]");
  }
  OpoParams p;
  p.x = x;
  p.pump_phase = pump_phase;
  p.gamma_in = escape_efficiency * gamma_tot;
  p.gamma_loss = escape_efficiency == 1.0 ? 0.0 : gamma_tot - p.gamma_in;
  p.validate();
  return p;
}

void OpoParams::validate() const {
  if (!finite(x) || x < 0.0) throw Error(ErrorKind::InvalidArgument, "OPO pump parameter x must be >= 0");
  if (x >= 1.0) {
    throw Error(ErrorKind::AboveThreshold, "OPO pump parameter x must be below threshold (x < 1)");
  }
  if (!finite(pump_phase)) throw Error(ErrorKind::InvalidArgument, "OPO pump phase must be finite");
  if (!finite(gamma_in) || gamma_in <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "OPO input-coupler decay rate must be > 0");
  }
  if (!finite(gamma_loss) || gamma_loss < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "OPO loss decay rate must be >= 0");
  }
}

void CavityParams::validate() const {
  if (!finite(gamma) || gamma <= 0.0) throw Error(ErrorKind::InvalidArgument, "cavity decay rate must be > 0");
  if (!(input_coupling > 0.0 && input_coupling <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "cavity input coupling must lie in (0, 1]");
  }
  if (!finite(detuning_signal) || !finite(detuning_idler)) {
    throw Error(ErrorKind::InvalidArgument, "cavity detunings must be finite");
  }
}

void LossChannel::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(signal_efficiency) || !in_unit(idler_efficiency)) {
    throw Error(ErrorKind::InvalidArgument, "path efficiencies must lie in [0, 1]");
  }
}

Mat4 opo_drift_matrix(double x, double pump_phase) {
  const Complex up = x * std::exp(kI * pump_phase);
  const Complex down = std::conj(up);
  Mat4 m = -Mat4::Identity();
  m(0, 3) = up;
  m(1, 2) = down;
  m(2, 1) = up;
  m(3, 0) = down;
  return m;
}

NoisePortSet opo_ports(const OpoParams& params, const FrequencyGrid& grid) {
  params.validate();
  const double gamma_tot = params.gamma_tot();
  const Mat4 drift = opo_drift_matrix(params.x, params.pump_phase);
  const Mat4& basis = quadrature_basis();
  const Mat4& basis_inv = quadrature_basis_inverse();
  const bool lossy = params.gamma_loss > 0.0;
  const double loss_coupling = 2.0 * std::sqrt(params.gamma_loss * params.gamma_in);

  std::vector<Mat4> input(grid.size());
  std::vector<Mat4> loss(lossy ? grid.size() : 0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Mat4 system = kI * grid.omega(k) * Mat4::Identity() - gamma_tot * drift;
    const Eigen::PartialPivLU<Mat4> lu(system);
    // Eigenvalues of the drift are -1 +- x, so this only trips for x >= 1.
    if (std::abs(lu.determinant()) < 1e-14 * std::pow(gamma_tot + grid.omega(k), 4)) {
      throw Error(ErrorKind::NumericalSingularity, "OPO resolvent is singular");
    }
    const Mat4 resolvent = lu.inverse();
    input[k] = basis * (2.0 * params.gamma_in * resolvent - Mat4::Identity()) * basis_inv;
    if (lossy) loss[k] = basis * (loss_coupling * resolvent) * basis_inv;
  }

  NoisePortSet ports(grid);
  ports.add("opo.input", QuadratureTransfer(grid, std::move(input)));
  if (lossy) ports.add("opo.loss", QuadratureTransfer(grid, std::move(loss)));
  return ports;
}

Mat2 cavity_reflection_block(double input_coupling, double detuning, double omega_norm) {
  const Mat2 r = cavity_resolvent(detuning, omega_norm);
  return field_basis() * (2.0 * input_coupling * r - Mat2::Identity()) * field_basis_inverse();
}

Mat2 cavity_loss_block(double input_coupling, double detuning, double omega_norm) {
  const Mat2 r = cavity_resolvent(detuning, omega_norm);
  const double coupling = 2.0 * std::sqrt(input_coupling * (1.0 - input_coupling));
  return field_basis() * (coupling * r) * field_basis_inverse();
}

ElementResponse cavity_ports(const CavityParams& params, const FrequencyGrid& grid,
                             const std::string& label) {
  params.validate();
  const bool lossy = params.input_coupling < 1.0;
  std::vector<Mat4> reflection(grid.size());
  std::vector<Mat4> loss(lossy ? grid.size() : 0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid.omega(k) / params.gamma;
    reflection[k] = block_diag(cavity_reflection_block(params.input_coupling, params.detuning_signal, w),
                               cavity_reflection_block(params.input_coupling, params.detuning_idler, w));
    if (lossy) {
      loss[k] = block_diag(cavity_loss_block(params.input_coupling, params.detuning_signal, w),
                           cavity_loss_block(params.input_coupling, params.detuning_idler, w));
    }
  }
  NoisePortSet added(grid);
  if (lossy) added.add(label, QuadratureTransfer(grid, std::move(loss)));
  return ElementResponse{QuadratureTransfer(grid, std::move(reflection)), std::move(added)};
}

ElementResponse loss_ports(const LossChannel& channel, const FrequencyGrid& grid,
                           const std::string& label_prefix) {
  channel.validate();
  const double ts = std::sqrt(channel.signal_efficiency);
  const double ti = std::sqrt(channel.idler_efficiency);
  Mat4 through = Mat4::Zero();
  through.diagonal() << ts, ts, ti, ti;

  NoisePortSet added(grid);
  if (channel.signal_efficiency < 1.0) {
    Mat4 m = Mat4::Zero();
    m(0, 0) = m(1, 1) = std::sqrt(1.0 - channel.signal_efficiency);
    added.add(label_prefix + ".signal", QuadratureTransfer(grid, std::vector<Mat4>(grid.size(), m)));
  }
  if (channel.idler_efficiency < 1.0) {
    Mat4 m = Mat4::Zero();
    m(2, 2) = m(3, 3) = std::sqrt(1.0 - channel.idler_efficiency);
    added.add(label_prefix + ".idler", QuadratureTransfer(grid, std::vector<Mat4>(grid.size(), m)));
  }
  return ElementResponse{QuadratureTransfer(grid, std::vector<Mat4>(grid.size(), through)), std::move(added)};
}

QuadratureTransfer phase_shift(double signal_rad, double idler_rad, const FrequencyGrid& grid) {
  auto rotation = [](double a) {
    return (Mat2() << std::cos(a), -std::sin(a), std::sin(a), std::cos(a)).finished();
  };
  return QuadratureTransfer(grid, std::vector<Mat4>(grid.size(), block_diag(rotation(signal_rad), rotation(idler_rad))));
}

NoisePortSet compose(const NoisePortSet& upstream, const QuadratureTransfer& element,
                     const NoisePortSet& new_ports) {
  const FrequencyGrid& grid = upstream.grid();
  if (!(element.grid() == grid) || !(new_ports.grid() == grid)) {
    throw Error(ErrorKind::InconsistentState, "compose: element and upstream use different grids");
  }

  NoisePortSet out(grid);
  for (const NoisePort& port : upstream.ports()) {
    std::vector<Mat4> cascaded(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) cascaded[k] = element.at(k) * port.transfer.at(k);
    out.add(port.label, QuadratureTransfer(grid, std::move(cascaded)));
  }
  for (const NoisePort& port : new_ports.ports()) {
    std::string label = port.label;
    for (int n = 2; out.contains(label); ++n) label = port.label + "#" + std::to_string(n);
    out.add(std::move(label), port.transfer);
  }
  return out;
}

NoisePortSet compose(const NoisePortSet& upstream, const ElementResponse& element) {
  return compose(upstream, element.transfer, element.added);
}

}  // namespace eprsq
