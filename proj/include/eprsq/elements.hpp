#pragma once

// Quadrature transfer matrices of the optical elements in the EPR squeezing
// chain: the non-degenerate OPO source, a detuned test cavity, lossy paths and
// static phase shifts, plus cascade composition.
//
// Detuning sign: a positive normalised detuning means the field sits above the
// cavity resonance and enters the cavity drift matrix as diag(-1 + i*d, -1 - i*d).
// Propagation phases between elements are not modelled; fold them into the
// readout angles.

#include <string>

#include "eprsq/spectral.hpp"

namespace eprsq {

struct OpoParams {
  double x = 0.0;           // normalised pump parameter, 0 <= x < 1
  double pump_phase = 0.0;  // theta_b [rad]
  double gamma_in = 1.0;    // input-coupler decay rate [rad/s]
  double gamma_loss = 0.0;  // intracavity loss decay rate [rad/s]

  // Builds the decay rates from a total HWHM (rad/s) and an escape efficiency.
  static OpoParams from_linewidth(double x, double pump_phase, double gamma_tot,
                                  double escape_efficiency);

  double gamma_tot() const noexcept { return gamma_in + gamma_loss; }
  double escape_efficiency() const noexcept { return gamma_in / gamma_tot(); }

  // AboveThreshold for x >= 1, InvalidArgument for anything else out of range.
  void validate() const;
};

struct CavityParams {
  double gamma = 1.0;            // total HWHM decay rate [rad/s]
  double input_coupling = 1.0;   // eta_tc = gamma_in / gamma, in (0, 1]
  double detuning_signal = 0.0;  // in units of gamma
  double detuning_idler = 0.0;   // in units of gamma

  void validate() const;
};

struct LossChannel {
  double signal_efficiency = 1.0;
  double idler_efficiency = 1.0;

  void validate() const;
};

// Transfer of a passive element plus the vacuum ports it opens.
struct ElementResponse {
  QuadratureTransfer transfer;
  NoisePortSet added;
};

// Coupling matrix of the linearised OPO equations of motion in the
// (a_s, a_s^dag, a_i, a_i^dag) basis.
Mat4 opo_drift_matrix(double x, double pump_phase);

// Ports "opo.input" and, when gamma_loss > 0, "opo.loss".
NoisePortSet opo_ports(const OpoParams& params, const FrequencyGrid& grid);

// 2x2 quadrature reflection of a single detuned cavity field and the matching
// loss-port coupling. omega_norm is Omega / gamma.
Mat2 cavity_reflection_block(double input_coupling, double detuning, double omega_norm);
Mat2 cavity_loss_block(double input_coupling, double detuning, double omega_norm);

// Block-diagonal reflection with independent signal/idler detunings. Adds a
// "cavity.loss" port unless the cavity is lossless.
ElementResponse cavity_ports(const CavityParams& params, const FrequencyGrid& grid,
                             const std::string& label = "cavity.loss");

// Beamsplitter loss on each path. Adds "<prefix>.signal" / "<prefix>.idler"
// for every path with efficiency < 1.
ElementResponse loss_ports(const LossChannel& channel, const FrequencyGrid& grid,
                           const std::string& label_prefix = "path.loss");

// Frequency-independent quadrature rotation of each field.
QuadratureTransfer phase_shift(double signal_rad, double idler_rad, const FrequencyGrid& grid);

// Left-multiplies every upstream port by the element transfer and appends the
// new ports. A new label that already exists gets a "#2", "#3", ... suffix.
NoisePortSet compose(const NoisePortSet& upstream, const QuadratureTransfer& element,
                     const NoisePortSet& new_ports);
NoisePortSet compose(const NoisePortSet& upstream, const ElementResponse& element);

}  // namespace eprsq
