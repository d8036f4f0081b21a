#pragma once

// Homodyne readout of the signal and idler fields and their electronic
// combination.
//
// The combined photocurrent projects the quadrature vector onto
//   u = (g_s cos phi_s, g_s sin phi_s, -sign g_i cos phi_i, -sign g_i sin phi_i)
// and is normalised by the combined shot noise g_s^2 + g_i^2, so a vacuum
// input always reads exactly 1. With the default sign = -1 the variance at
// phi_s = phi_i = 0 follows (V_+ cos^2(theta_b/2) + V_- sin^2(theta_b/2)) / 2,
// i.e. the EPR combination is squeezed for pump phase theta_b = pi.
//
// "Readout angle" everywhere in this library is the idler LO phase phi_i with
// phi_s held fixed, which is how the angle is ramped in the experiment.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eprsq/spectral.hpp"

namespace eprsq {

struct ReadoutConfig {
  double signal_phase = 0.0;
  double idler_phase = 0.0;
  double signal_gain = 1.0;
  double idler_gain = 1.0;
  int combiner_sign = -1;

  void validate() const;
  Eigen::Vector4d projection() const;
};

double homodyne_variance(const Mat4& covariance, const ReadoutConfig& cfg);
std::vector<double> homodyne_variance(const SpectralCovariance& covariance, const ReadoutConfig& cfg);

struct SpectrumResult {
  FrequencyGrid grid;
  std::vector<double> angles;  // idler LO phase [rad]
  Eigen::MatrixXd variance;    // rows: grid points, cols: angles
  Eigen::MatrixXd variance_db;
};

// Heatmap over (Omega, phi_i). cfg.idler_phase is ignored.
SpectrumResult angle_sweep(const SpectralCovariance& covariance, std::span<const double> angles,
                           const ReadoutConfig& cfg);

struct AngleOptimum {
  double angle = 0.0;  // idler LO phase in [0, 2pi)
  double variance = 0.0;
};

// Idler LO phase minimising the combined variance at one frequency.
AngleOptimum min_variance_angle(const Mat4& covariance, const ReadoutConfig& cfg);

// Per-frequency minimising idler LO phase, unwrapped along the grid so that
// consecutive points differ by less than pi.
std::vector<double> min_variance_angles(const SpectralCovariance& covariance, const ReadoutConfig& cfg);

// Angle of the measured two-mode quadrature for a given pair of LO phases.
// Orthogonal quadratures are pi/2 apart in this angle, whereas they are pi
// apart in the idler LO phase alone.
inline double two_mode_quadrature_angle(double signal_phase, double idler_phase) {
  return 0.5 * (signal_phase + idler_phase);
}

struct WienerResult {
  std::vector<Complex> gain;         // idler filter g_opt(Omega)
  std::vector<double> idler_phase;   // optimal idler quadrature [rad]
  std::vector<double> variance;      // conditioned variance
};

// Per-frequency optimal filtering of the idler readout before it is
// subtracted from the signal readout at phase signal_phase. For each Omega
// the combination X_s(phi_s) - g X_i(phi) is minimised over complex g and phi,
// with the variance referenced to the shot noise of that combination
// (1 + |g|^2). Without signal-idler correlation the filter is zero and the
// signal variance is returned.
WienerResult wiener_conditional(const SpectralCovariance& covariance, double signal_phase);

// 10 log10(variance); throws InvalidArgument for non-positive input.
double to_db(double variance);

}  // namespace eprsq
