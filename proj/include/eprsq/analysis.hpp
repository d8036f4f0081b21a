#pragma once

// Closed-form squeezing oracles, the detection-loss fit and the coherent
// locking field (CLF) error signals.
//
// Two variance references are in use. The EPR pair expressions (v_pm_oracle)
// are referenced to a single field's shot noise, so vacuum reads 2 for the
// combined readout. The loss model (methods_loss_oracle) is referenced to the
// combined shot noise, so vacuum reads 1. With l = 1 - eta_esc the latter is
// exactly half the former.

#include <optional>
#include <vector>

#include "eprsq/constants.hpp"

namespace eprsq {

inline constexpr double kDefaultThresholdMw = 66.3;

struct PlusMinus {
  double plus = 0.0;
  double minus = 0.0;
};

// Per-quadrature variance of either OPO output field.
double v_out_oracle(double x, double escape_efficiency, double omega_over_gamma);

// Anti-squeezed / squeezed variance of the combined EPR readout.
PlusMinus v_pm_oracle(double x, double escape_efficiency, double omega_over_gamma);

// V_+ cos^2(theta_b/2) + V_- sin^2(theta_b/2).
double v_cond_oracle(double x, double escape_efficiency, double omega_over_gamma, double pump_phase);

// V_pm = 1 +- 4x(1-l) / ((1 -+ x)^2 + (Omega/gamma_opo)^2).
PlusMinus methods_loss_oracle(double x, double loss, double omega_over_gamma);

// Smallest pump parameter whose squeezed variance under methods_loss_oracle
// reaches target_db (negative). Throws InvalidArgument if unreachable.
double pump_for_squeezing(double target_db, double loss, double omega_over_gamma = 0.0);

// Normalised pump parameter x = sqrt(P / P_th).
double pump_parameter(double pump_power_mw, double threshold_mw);

struct LossRecord {
  double pump_power_mw = 0.0;
  double v_plus = 1.0;   // linear, combined shot noise = 1
  double v_minus = 1.0;  // linear, combined shot noise = 1
  double omega = 0.0;    // analysis frequency [rad/s]
};

struct LossFitInput {
  std::vector<LossRecord> records;
  std::optional<double> threshold_mw;  // floated when empty
  double gamma_opo = kTwoPi * 12.1e6;  // OPO HWHM [rad/s]

  void validate() const;
};

struct LossFitResult {
  double loss = 0.0;
  double threshold_mw = kDefaultThresholdMw;
  bool threshold_fitted = false;
  double rms_residual_db = 0.0;
  std::vector<double> pump_parameters;  // x per record
};

// Least squares in dB with uniform weights. Throws InvalidArgument for bad
// input and FitFailure when the optimiser does not converge.
LossFitResult fit_detection_loss(const LossFitInput& input);

// Removes an additive electronic floor given in dB relative to shot noise.
double subtract_dark_noise(double variance, double dark_noise_db);

struct ClfParams {
  double pump_phase = 0.0;  // theta_b
  double clf_phase = 0.0;   // phi_c
  double lo_phase = 0.0;    // phi_LO
  double x = 0.0;
  double gamma_clf = 1.0;  // injection mirror decay rate [rad/s]
  double gamma_in = 1.0;
  double gamma_tot = 1.0;
  double amplitude_gain = 1.0;  // absorbs the carrier, sideband and LO amplitudes

  // Pole for x = 1, InvalidArgument for non-positive rates.
  void validate() const;
};

// Demodulated CLF signal in OPO reflection; zero where theta_b = 2 phi_c.
double clf_reflection_error(const ClfParams& p);

// Beat of the transmitted CLF sideband with the idler LO. The locked form
// assumes theta_b = 2 phi_c and keeps the prefactor of the general form, so
// the two agree exactly on the lock manifold.
double clf_transmission_error(const ClfParams& p, bool locked);

}  // namespace eprsq
