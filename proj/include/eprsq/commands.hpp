#pragma once

// CLI command bodies, kept free of argument parsing and file I/O so they can be
// tested directly. Every CSV starts with a comment line
//   # eprsq <version> <command> config_sha256=<16 hex digits>
// followed by a header row. Numbers use 6 significant digits (%.6g), with
// magnitudes below 1e-12 written as 0, and rows
// are emitted in a fixed order, so identical inputs give identical bytes.

#include <optional>
#include <span>
#include <string>

#include "eprsq/config.hpp"

namespace eprsq::cli {

inline constexpr const char* kVersion = "0.1.0";

// First 16 hex digits of the SHA-256 of the text.
std::string short_hash(const std::string& text);

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

// "LOW:HIGH" in Hz.
Band parse_band(const std::string& text);

// Fixed combiner: frequency_hz, then one variance_db column per angle.
// Wiener combiner: frequency_hz, variance_db, gain_re, gain_im, idler_phase_rad
// (angles are ignored). With a band, a single row of linear band averages.
std::string spectrum_csv(const ExperimentConfig& config, std::span<const double> angles,
                         const std::optional<Band>& band = std::nullopt);

// Long format: frequency_hz, readout_angle_rad, variance_db. One block of
// rows per readout angle, in sweep order.
std::string sweep_csv(const ExperimentConfig& config);

// swept_phase_rad, e_reflection, e_transmission.
std::string clf_csv(const ExperimentConfig& config);

struct FitLossOptions {
  std::optional<double> threshold_mw = kDefaultThresholdMw;  // empty: fit it
  double opo_hwhm_hz = 12.1e6;
  std::optional<double> dark_noise_db;  // floor relative to shot noise, e.g. -10
};

// Columns pump_power_mw, v_plus_db, v_minus_db and optionally frequency_hz,
// in any order. Lines starting with '#' are skipped.
LossFitInput parse_loss_csv(const std::string& text, const FitLossOptions& options,
                            const std::string& source = "<data>");

struct FitLossOutput {
  LossFitResult fit;
  std::string report;
  std::string curve_csv;  // pump_power_mw, x, v_plus_db, v_minus_db
};

FitLossOutput fit_loss(const std::string& csv_text, const FitLossOptions& options,
                       const std::string& source = "<data>");

}  // namespace eprsq::cli
