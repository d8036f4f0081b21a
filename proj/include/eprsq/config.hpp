#pragma once

// Experiment configuration files.
//
// Grammar (one entry per line, UTF-8):
//
//   line    := blank | comment | entry
//   comment := '#' any-text
//   entry   := key '=' value [ '#' any-text ]
//   key     := section '.' name          e.g. opo.x, cavity.hwhm_hz
//
// Whitespace around keys and values is ignored. Values are decimal numbers,
// booleans (true/false), or enumerations. Keys ending in _rad also accept
// multiples of pi: "pi", "-pi/2", "0.5pi", "3*pi/4". A key may appear once.
// Boundary units are Hz, mW and rad; the simulator works in rad/s internally.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eprsq/analysis.hpp"
#include "eprsq/elements.hpp"
#include "eprsq/readout.hpp"
#include "eprsq/spectral.hpp"

namespace eprsq::cli {

enum class Combiner { Fixed, Wiener };
enum class ClfSweep { ClfPhase, LoPhase, PumpPhase };

struct OpoSection {
  std::optional<double> x;
  std::optional<double> pump_power_mw;
  double threshold_mw = kDefaultThresholdMw;
  double hwhm_hz = 12.1e6;
  double escape_efficiency = 1.0;
  double pump_phase_rad = kPi;

  bool operator==(const OpoSection&) const = default;
};

struct CavitySection {
  bool enabled = false;
  double hwhm_hz = 1.25e6;
  double eta_in = 1.0;
  double detuning_signal_hwhm = 0.0;
  double detuning_idler_hwhm = 0.0;

  bool operator==(const CavitySection&) const = default;
};

struct LossSection {
  double signal_efficiency = 1.0;
  double idler_efficiency = 1.0;

  bool operator==(const LossSection&) const = default;
};

struct ReadoutSection {
  double signal_lo_phase_rad = 0.0;
  double angle_start_rad = 0.0;
  double angle_stop_rad = kTwoPi;
  std::size_t angle_count = 73;
  double gain_signal = 1.0;
  double gain_idler = 1.0;
  int combiner_sign = -1;
  Combiner combiner = Combiner::Fixed;

  bool operator==(const ReadoutSection&) const = default;
};

struct GridSection {
  double f_min_hz = 1e5;
  double f_max_hz = 2e7;
  std::size_t points = 121;
  GridScale scale = GridScale::Logarithmic;

  bool operator==(const GridSection&) const = default;
};

struct ClfSection {
  ClfSweep sweep = ClfSweep::ClfPhase;
  double sweep_start_rad = 0.0;
  double sweep_stop_rad = kTwoPi;
  std::size_t sweep_count = 181;
  double clf_phase_rad = 0.0;
  double lo_phase_rad = 0.0;
  double injection_hwhm_hz = 1.21e6;
  bool locked = false;
  double amplitude_gain = 1.0;

  bool operator==(const ClfSection&) const = default;
};

// Carried through serialisation, not used by the model.
struct MetaSection {
  double clf_beat_hz = 12.07e6;
  double tc_input_reflectivity = 0.95;

  bool operator==(const MetaSection&) const = default;
};

struct ExperimentConfig {
  OpoSection opo;
  CavitySection cavity;
  LossSection losses;
  ReadoutSection readout;
  GridSection grid;
  ClfSection clf;
  MetaSection meta;

  bool operator==(const ExperimentConfig&) const = default;

  double pump_parameter() const;
  OpoParams opo_params() const;
  CavityParams cavity_params() const;
  LossChannel loss_channel() const;
  ReadoutConfig readout_config() const;
  FrequencyGrid frequency_grid() const;
  std::vector<double> sweep_angles() const;
  ClfParams clf_params() const;
};

// Both throw Error with "<source>:<line>: <key>: <reason>" messages.
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<string>");
ExperimentConfig parse_config(const std::filesystem::path& path);

// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// Revalidates every invariant of the referenced module parameters.
void validate_config(const ExperimentConfig& config);

// Number or pi multiple, as accepted for *_rad keys.
double parse_angle(const std::string& text);
std::vector<double> parse_angle_list(const std::string& text);

// OPO -> test cavity (if enabled) -> detection losses.
NoisePortSet build_network(const ExperimentConfig& config);
SpectralCovariance simulate(const ExperimentConfig& config);

}  // namespace eprsq::cli
