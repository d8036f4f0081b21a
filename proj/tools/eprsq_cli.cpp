// eprsq: EPR frequency-dependent squeezing noise simulator.
//
// Exit codes: 0 success, 1 usage/config/I/O error, 2 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "eprsq/commands.hpp"
#include "eprsq/config.hpp"
#include "eprsq/errors.hpp"

namespace {

using eprsq::Error;
using eprsq::ErrorKind;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + out_path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write to '" + out_path + "' failed");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain quantum noise simulator for EPR-based frequency-dependent squeezing"};
  app.set_version_flag("--version", std::string(eprsq::cli::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string angles_text = "0,pi";
  std::string band_text;
  std::string data_path;
  std::string report_path;
  std::optional<double> dark_noise_db;
  std::optional<double> threshold_mw;
  bool float_threshold = false;
  std::optional<double> opo_hwhm_hz;

  auto* spectrum = app.add_subcommand("spectrum", "Noise spectrum at fixed readout angles (or Wiener-conditioned)");
  spectrum->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--out", out_path, "Output CSV (default: stdout)");
  spectrum->add_option("--angles", angles_text, "Comma-separated idler LO phases in rad; 'pi' multiples allowed")
      ->capture_default_str();
  spectrum->add_option("--band", band_text, "Average over LOW:HIGH Hz instead of per-frequency rows");

  auto* sweep = app.add_subcommand("sweep", "Noise versus frequency and readout angle (long-format heatmap)");
  sweep->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_path, "Output CSV (default: stdout)");

  auto* fit = app.add_subcommand("fit-loss", "Fit total detection loss to squeezing/anti-squeezing data");
  fit->add_option("--data,data", data_path, "CSV with pump_power_mw, v_plus_db, v_minus_db[, frequency_hz]")
      ->required();
  fit->add_option("--config", config_path, "Take OPO threshold and linewidth from this config")
      ->check(CLI::ExistingFile);
  fit->add_option("--threshold-mw", threshold_mw, "Fixed OPO threshold power (default 66.3 mW)");
  fit->add_flag("--float-threshold", float_threshold, "Fit the threshold power as well");
  fit->add_option("--opo-hwhm-hz", opo_hwhm_hz, "OPO HWHM in Hz (default 12.1e6)");
  fit->add_option("--dark-noise-db", dark_noise_db, "Subtract a dark-noise floor given in dB relative to shot noise");
  fit->add_option("--out", out_path, "Fit-curve CSV (default: not written)");
  fit->add_option("--report", report_path, "Report file (default: stdout)");

  auto* clf = app.add_subcommand("clf", "CLF error signals versus a swept phase");
  clf->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  clf->add_option("--out", out_path, "Output CSV (default: stdout)");

  auto* validate = app.add_subcommand("validate", "Parse and validate a config; print its canonical form");
  validate->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  validate->add_option("--out", out_path, "Write canonical config here (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*spectrum) {
      const auto config = eprsq::cli::parse_config(config_path);
      const auto angles = eprsq::cli::parse_angle_list(angles_text);
      std::optional<eprsq::cli::Band> band;
      if (!band_text.empty()) band = eprsq::cli::parse_band(band_text);
      emit(eprsq::cli::spectrum_csv(config, angles, band), out_path);
    } else if (*sweep) {
      emit(eprsq::cli::sweep_csv(eprsq::cli::parse_config(config_path)), out_path);
    } else if (*clf) {
      emit(eprsq::cli::clf_csv(eprsq::cli::parse_config(config_path)), out_path);
    } else if (*validate) {
      const auto config = eprsq::cli::parse_config(config_path);
      emit(eprsq::cli::serialize_config(config), out_path);
    } else if (*fit) {
      eprsq::cli::FitLossOptions options;
      if (!config_path.empty()) {
        const auto config = eprsq::cli::parse_config(config_path);
        options.threshold_mw = config.opo.threshold_mw;
        options.opo_hwhm_hz = config.opo.hwhm_hz;
      }
      if (threshold_mw && float_threshold) {
        throw Error(ErrorKind::Config, "--threshold-mw and --float-threshold are mutually exclusive");
      }
      if (threshold_mw) options.threshold_mw = *threshold_mw;
      if (float_threshold) options.threshold_mw.reset();
      if (opo_hwhm_hz) options.opo_hwhm_hz = *opo_hwhm_hz;
      options.dark_noise_db = dark_noise_db;
      const auto result = eprsq::cli::fit_loss(slurp(data_path), options, data_path);
      if (report_path.empty()) {
        std::cout << result.report;
      } else {
        emit(result.report, report_path);
      }
      if (!out_path.empty()) emit(result.curve_csv, out_path);
    }
  } catch (const Error& e) {
    std::cerr << "eprsq: " << e.what() << "\n";
    return eprsq::is_numerical(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "eprsq: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
