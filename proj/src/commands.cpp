#include "eprsq/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include <openssl/evp.h>

#include "eprsq/errors.hpp"

namespace eprsq::cli {
namespace {

// Magnitudes below 1e-12 are rounding residue of exact zeros and print as 0.
std::string fmt(double v) {
  if (std::abs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string preamble(const char* command, const ExperimentConfig& config) {
  return std::string("# eprsq ") + kVersion + " " + command + " config_sha256=" +
         short_hash(serialize_config(config)) + "\n";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto a = item.find_first_not_of(" \t\r");
    const auto b = item.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string() : item.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_field(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, where + ": '" + text + "' is not a number");
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

std::string short_hash(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < 8 && i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

Band parse_band(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw Error(ErrorKind::Config, "band must be LOW:HIGH in Hz, got '" + text + "'");
  Band b{parse_field(parts[0], "band"), parse_field(parts[1], "band")};
  if (!(b.low_hz >= 0.0 && b.low_hz < b.high_hz)) {
    throw Error(ErrorKind::Config, "band must satisfy 0 <= LOW < HIGH");
  }
  return b;
}

std::string spectrum_csv(const ExperimentConfig& config, std::span<const double> angles,
                         const std::optional<Band>& band) {
  const SpectralCovariance s = simulate(config);
  const FrequencyGrid& grid = s.grid();

  // Columns of linear variance per grid point.
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  if (config.readout.combiner == Combiner::Wiener) {
    const WienerResult w = wiener_conditional(s, config.readout.signal_lo_phase_rad);
    names = {"variance_db", "gain_re", "gain_im", "idler_phase_rad"};
    columns.assign(4, std::vector<double>(grid.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      columns[0][k] = w.variance[k];
      columns[1][k] = w.gain[k].real();
      columns[2][k] = w.gain[k].imag();
      columns[3][k] = w.idler_phase[k];
    }
  } else {
    if (angles.empty()) throw Error(ErrorKind::InvalidArgument, "spectrum needs at least one angle");
    ReadoutConfig cfg = config.readout_config();
    for (double a : angles) {
      cfg.idler_phase = a;
      names.push_back("variance_db_phi_" + fmt(a));
      columns.push_back(homodyne_variance(s, cfg));
    }
  }
  // Only variance columns are converted to dB; Wiener filter columns stay linear.
  const std::size_t db_columns = config.readout.combiner == Combiner::Wiener ? 1 : columns.size();

  std::ostringstream out;
  out << preamble("spectrum", config);
  if (band) {
    std::vector<double> sums(columns.size(), 0.0);
    std::size_t count = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double f = grid.frequency_hz(k);
      if (f < band->low_hz || f > band->high_hz) continue;
      ++count;
      for (std::size_t c = 0; c < columns.size(); ++c) sums[c] += columns[c][k];
    }
    if (count == 0) throw Error(ErrorKind::InvalidArgument, "no grid points inside the requested band");
    out << "band_low_hz,band_high_hz";
    for (const auto& n : names) out << "," << n;
    out << "\n" << fmt(band->low_hz) << "," << fmt(band->high_hz);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const double mean = sums[c] / static_cast<double>(count);
      out << "," << fmt(c < db_columns ? to_db(mean) : mean);
    }
    out << "\n";
    return out.str();
  }

  out << "frequency_hz";
  for (const auto& n : names) out << "," << n;
  out << "\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out << fmt(grid.frequency_hz(k));
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << "," << fmt(c < db_columns ? to_db(columns[c][k]) : columns[c][k]);
    }
    out << "\n";
  }
  return out.str();
}

std::string sweep_csv(const ExperimentConfig& config) {
  const SpectralCovariance s = simulate(config);
  const std::vector<double> angles = config.sweep_angles();
  const SpectrumResult r = angle_sweep(s, angles, config.readout_config());

  std::ostringstream out;
  out << preamble("sweep", config);
  out << "frequency_hz,readout_angle_rad,variance_db\n";
  for (std::size_t j = 0; j < r.angles.size(); ++j) {
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
      out << fmt(r.grid.frequency_hz(k)) << "," << fmt(r.angles[j]) << "," << fmt(r.variance_db(k, j)) << "\n";
    }
  }
  return out.str();
}

std::string clf_csv(const ExperimentConfig& config) {
  const ClfParams base = config.clf_params();
  const ClfSection& c = config.clf;
  std::ostringstream out;
  out << preamble("clf", config);
  out << "swept_phase_rad,e_reflection,e_transmission\n";
  for (std::size_t k = 0; k < c.sweep_count; ++k) {
    const double phase = c.sweep_count == 1
                             ? c.sweep_start_rad
                             : c.sweep_start_rad + (c.sweep_stop_rad - c.sweep_start_rad) * static_cast<double>(k) /
                                                       static_cast<double>(c.sweep_count - 1);
    ClfParams p = base;
    switch (c.sweep) {
      case ClfSweep::ClfPhase: p.clf_phase = phase; break;
      case ClfSweep::LoPhase: p.lo_phase = phase; break;
      case ClfSweep::PumpPhase: p.pump_phase = phase; break;
    }
    out << fmt(phase) << "," << fmt(clf_reflection_error(p)) << "," << fmt(clf_transmission_error(p, c.locked))
        << "\n";
  }
  return out.str();
}

LossFitInput parse_loss_csv(const std::string& text, const FitLossOptions& options, const std::string& source) {
  LossFitInput input;
  input.threshold_mw = options.threshold_mw;
  input.gamma_opo = kTwoPi * options.opo_hwhm_hz;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  int col_power = -1, col_plus = -1, col_minus = -1, col_freq = -1;
  std::size_t width = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    const auto fields = split(line, ',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const int idx = static_cast<int>(i);
        if (fields[i] == "pump_power_mw") col_power = idx;
        else if (fields[i] == "v_plus_db") col_plus = idx;
        else if (fields[i] == "v_minus_db") col_minus = idx;
        else if (fields[i] == "frequency_hz") col_freq = idx;
      }
      if (col_power < 0 || col_plus < 0 || col_minus < 0) {
        throw Error(ErrorKind::Config, where + ": header must contain pump_power_mw, v_plus_db, v_minus_db");
      }
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width) {
      throw Error(ErrorKind::Config, where + ": expected " + std::to_string(width) + " fields, got " +
                                         std::to_string(fields.size()));
    }
    LossRecord r;
    r.pump_power_mw = parse_field(fields[col_power], where);
    r.v_plus = from_db(parse_field(fields[col_plus], where));
    r.v_minus = from_db(parse_field(fields[col_minus], where));
    r.omega = col_freq >= 0 ? kTwoPi * parse_field(fields[col_freq], where) : 0.0;
    if (options.dark_noise_db) {
      try {
        r.v_plus = subtract_dark_noise(r.v_plus, *options.dark_noise_db);
        r.v_minus = subtract_dark_noise(r.v_minus, *options.dark_noise_db);
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, where + ": " + e.detail());
      }
    }
    input.records.push_back(r);
  }
  if (!have_header) throw Error(ErrorKind::Config, source + ": empty loss data (no header row)");
  if (input.records.empty()) throw Error(ErrorKind::Config, source + ": no data rows");
  return input;
}

FitLossOutput fit_loss(const std::string& csv_text, const FitLossOptions& options, const std::string& source) {
  const LossFitInput input = parse_loss_csv(csv_text, options, source);
  FitLossOutput out;
  out.fit = fit_detection_loss(input);
  const LossFitResult& f = out.fit;

  double mean_omega = 0.0;
  for (const LossRecord& r : input.records) mean_omega += r.omega;
  mean_omega /= static_cast<double>(input.records.size());

  std::ostringstream report;
  report << "eprsq " << kVersion << " detection loss fit\n";
  report << "records: " << input.records.size() << "\n";
  report << "loss: " << fmt(f.loss) << "\n";
  report << "threshold_mw: " << fmt(f.threshold_mw) << (f.threshold_fitted ? " (fitted)" : " (fixed)") << "\n";
  report << "rms_residual_db: " << fmt(f.rms_residual_db) << "\n";
  if (options.dark_noise_db) report << "dark_noise_db: " << fmt(*options.dark_noise_db) << " (subtracted)\n";
  report << "pump_parameters:";
  for (double x : f.pump_parameters) report << " " << fmt(x);
  report << "\n";
  out.report = report.str();

  std::ostringstream curve;
  curve << "# eprsq " << kVersion << " fit-loss data_sha256=" << short_hash(csv_text) << "\n";
  curve << "pump_power_mw,x,v_plus_db,v_minus_db\n";
  constexpr int kCurvePoints = 50;
  for (int k = 0; k < kCurvePoints; ++k) {
    const double p = 0.95 * f.threshold_mw * static_cast<double>(k) / (kCurvePoints - 1);
    const double x = std::sqrt(p / f.threshold_mw);
    const PlusMinus v = methods_loss_oracle(x, f.loss, mean_omega / input.gamma_opo);
    curve << fmt(p) << "," << fmt(x) << "," << fmt(to_db(v.plus)) << "," << fmt(to_db(v.minus)) << "\n";
  }
  out.curve_csv = curve.str();
  return out;
}

}  // namespace eprsq::cli
