#include "eprsq/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <sstream>

#include "eprsq/errors.hpp"

namespace eprsq::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::Config, "'" + text + "' is not a finite number");
  }
  return value;
}

std::size_t parse_count(const std::string& text) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::Config, "'" + text + "' is not a non-negative integer");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorKind::Config, "'" + text + "' is not a boolean (true/false)");
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

const char* to_string(Combiner c) { return c == Combiner::Fixed ? "fixed" : "wiener"; }

Combiner parse_combiner(const std::string& text) {
  if (text == "fixed") return Combiner::Fixed;
  if (text == "wiener") return Combiner::Wiener;
  throw Error(ErrorKind::Config, "'" + text + "' is not a combiner (fixed or wiener)");
}

const char* to_string(ClfSweep s) {
  switch (s) {
    case ClfSweep::ClfPhase: return "clf_phase";
    case ClfSweep::LoPhase: return "lo_phase";
    case ClfSweep::PumpPhase: return "pump_phase";
  }
  return "clf_phase";
}

ClfSweep parse_clf_sweep(const std::string& text) {
  if (text == "clf_phase") return ClfSweep::ClfPhase;
  if (text == "lo_phase") return ClfSweep::LoPhase;
  if (text == "pump_phase") return ClfSweep::PumpPhase;
  throw Error(ErrorKind::Config, "'" + text + "' is not a CLF sweep variable (clf_phase, lo_phase, pump_phase)");
}

int parse_sign(const std::string& text) {
  const double v = parse_number(text);
  if (v != 1.0 && v != -1.0) throw Error(ErrorKind::Config, "combiner sign must be +1 or -1");
  return static_cast<int>(v);
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> read;
  std::function<std::optional<std::string>(const ExperimentConfig&)> write;
};

#define EPRSQ_NUM(section, field) \
  Key{#section "." #field, [](ExperimentConfig& c, const std::string& v) { c.section.field = parse_number(v); }, \
      [](const ExperimentConfig& c) -> std::optional<std::string> { return format_number(c.section.field); }}
#define EPRSQ_ANGLE(section, field) \
  Key{#section "." #field, [](ExperimentConfig& c, const std::string& v) { c.section.field = parse_angle(v); }, \
      [](const ExperimentConfig& c) -> std::optional<std::string> { return format_number(c.section.field); }}
#define EPRSQ_COUNT(section, field) \
  Key{#section "." #field, [](ExperimentConfig& c, const std::string& v) { c.section.field = parse_count(v); }, \
      [](const ExperimentConfig& c) -> std::optional<std::string> { return std::to_string(c.section.field); }}
#define EPRSQ_BOOL(section, field) \
  Key{#section "." #field, [](ExperimentConfig& c, const std::string& v) { c.section.field = parse_bool(v); }, \
      [](const ExperimentConfig& c) -> std::optional<std::string> { return c.section.field ? "true" : "false"; }}
#define EPRSQ_OPTIONAL(section, field) \
  Key{#section "." #field, [](ExperimentConfig& c, const std::string& v) { c.section.field = parse_number(v); }, \
      [](const ExperimentConfig& c) -> std::optional<std::string> { \
        if (!c.section.field) return std::nullopt; \
        return format_number(*c.section.field); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      EPRSQ_OPTIONAL(opo, x),
      EPRSQ_OPTIONAL(opo, pump_power_mw),
      EPRSQ_NUM(opo, threshold_mw),
      EPRSQ_NUM(opo, hwhm_hz),
      EPRSQ_NUM(opo, escape_efficiency),
      EPRSQ_ANGLE(opo, pump_phase_rad),

      EPRSQ_BOOL(cavity, enabled),
      EPRSQ_NUM(cavity, hwhm_hz),
      EPRSQ_NUM(cavity, eta_in),
      EPRSQ_NUM(cavity, detuning_signal_hwhm),
      EPRSQ_NUM(cavity, detuning_idler_hwhm),

      EPRSQ_NUM(losses, signal_efficiency),
      EPRSQ_NUM(losses, idler_efficiency),

      EPRSQ_ANGLE(readout, signal_lo_phase_rad),
      EPRSQ_ANGLE(readout, angle_start_rad),
      EPRSQ_ANGLE(readout, angle_stop_rad),
      EPRSQ_COUNT(readout, angle_count),
      EPRSQ_NUM(readout, gain_signal),
      EPRSQ_NUM(readout, gain_idler),
      Key{"readout.combiner_sign",
          [](ExperimentConfig& c, const std::string& v) { c.readout.combiner_sign = parse_sign(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> {
            return std::to_string(c.readout.combiner_sign);
          }},
      Key{"readout.combiner",
          [](ExperimentConfig& c, const std::string& v) { c.readout.combiner = parse_combiner(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> { return to_string(c.readout.combiner); }},

      EPRSQ_NUM(grid, f_min_hz),
      EPRSQ_NUM(grid, f_max_hz),
      EPRSQ_COUNT(grid, points),
      Key{"grid.scale", [](ExperimentConfig& c, const std::string& v) { c.grid.scale = parse_grid_scale(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> { return eprsq::to_string(c.grid.scale); }},

      Key{"clf.sweep", [](ExperimentConfig& c, const std::string& v) { c.clf.sweep = parse_clf_sweep(v); },
          [](const ExperimentConfig& c) -> std::optional<std::string> { return to_string(c.clf.sweep); }},
      EPRSQ_ANGLE(clf, sweep_start_rad),
      EPRSQ_ANGLE(clf, sweep_stop_rad),
      EPRSQ_COUNT(clf, sweep_count),
      EPRSQ_ANGLE(clf, clf_phase_rad),
      EPRSQ_ANGLE(clf, lo_phase_rad),
      EPRSQ_NUM(clf, injection_hwhm_hz),
      EPRSQ_BOOL(clf, locked),
      EPRSQ_NUM(clf, amplitude_gain),

      EPRSQ_NUM(meta, clf_beat_hz),
      EPRSQ_NUM(meta, tc_input_reflectivity),
  };
  return table;
}

#undef EPRSQ_NUM
#undef EPRSQ_ANGLE
#undef EPRSQ_COUNT
#undef EPRSQ_BOOL
#undef EPRSQ_OPTIONAL

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_key(const std::string& name) {
  const Key* best = nullptr;
  std::size_t best_distance = std::string::npos;
  for (const Key& k : keys()) {
    const std::size_t d = edit_distance(name, k.name);
    if (d < best_distance) {
      best_distance = d;
      best = &k;
    }
  }
  return best->name;
}

Error located(const std::string& source, std::size_t line, const std::string& key, const Error& e) {
  std::ostringstream msg;
  msg << source;
  if (line > 0) msg << ":" << line;
  if (!key.empty()) msg << ": " << key;
  msg << ": " << e.detail();
  return Error(e.kind() == ErrorKind::AboveThreshold ? ErrorKind::AboveThreshold : ErrorKind::Config, msg.str());
}

}  // namespace

double parse_angle(const std::string& raw) {
  const std::string text = trim(raw);
  static const std::regex pi_form(R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$)");
  static const std::regex bare_sign(R"(^([+-])\s*pi\s*(?:/\s*(\d+\.?\d*))?$)");
  std::smatch m;
  if (std::regex_match(text, m, bare_sign)) {
    const double denom = m[2].matched ? parse_number(m[2]) : 1.0;
    return (m[1] == "-" ? -kPi : kPi) / denom;
  }
  if (std::regex_match(text, m, pi_form)) {
    const double factor = m[1].matched ? parse_number(m[1]) : 1.0;
    const double denom = m[2].matched ? parse_number(m[2]) : 1.0;
    if (denom == 0.0) throw Error(ErrorKind::Config, "division by zero in angle '" + text + "'");
    return factor * kPi / denom;
  }
  return parse_number(text);
}

std::vector<double> parse_angle_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) throw Error(ErrorKind::Config, "empty entry in angle list '" + text + "'");
    out.push_back(parse_angle(item));
  }
  if (out.empty()) throw Error(ErrorKind::Config, "angle list is empty");
  return out;
}

double ExperimentConfig::pump_parameter() const {
  if (opo.x && opo.pump_power_mw) {
    throw Error(ErrorKind::Config, "opo.x and opo.pump_power_mw are mutually exclusive");
  }
  if (opo.x) return *opo.x;
  if (opo.pump_power_mw) {
    if (*opo.pump_power_mw >= opo.threshold_mw) {
      throw Error(ErrorKind::AboveThreshold, "pump power is at or above the OPO threshold");
    }
    return eprsq::pump_parameter(*opo.pump_power_mw, opo.threshold_mw);
  }
  throw Error(ErrorKind::Config, "one of opo.x or opo.pump_power_mw is required");
}

OpoParams ExperimentConfig::opo_params() const {
  if (!(opo.hwhm_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "OPO linewidth must be > 0");
  return OpoParams::from_linewidth(pump_parameter(), opo.pump_phase_rad, kTwoPi * opo.hwhm_hz,
                                   opo.escape_efficiency);
}

CavityParams ExperimentConfig::cavity_params() const {
  CavityParams p;
  p.gamma = kTwoPi * cavity.hwhm_hz;
  p.input_coupling = cavity.eta_in;
  p.detuning_signal = cavity.detuning_signal_hwhm;
  p.detuning_idler = cavity.detuning_idler_hwhm;
  p.validate();
  return p;
}

LossChannel ExperimentConfig::loss_channel() const {
  LossChannel ch{losses.signal_efficiency, losses.idler_efficiency};
  ch.validate();
  return ch;
}

ReadoutConfig ExperimentConfig::readout_config() const {
  ReadoutConfig r;
  r.signal_phase = readout.signal_lo_phase_rad;
  r.idler_phase = readout.angle_start_rad;
  r.signal_gain = readout.gain_signal;
  r.idler_gain = readout.gain_idler;
  r.combiner_sign = readout.combiner_sign;
  r.validate();
  return r;
}

FrequencyGrid ExperimentConfig::frequency_grid() const {
  return make_grid(grid.f_min_hz, grid.f_max_hz, grid.points, grid.scale);
}

namespace {

std::vector<double> linspace(double start, double stop, std::size_t count) {
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "sweep needs at least one point");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = count == 1 ? start : start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  return out;
}

}  // namespace

std::vector<double> ExperimentConfig::sweep_angles() const {
  return linspace(readout.angle_start_rad, readout.angle_stop_rad, readout.angle_count);
}

ClfParams ExperimentConfig::clf_params() const {
  const OpoParams o = opo_params();
  ClfParams p;
  p.pump_phase = o.pump_phase;
  p.clf_phase = clf.clf_phase_rad;
  p.lo_phase = clf.lo_phase_rad;
  p.x = o.x;
  p.gamma_clf = kTwoPi * clf.injection_hwhm_hz;
  p.gamma_in = o.gamma_in;
  p.gamma_tot = o.gamma_tot();
  p.amplitude_gain = clf.amplitude_gain;
  p.validate();
  return p;
}

void validate_config(const ExperimentConfig& c) {
  c.opo_params();
  if (c.cavity.enabled) c.cavity_params();
  c.loss_channel();
  c.readout_config();
  c.frequency_grid();
  if (c.readout.angle_count == 0) throw Error(ErrorKind::InvalidArgument, "readout.angle_count must be >= 1");
  if (c.clf.sweep_count == 0) throw Error(ErrorKind::InvalidArgument, "clf.sweep_count must be >= 1");
  if (!(c.clf.injection_hwhm_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "clf.injection_hwhm_hz must be > 0");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  ExperimentConfig config;
  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw located(source, line_no, "", Error(ErrorKind::Config, "expected 'key = value'"));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = std::find_if(keys().begin(), keys().end(), [&](const Key& k) { return k.name == key; });
    if (it == keys().end()) {
      throw located(source, line_no, key,
                    Error(ErrorKind::Config, "unknown key (did you mean '" + nearest_key(key) + "'?)"));
    }
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw located(source, line_no, key,
                    Error(ErrorKind::Config, "duplicate key, first set on line " + std::to_string(prev->second)));
    }
    seen.emplace(key, line_no);
    if (value.empty()) throw located(source, line_no, key, Error(ErrorKind::Config, "missing value"));
    try {
      it->read(config, value);
    } catch (const Error& e) {
      throw located(source, line_no, key, e);
    }
  }

  try {
    validate_config(config);
  } catch (const Error& e) {
    throw located(source, 0, "", e);
  }
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const Key& k : keys()) {
    const auto value = k.write(config);
    if (!value) continue;
    const std::string this_section = k.name.substr(0, k.name.find('.'));
    if (!section.empty() && this_section != section) out << "\n";
    section = this_section;
    out << k.name << " = " << *value << "\n";
  }
  return out.str();
}

NoisePortSet build_network(const ExperimentConfig& config) {
  const FrequencyGrid grid = config.frequency_grid();
  NoisePortSet ports = opo_ports(config.opo_params(), grid);
  if (config.cavity.enabled) ports = compose(ports, cavity_ports(config.cavity_params(), grid));
  return compose(ports, loss_ports(config.loss_channel(), grid));
}

SpectralCovariance simulate(const ExperimentConfig& config) {
  return covariance_from_ports(build_network(config));
}

}  // namespace eprsq::cli
