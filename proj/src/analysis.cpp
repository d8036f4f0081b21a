#include "eprsq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "eprsq/errors.hpp"

namespace eprsq {
namespace {

void check_pump(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw Error(ErrorKind::InvalidArgument, "pump parameter must satisfy 0 <= x < 1");
}

void check_efficiency(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::InvalidArgument, "escape efficiency must lie in (0, 1]");
}

void check_loss(double l) {
  if (!(l >= 0.0 && l <= 1.0)) throw Error(ErrorKind::InvalidArgument, "loss must lie in [0, 1]");
}

double db(double v) { return 10.0 * std::log10(v); }

// --- loss fit ---------------------------------------------------------------

constexpr int kScan = 64;
constexpr int kBits = std::numeric_limits<double>::digits / 2;
constexpr std::uintmax_t kMaxIter = 200;

struct Minimum {
  double arg;
  double value;
  std::uintmax_t iterations;
};

// Scan then Brent-refine a 1-D objective on [lo, hi].
template <typename F>
Minimum bounded_minimum(F&& f, double lo, double hi, const char* what) {
  const double step = (hi - lo) / kScan;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScan; ++k) {
    const double v = f(lo + k * step);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  const double a = lo + std::max(best - 1, 0) * step;
  const double b = lo + std::min(best + 1, kScan) * step;
  std::uintmax_t iterations = kMaxIter;
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, a, b, kBits, iterations);
  if (iterations >= kMaxIter || !std::isfinite(fx)) {
    std::ostringstream msg;
    msg << what << " did not converge after " << iterations << " iterations (last value " << fx << ")";
    throw Error(ErrorKind::FitFailure, msg.str());
  }
  if (fx <= best_value) return {x, fx, iterations};
  return {lo + best * step, best_value, iterations};
}

double loss_cost(const LossFitInput& in, double loss, double threshold_mw) {
  double sum = 0.0;
  for (const LossRecord& r : in.records) {
    const double x = std::sqrt(r.pump_power_mw / threshold_mw);
    const PlusMinus m = methods_loss_oracle(x, loss, r.omega / in.gamma_opo);
    const double dp = db(m.plus) - db(r.v_plus);
    const double dm = db(m.minus) - db(r.v_minus);
    sum += dp * dp + dm * dm;
  }
  return sum;
}

Minimum best_loss(const LossFitInput& in, double threshold_mw) {
  return bounded_minimum([&](double l) { return loss_cost(in, l, threshold_mw); }, 0.0, 1.0,
                         "loss fit");
}

}  // namespace

double v_out_oracle(double x, double escape_efficiency, double omega_over_gamma) {
  check_pump(x);
  check_efficiency(escape_efficiency);
  const double w2 = omega_over_gamma * omega_over_gamma;
  const double x2 = x * x;
  return 1.0 + 8.0 * x2 * escape_efficiency / (x2 * x2 + 2.0 * x2 * (w2 - 1.0) + (w2 + 1.0) * (w2 + 1.0));
}

PlusMinus v_pm_oracle(double x, double escape_efficiency, double omega_over_gamma) {
  check_pump(x);
  check_efficiency(escape_efficiency);
  const double w2 = omega_over_gamma * omega_over_gamma;
  const double a = 4.0 * x * escape_efficiency;
  return {2.0 * (1.0 + a / ((1.0 - x) * (1.0 - x) + w2)), 2.0 * (1.0 - a / ((1.0 + x) * (1.0 + x) + w2))};
}

double v_cond_oracle(double x, double escape_efficiency, double omega_over_gamma, double pump_phase) {
  const PlusMinus v = v_pm_oracle(x, escape_efficiency, omega_over_gamma);
  const double c = std::cos(0.5 * pump_phase);
  const double s = std::sin(0.5 * pump_phase);
  return v.plus * c * c + v.minus * s * s;
}

PlusMinus methods_loss_oracle(double x, double loss, double omega_over_gamma) {
  check_pump(x);
  check_loss(loss);
  const double w2 = omega_over_gamma * omega_over_gamma;
  const double a = 4.0 * x * (1.0 - loss);
  return {1.0 + a / ((1.0 - x) * (1.0 - x) + w2), 1.0 - a / ((1.0 + x) * (1.0 + x) + w2)};
}

double pump_for_squeezing(double target_db, double loss, double omega_over_gamma) {
  check_loss(loss);
  if (!(target_db < 0.0)) throw Error(ErrorKind::InvalidArgument, "target squeezing must be below 0 dB");
  // 4x(1-l) / ((1+x)^2 + w^2) = r  ->  r x^2 + (2r - 4(1-l)) x + r (1 + w^2) = 0
  const double r = 1.0 - std::pow(10.0, target_db / 10.0);
  const double a = 4.0 * (1.0 - loss);
  const double b = 2.0 * r - a;
  const double c = r * (1.0 + omega_over_gamma * omega_over_gamma);
  const double disc = b * b - 4.0 * r * c;
  if (disc < 0.0) throw Error(ErrorKind::InvalidArgument, "target squeezing unreachable at this loss");
  const double x = (-b - std::sqrt(disc)) / (2.0 * r);
  if (!(x >= 0.0 && x < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "target squeezing needs a pump above threshold");
  }
  return x;
}

double pump_parameter(double pump_power_mw, double threshold_mw) {
  if (!(threshold_mw > 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold power must be > 0");
  if (!(pump_power_mw >= 0.0 && pump_power_mw < threshold_mw)) {
    throw Error(ErrorKind::InvalidArgument, "pump power must lie in [0, threshold)");
  }
  return std::sqrt(pump_power_mw / threshold_mw);
}

void LossFitInput::validate() const {
  const std::size_t needed = threshold_mw ? 1 : 2;
  if (records.size() < needed) {
    throw Error(ErrorKind::InvalidArgument, "loss fit needs at least " + std::to_string(needed) +
                                                " record(s), got " + std::to_string(records.size()));
  }
  if (!(gamma_opo > 0.0)) throw Error(ErrorKind::InvalidArgument, "OPO linewidth must be > 0");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LossRecord& r = records[i];
    const std::string where = "record " + std::to_string(i) + ": ";
    if (!(r.pump_power_mw > 0.0)) throw Error(ErrorKind::InvalidArgument, where + "pump power must be > 0");
    if (!(r.v_plus >= 1.0 && r.v_minus <= 1.0 && r.v_minus > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, where + "expected v_plus >= 1 >= v_minus > 0");
    }
    if (!(r.omega >= 0.0)) throw Error(ErrorKind::InvalidArgument, where + "frequency must be >= 0");
    if (threshold_mw && !(r.pump_power_mw < *threshold_mw)) {
      throw Error(ErrorKind::InvalidArgument, where + "pump power must be below the threshold");
    }
  }
}

LossFitResult fit_detection_loss(const LossFitInput& input) {
  input.validate();
  LossFitResult result;

  if (input.threshold_mw) {
    result.threshold_mw = *input.threshold_mw;
    result.loss = best_loss(input, result.threshold_mw).arg;
  } else {
    double p_max = 0.0;
    for (const LossRecord& r : input.records) p_max = std::max(p_max, r.pump_power_mw);
    // Search log(P_th) over (p_max, 1000 p_max].
    const double lo = std::log(p_max) + 1e-9;
    const double hi = std::log(p_max * 1e3);
    const Minimum outer = bounded_minimum(
        [&](double log_pth) { return best_loss(input, std::exp(log_pth)).value; }, lo, hi, "threshold fit");
    const double edge = 1e-6 * (hi - lo);
    if (outer.arg - lo < edge || hi - outer.arg < edge) {
      throw Error(ErrorKind::FitFailure, "threshold fit ran into its search bound; threshold not identifiable");
    }
    result.threshold_mw = std::exp(outer.arg);
    result.threshold_fitted = true;
    result.loss = best_loss(input, result.threshold_mw).arg;
  }

  const double cost = loss_cost(input, result.loss, result.threshold_mw);
  result.rms_residual_db = std::sqrt(cost / (2.0 * static_cast<double>(input.records.size())));
  for (const LossRecord& r : input.records) {
    result.pump_parameters.push_back(std::sqrt(r.pump_power_mw / result.threshold_mw));
  }
  return result;
}

double subtract_dark_noise(double variance, double dark_noise_db) {
  const double cleaned = variance - std::pow(10.0, dark_noise_db / 10.0);
  if (!(cleaned > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "dark-noise floor exceeds the measured variance");
  }
  return cleaned;
}

void ClfParams::validate() const {
  if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "CLF pump parameter must be finite");
  if (std::abs(x * x - 1.0) < 1e-12) throw Error(ErrorKind::Pole, "CLF error signal has a pole at x = 1");
  if (!(gamma_clf > 0.0 && gamma_in > 0.0 && gamma_tot > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "CLF decay rates must be > 0");
  }
}

double clf_reflection_error(const ClfParams& p) {
  p.validate();
  return p.amplitude_gain * p.x / (p.x * p.x - 1.0) * (p.gamma_clf / p.gamma_tot) *
         std::sin(p.pump_phase - 2.0 * p.clf_phase);
}

double clf_transmission_error(const ClfParams& p, bool locked) {
  p.validate();
  const double prefactor = p.amplitude_gain / (p.x * p.x - 1.0) * std::sqrt(p.gamma_clf * p.gamma_in) / p.gamma_tot;
  if (locked) {
    // x sin(b/2 - lo) - sin(b/2 - lo) = (x - 1) sin(b/2 - lo) on theta_b = 2 phi_c
    return prefactor * (p.x - 1.0) * std::sin(0.5 * p.pump_phase - p.lo_phase);
  }
  return prefactor * (p.x * std::sin(p.pump_phase - p.lo_phase - p.clf_phase) + std::sin(p.lo_phase - p.clf_phase));
}

}  // namespace eprsq
