#include "eprsq/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "eprsq/errors.hpp"

namespace eprsq {
namespace {

constexpr int kScanPoints = 256;
constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;
constexpr std::uintmax_t kBrentMaxIter = 200;

double wrap_2pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

// Global minimum of a smooth periodic function over [0, period): coarse scan,
// then Brent refinement inside the bracketing cell pair.
template <typename F>
std::pair<double, double> periodic_minimum(F&& f, double period) {
  const double step = period / kScanPoints;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kScanPoints; ++k) {
    const double v = f(k * step);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  std::uintmax_t iterations = kBrentMaxIter;
  const auto [x, fx] = boost::math::tools::brent_find_minima(
      f, (best - 1) * step, (best + 1) * step, kBrentBits, iterations);
  if (fx <= best_value) return {x, fx};
  return {best * step, best_value};
}

Eigen::Vector4d signal_projection(double phase) {
  return Eigen::Vector4d(std::cos(phase), std::sin(phase), 0.0, 0.0);
}

Eigen::Vector4d idler_projection(double phase) {
  return Eigen::Vector4d(0.0, 0.0, std::cos(phase), std::sin(phase));
}

Complex cross(const Mat4& s, const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
  return (a.cast<Complex>().transpose() * s * b.cast<Complex>())(0, 0);
}

struct ConditionedValue {
  double variance;
  Complex gain;
};

// Smallest eigenvalue of the 2x2 cross-spectral matrix of (a, b).
ConditionedValue condition_on(double s_aa, double s_bb, Complex s_ab) {
  const double mean = 0.5 * (s_aa + s_bb);
  const double half_diff = 0.5 * (s_aa - s_bb);
  const double lambda = mean - std::sqrt(half_diff * half_diff + std::norm(s_ab));
  const Complex gain = std::abs(s_ab) > 0.0 ? (s_aa - lambda) / s_ab : Complex(0.0);
  return {lambda, gain};
}

}  // namespace

void ReadoutConfig::validate() const {
  if (!std::isfinite(signal_phase) || !std::isfinite(idler_phase)) {
    throw Error(ErrorKind::InvalidArgument, "LO phases must be finite");
  }
  if (!std::isfinite(signal_gain) || !std::isfinite(idler_gain)) {
    throw Error(ErrorKind::InvalidArgument, "combiner gains must be finite");
  }
  if (signal_gain == 0.0 && idler_gain == 0.0) {
    throw Error(ErrorKind::InvalidArgument, "zero-norm projection: both combiner gains are zero");
  }
  if (combiner_sign != 1 && combiner_sign != -1) {
    throw Error(ErrorKind::InvalidArgument, "combiner sign must be +1 or -1");
  }
}

Eigen::Vector4d ReadoutConfig::projection() const {
  const double s = -static_cast<double>(combiner_sign);
  return Eigen::Vector4d(signal_gain * std::cos(signal_phase), signal_gain * std::sin(signal_phase),
                         s * idler_gain * std::cos(idler_phase), s * idler_gain * std::sin(idler_phase));
}

double homodyne_variance(const Mat4& covariance, const ReadoutConfig& cfg) {
  cfg.validate();
  const Eigen::Vector4d u = cfg.projection();
  const double norm = u.squaredNorm();
  if (!(norm > 0.0)) throw Error(ErrorKind::InvalidArgument, "zero-norm projection vector");
  return cross(covariance, u, u).real() / norm;
}

std::vector<double> homodyne_variance(const SpectralCovariance& covariance, const ReadoutConfig& cfg) {
  cfg.validate();
  std::vector<double> out(covariance.size());
  for (std::size_t k = 0; k < covariance.size(); ++k) out[k] = homodyne_variance(covariance.at(k), cfg);
  return out;
}

SpectrumResult angle_sweep(const SpectralCovariance& covariance, std::span<const double> angles,
                           const ReadoutConfig& cfg) {
  if (angles.empty()) throw Error(ErrorKind::InvalidArgument, "angle sweep needs at least one angle");
  cfg.validate();
  const std::size_t n = covariance.size();
  SpectrumResult result{covariance.grid(), std::vector<double>(angles.begin(), angles.end()),
                        Eigen::MatrixXd(n, angles.size()), Eigen::MatrixXd(n, angles.size())};
  ReadoutConfig point = cfg;
  for (std::size_t j = 0; j < angles.size(); ++j) {
    point.idler_phase = angles[j];
    for (std::size_t k = 0; k < n; ++k) {
      const double v = homodyne_variance(covariance.at(k), point);
      result.variance(k, j) = v;
      result.variance_db(k, j) = to_db(v);
    }
  }
  return result;
}

AngleOptimum min_variance_angle(const Mat4& covariance, const ReadoutConfig& cfg) {
  cfg.validate();
  ReadoutConfig point = cfg;
  auto f = [&](double phi) {
    point.idler_phase = phi;
    return homodyne_variance(covariance, point);
  };
  const auto [phi, v] = periodic_minimum(f, kTwoPi);
  return {wrap_2pi(phi), v};
}

std::vector<double> min_variance_angles(const SpectralCovariance& covariance, const ReadoutConfig& cfg) {
  std::vector<double> out(covariance.size());
  for (std::size_t k = 0; k < covariance.size(); ++k) {
    double a = min_variance_angle(covariance.at(k), cfg).angle;
    if (k > 0) a += kTwoPi * std::round((out[k - 1] - a) / kTwoPi);
    out[k] = a;
  }
  return out;
}

WienerResult wiener_conditional(const SpectralCovariance& covariance, double signal_phase) {
  if (!std::isfinite(signal_phase)) throw Error(ErrorKind::InvalidArgument, "signal phase must be finite");
  const std::size_t n = covariance.size();
  WienerResult out{std::vector<Complex>(n), std::vector<double>(n), std::vector<double>(n)};
  const Eigen::Vector4d ua = signal_projection(signal_phase);

  for (std::size_t k = 0; k < n; ++k) {
    const Mat4& s = covariance.at(k);
    const Eigen::Matrix2d idler = s.bottomRightCorner<2, 2>().real();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (idler + idler.transpose()));
    if (!(eig.eigenvalues().minCoeff() > 1e-300)) {
      throw Error(ErrorKind::DegenerateConditioning, "idler auto-spectrum vanishes at grid point " +
                                                         std::to_string(k));
    }
    const double s_aa = cross(s, ua, ua).real();

    // |S_ab(phi)| is bounded by the norm of the signal-idler cross block row.
    const Eigen::RowVector2cd cross_row = ua.head<2>().cast<Complex>().transpose() * s.topRightCorner<2, 2>();
    if (cross_row.norm() <= 1e-14 * std::sqrt(s_aa * eig.eigenvalues().maxCoeff())) {
      out.gain[k] = 0.0;
      out.idler_phase[k] = 0.0;
      out.variance[k] = s_aa;
      continue;
    }

    auto conditioned = [&](double phi) {
      const Eigen::Vector4d ub = idler_projection(phi);
      return condition_on(s_aa, cross(s, ub, ub).real(), cross(s, ua, ub));
    };
    const auto [phi, v] = periodic_minimum([&](double p) { return conditioned(p).variance; }, kPi);
    const ConditionedValue best = conditioned(phi);
    out.idler_phase[k] = std::fmod(phi + kPi, kPi);
    out.gain[k] = phi < 0.0 || phi >= kPi ? -best.gain : best.gain;
    out.variance[k] = best.variance;
  }
  return out;
}

double to_db(double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorKind::InvalidArgument, "dB conversion needs a positive finite variance");
  }
  return 10.0 * std::log10(variance);
}

}  // namespace eprsq
