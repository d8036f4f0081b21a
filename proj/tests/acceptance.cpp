// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is nonzero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "eprsq/analysis.hpp"
#include "eprsq/elements.hpp"
#include "eprsq/readout.hpp"
#include "eprsq/spectral.hpp"
#include "oracles.hpp"

using namespace eprsq;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleRelTol = 1e-9;
constexpr double kOracleMaxSeconds = 5.0;
constexpr double kPassivityTol = 1e-10;
constexpr double kRotationTarget = kPi / 2;
constexpr double kRotationTol = 0.05;
constexpr double kCancellationTol = 1e-3;
constexpr double kAnchorDb = -2.00;
constexpr double kAnchorTolDb = 0.05;
constexpr double kFitLossTol = 0.02;
constexpr int kFitMinPasses = 95;
constexpr double kFitMaxSeconds = 10.0;
constexpr double kClfTol = 1e-12;
constexpr double kWienerSlack = 1e-12;
constexpr double kWienerSymmetricTol = 1e-9;

constexpr double kOpoHwhm = kTwoPi * 12.1e6;
constexpr double kTcHwhm = kTwoPi * 1.25e6;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_dev_from_identity(const Mat4& t, const NoisePortSet& added, std::size_t i) {
  Mat4 sum = t * t.adjoint();
  for (const NoisePort& p : added.ports()) sum += p.transfer.at(i) * p.transfer.at(i).adjoint();
  return (sum - Mat4::Identity()).cwiseAbs().maxCoeff();
}

// OPO -> test cavity -> detection loss.
SpectralCovariance chain(double x, double delta_s, double delta_i, double efficiency, const FrequencyGrid& g) {
  NoisePortSet net = opo_ports(OpoParams{x, kPi, kOpoHwhm, 0.0}, g);
  net = compose(net, cavity_ports(CavityParams{kTcHwhm, 1.0, delta_s, delta_i}, g));
  net = compose(net, loss_ports(LossChannel{efficiency, efficiency}, g));
  return covariance_from_ports(net);
}

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = oracle::rng(101);
  const FrequencyGrid g = make_grid(1e4, 1e8, 50, GridScale::Logarithmic);
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const double x = oracle::uniform(rng, 1e-6, 0.95);
    const double eta = oracle::uniform(rng, 0.5, 1.0);
    for (const double theta : {0.0, kPi}) {
      const SpectralCovariance s =
          covariance_from_ports(opo_ports(OpoParams::from_linewidth(x, theta, kOpoHwhm, eta), g));
      const std::vector<double> combined = homodyne_variance(s, ReadoutConfig{});
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = g.omega(i) / kOpoHwhm;
        const auto [vp, vm] = oracle::v_pm(x, eta, w);
        const double expected = theta == 0.0 ? vp / 2 : vm / 2;
        worst = std::max(worst, oracle::relative_error(combined[i], expected));
        worst = std::max(worst, oracle::relative_error(s.at(i)(0, 0).real(), oracle::v_out(x, eta, w)));
        worst = std::max(worst, oracle::relative_error(s.at(i)(3, 3).real(), oracle::v_out(x, eta, w)));
        worst = std::max(worst, oracle::relative_error(s.at(i)(0, 0).real(), v_out_oracle(x, eta, w)));
        const PlusMinus lib = v_pm_oracle(x, eta, w);
        worst = std::max(worst, oracle::relative_error(combined[i], theta == 0.0 ? lib.plus / 2 : lib.minus / 2));
      }
    }
  }
  const double t = seconds_since(t0);
  return {worst <= kOracleRelTol && t < kOracleMaxSeconds,
          fmt("max relative deviation %.2e (tol %.0e), %.3f s (limit 5 s)", worst, kOracleRelTol, t)};
}

Outcome passivity() {
  auto rng = oracle::rng(202);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double gamma = oracle::uniform(rng, 1e5, 1e8);
    const FrequencyGrid g({oracle::uniform(rng, 1e-3, 100) * gamma, 101 * gamma}, GridScale::Linear);
    const ElementResponse cav = cavity_ports(
        CavityParams{gamma, oracle::uniform(rng, 0.01, 1.0), oracle::uniform(rng, -5, 5), oracle::uniform(rng, -5, 5)},
        g);
    const ElementResponse loss = loss_ports(LossChannel{oracle::uniform(rng, 0, 1), oracle::uniform(rng, 0, 1)}, g);
    const QuadratureTransfer shift = phase_shift(oracle::uniform(rng, -7, 7), oracle::uniform(rng, -7, 7), g);
    // An unpumped OPO is passive: its input and loss ports together conserve energy.
    const NoisePortSet opo =
        opo_ports(OpoParams::from_linewidth(0.0, oracle::uniform(rng, 0, kTwoPi), gamma, oracle::uniform(rng, 0.1, 1)), g);
    NoisePortSet opo_loss(g);
    for (std::size_t p = 1; p < opo.size(); ++p) opo_loss.add(opo.ports()[p].label, opo.ports()[p].transfer);
    worst = std::max(worst, max_dev_from_identity(cav.transfer.at(0), cav.added, 0));
    worst = std::max(worst, max_dev_from_identity(loss.transfer.at(0), loss.added, 0));
    worst = std::max(worst, max_dev_from_identity(shift.at(0), NoisePortSet(g), 0));
    worst = std::max(worst, max_dev_from_identity(opo.ports()[0].transfer.at(0), opo_loss, 0));
  }
  return {worst <= kPassivityTol, fmt("max |T T^dag + sum T_l T_l^dag - I| = %.2e (tol %.0e)", worst, kPassivityTol)};
}

Outcome rotation() {
  const double x = pump_for_squeezing(-2.0, 0.47);
  const FrequencyGrid g = make_grid(1.25e5, 1.25e7, 201, GridScale::Logarithmic);
  const SpectralCovariance s = chain(x, 1.0, 1.0, 0.53, g);
  const std::vector<double> phi_i = min_variance_angles(s, ReadoutConfig{});
  const double dq = two_mode_quadrature_angle(0.0, phi_i.back()) - two_mode_quadrature_angle(0.0, phi_i.front());
  const double low_db = to_db(oracle::loss_model(x, 0.47, g.omega(0) / kOpoHwhm).second);
  const bool pass = std::abs(std::abs(dq) - kRotationTarget) <= kRotationTol;
  return {pass, fmt("x = %.4f; squeezed quadrature rotates by %.4f rad between gamma_tc/10 and 10 gamma_tc "
                    "(target pi/2 +- 0.05); idler LO phase of the optimum shifts by %.4f rad",
                    x, std::abs(dq), std::abs(phi_i.back() - phi_i.front())) +
                    fmt(", low-frequency level %.2f dB", low_db)};
}

Outcome cancellation() {
  const double x = pump_for_squeezing(-2.0, 0.47);
  const FrequencyGrid g = make_grid(1e5, 2e7, 121, GridScale::Logarithmic);
  const std::vector<double> phi = min_variance_angles(chain(x, 0.5, -0.5, 0.53, g), ReadoutConfig{});
  const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
  const double spread = *hi - *lo;
  return {spread <= kCancellationTol,
          fmt("optimum idler LO phase spread %.2e rad over 100 kHz-20 MHz (tol %.0e)", spread, kCancellationTol)};
}

Outcome loss_anchor() {
  const double db = to_db(methods_loss_oracle(0.29, 0.47, 0.0).minus);
  return {std::abs(db - kAnchorDb) <= kAnchorTolDb, fmt("V_- = %.3f dB (target -2.00 +- 0.05)", db)};
}

Outcome loss_fit_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = oracle::rng(606);
  std::normal_distribution<double> noise_db(0.0, 0.1);
  int ok = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    LossFitInput in;
    in.threshold_mw = kDefaultThresholdMw;
    for (double x : {0.2, 0.4, 0.6}) {
      const auto [vp, vm] = oracle::loss_model(x, 0.49, 0.0);
      in.records.push_back(LossRecord{x * x * kDefaultThresholdMw, vp * std::pow(10.0, noise_db(rng) / 10.0),
                                      vm * std::pow(10.0, noise_db(rng) / 10.0), 0.0});
    }
    const double err = std::abs(fit_detection_loss(in).loss - 0.49);
    worst = std::max(worst, err);
    if (err <= kFitLossTol) ++ok;
  }
  const double t = seconds_since(t0);
  return {ok >= kFitMinPasses && t < kFitMaxSeconds,
          fmt("%.0f/100 trials within +-0.02 (need 95), worst error %.4f, %.3f s (limit 10 s)", ok, worst, t)};
}

Outcome clf() {
  auto rng = oracle::rng(707);
  double worst_r = 0.0, worst_t = 0.0, worst_eq = 0.0;
  for (int k = 0; k < 1000; ++k) {
    ClfParams p;
    p.x = oracle::uniform(rng, 0.0, 0.99);
    p.gamma_clf = oracle::uniform(rng, 0.01, 1.0);
    p.gamma_in = oracle::uniform(rng, 0.5, 1.0);
    p.gamma_tot = p.gamma_in + oracle::uniform(rng, 0.0, 0.5);
    p.clf_phase = oracle::uniform(rng, -kTwoPi, kTwoPi);
    p.lo_phase = oracle::uniform(rng, -kTwoPi, kTwoPi);
    p.pump_phase = 2.0 * p.clf_phase;
    worst_r = std::max(worst_r, std::abs(clf_reflection_error(p)));
    worst_eq = std::max(worst_eq, std::abs(clf_transmission_error(p, false) - clf_transmission_error(p, true)));
    ClfParams q = p;
    q.pump_phase = oracle::uniform(rng, -kTwoPi, kTwoPi);
    q.lo_phase = q.pump_phase / 2.0;
    worst_t = std::max(worst_t, std::abs(clf_transmission_error(q, true)));
  }
  const double worst = std::max({worst_r, worst_t, worst_eq});
  return {worst <= kClfTol, fmt("max |E_r| at lock %.1e, max |E_t locked| at zero %.1e, max unlocked-locked %.1e",
                                worst_r, worst_t, worst_eq) +
                                " (tol 1e-12)"};
}

Outcome wiener() {
  auto rng = oracle::rng(808);
  const FrequencyGrid g = make_grid(1e4, 1e8, 40, GridScale::Logarithmic);
  double worst_excess = -1e300;
  for (int k = 0; k < 100; ++k) {
    NoisePortSet net = opo_ports(OpoParams::from_linewidth(oracle::uniform(rng, 0.0, 0.9),
                                                           oracle::uniform(rng, 0, kTwoPi), kOpoHwhm,
                                                           oracle::uniform(rng, 0.5, 1.0)),
                                 g);
    net = compose(net, cavity_ports(CavityParams{kTcHwhm, oracle::uniform(rng, 0.5, 1.0), oracle::uniform(rng, -2, 2),
                                                 oracle::uniform(rng, -2, 2)},
                                    g));
    net = compose(net, loss_ports(LossChannel{oracle::uniform(rng, 0.3, 1), oracle::uniform(rng, 0.3, 1)}, g));
    const SpectralCovariance s = covariance_from_ports(net);
    const double phi_s = oracle::uniform(rng, 0, kTwoPi);
    const WienerResult w = wiener_conditional(s, phi_s);
    for (int f = 0; f < 20; ++f) {
      const ReadoutConfig cfg{phi_s, oracle::uniform(rng, 0, kTwoPi), 1.0, oracle::uniform(rng, 0, 3),
                              f % 2 ? 1 : -1};
      const std::vector<double> fixed = homodyne_variance(s, cfg);
      for (std::size_t i = 0; i < g.size(); ++i) worst_excess = std::max(worst_excess, w.variance[i] - fixed[i]);
    }
  }
  const FrequencyGrid dc({1e-9, 1.0}, GridScale::Linear);
  const WienerResult sym = wiener_conditional(covariance_from_ports(opo_ports(OpoParams{0.5, kPi, 1.0, 0.0}, dc)), 0.0);
  const double dev = std::abs(sym.variance[0] - oracle::v_pm(0.5, 1.0, 0.0).second / 2.0);
  return {worst_excess <= kWienerSlack && dev <= kWienerSymmetricTol,
          fmt("max (Wiener - fixed) = %.2e over 100 configurations x 20 fixed combiners (slack 1e-12); "
              "symmetric lossless |V - V_-/2| = %.1e (tol 1e-9)",
              worst_excess, dev)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("eprsq_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path configs = EPRSQ_CONFIG_DIR;
  std::vector<std::string> runs;
  for (const char* cfg : {"both_detuned.cfg", "idler_detuned.cfg", "opposite_detuned.cfg", "vacuum.cfg"}) {
    const std::string c = " --config " + (configs / cfg).string();
    runs.push_back("spectrum" + c + " --angles 0,pi/2,pi");
    runs.push_back("sweep" + c);
    runs.push_back("clf" + c);
    runs.push_back("validate" + c);
  }
  runs.push_back("fit-loss " + (configs / "loss_example.csv").string() + " --report " + (dir / "report").string());
  int identical = 0, failed = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / ("run" + std::to_string(r) + "_" + std::to_string(rep) + ".csv");
      const std::string cmd = std::string(EPRSQ_CLI_PATH) + " " + runs[r] + " --out " + out.string() + " 2>/dev/null";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failed;
      outputs[rep] = slurp(out);
      if (runs[r].rfind("fit-loss", 0) == 0) outputs[rep] += slurp(dir / "report");
    }
    if (!outputs[0].empty() && outputs[0] == outputs[1]) ++identical;
  }
  fs::remove_all(dir);
  const bool pass = failed == 0 && identical == static_cast<int>(runs.size());
  return {pass, fmt("%.0f/%.0f command runs byte-identical on repeat, %.0f nonzero exits", identical,
                    static_cast<double>(runs.size()), failed)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"oracle-pipeline equivalence", oracle_equivalence},
      {"passivity and conservation", passivity},
      {"detuned cavity rotates the squeezed quadrature by pi/2", rotation},
      {"opposite detunings cancel the rotation", cancellation},
      {"loss-model anchor at -2 dB", loss_anchor},
      {"loss-fit round trip", loss_fit_round_trip},
      {"CLF zeros and locked form", clf},
      {"Wiener optimality", wiener},
      {"CLI determinism", determinism},
  };
  int failures = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
  }
  std::printf("%d/%d criteria passed\n", n - failures, n);
  return failures == 0 ? 0 : 1;
}
