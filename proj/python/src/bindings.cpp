#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "eprsq/analysis.hpp"
#include "eprsq/commands.hpp"
#include "eprsq/config.hpp"
#include "eprsq/elements.hpp"
#include "eprsq/errors.hpp"
#include "eprsq/readout.hpp"
#include "eprsq/spectral.hpp"

namespace py = pybind11;
using namespace eprsq;

namespace {

// (n, 4, 4) complex array, row-major per matrix.
py::array_t<Complex> stack(const std::vector<Mat4>& matrices) {
  py::array_t<Complex> out({matrices.size(), std::size_t{4}, std::size_t{4}});
  auto view = out.mutable_unchecked<3>();
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) view(k, r, c) = matrices[k](r, c);
    }
  }
  return out;
}

std::vector<Mat4> unstack(const py::array_t<Complex, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(1) != 4 || a.shape(2) != 4) {
    throw Error(ErrorKind::InvalidArgument, "expected an (n, 4, 4) complex array");
  }
  auto view = a.unchecked<3>();
  std::vector<Mat4> out(static_cast<std::size_t>(a.shape(0)));
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) out[k](r, c) = view(k, r, c);
    }
  }
  return out;
}

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> out(v.size());
  std::memcpy(out.mutable_data(), v.data(), v.size() * sizeof(double));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Frequency-domain quantum noise simulator for EPR-based frequency-dependent squeezing";
  m.attr("__version__") = cli::kVersion;

  static py::exception<Error> error(m, "EprsqError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::enum_<GridScale>(m, "GridScale")
      .value("LINEAR", GridScale::Linear)
      .value("LOG", GridScale::Logarithmic);

  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init([](std::vector<double> omegas, GridScale scale) { return FrequencyGrid(std::move(omegas), scale); }),
           py::arg("omegas"), py::arg("scale") = GridScale::Linear)
      .def_property_readonly("omegas", [](const FrequencyGrid& g) { return to_array(g.omegas()); })
      .def_property_readonly("frequencies_hz",
                             [](const FrequencyGrid& g) {
                               std::vector<double> f(g.size());
                               for (std::size_t i = 0; i < g.size(); ++i) f[i] = g.frequency_hz(i);
                               return to_array(f);
                             })
      .def_property_readonly("scale", &FrequencyGrid::scale)
      .def("__len__", &FrequencyGrid::size);

  m.def("make_grid",
        [](double f_min, double f_max, std::size_t n, const std::string& scale) {
          return make_grid(f_min, f_max, n, parse_grid_scale(scale));
        },
        py::arg("f_min_hz"), py::arg("f_max_hz"), py::arg("n"), py::arg("scale") = "log");

  py::class_<QuadratureTransfer>(m, "QuadratureTransfer")
      .def(py::init([](const FrequencyGrid& g, const py::array_t<Complex, py::array::c_style | py::array::forcecast>& a) {
             return QuadratureTransfer(g, unstack(a));
           }),
           py::arg("grid"), py::arg("matrices"))
      .def_property_readonly("grid", &QuadratureTransfer::grid)
      .def_property_readonly("matrices", [](const QuadratureTransfer& t) { return stack(t.matrices()); });

  py::class_<NoisePortSet>(m, "NoisePortSet")
      .def(py::init<FrequencyGrid>(), py::arg("grid"))
      .def("add", &NoisePortSet::add, py::arg("label"), py::arg("transfer"))
      .def_property_readonly("grid", &NoisePortSet::grid)
      .def_property_readonly("labels",
                             [](const NoisePortSet& s) {
                               std::vector<std::string> labels;
                               for (const auto& p : s.ports()) labels.push_back(p.label);
                               return labels;
                             })
      .def("transfer",
           [](const NoisePortSet& s, const std::string& label) {
             const NoisePort* p = s.find(label);
             if (!p) throw py::key_error(label);
             return p->transfer;
           })
      .def("__len__", &NoisePortSet::size);

  py::class_<SpectralCovariance>(m, "SpectralCovariance")
      .def_property_readonly("grid", &SpectralCovariance::grid)
      .def_property_readonly("matrices", [](const SpectralCovariance& s) { return stack(s.matrices()); });

  m.def("covariance_from_ports", &covariance_from_ports, py::arg("ports"));

  py::class_<OpoParams>(m, "OpoParams")
      .def(py::init([](double x, double pump_phase, double gamma_in, double gamma_loss) {
             return OpoParams{x, pump_phase, gamma_in, gamma_loss};
           }),
           py::arg("x"), py::arg("pump_phase") = 0.0, py::arg("gamma_in") = 1.0, py::arg("gamma_loss") = 0.0)
      .def_static("from_linewidth", &OpoParams::from_linewidth, py::arg("x"), py::arg("pump_phase"),
                  py::arg("gamma_tot"), py::arg("escape_efficiency"))
      .def_readwrite("x", &OpoParams::x)
      .def_readwrite("pump_phase", &OpoParams::pump_phase)
      .def_readwrite("gamma_in", &OpoParams::gamma_in)
      .def_readwrite("gamma_loss", &OpoParams::gamma_loss)
      .def_property_readonly("gamma_tot", &OpoParams::gamma_tot)
      .def_property_readonly("escape_efficiency", &OpoParams::escape_efficiency);

  py::class_<CavityParams>(m, "CavityParams")
      .def(py::init([](double gamma, double input_coupling, double ds, double di) {
             return CavityParams{gamma, input_coupling, ds, di};
           }),
           py::arg("gamma"), py::arg("input_coupling") = 1.0, py::arg("detuning_signal") = 0.0,
           py::arg("detuning_idler") = 0.0)
      .def_readwrite("gamma", &CavityParams::gamma)
      .def_readwrite("input_coupling", &CavityParams::input_coupling)
      .def_readwrite("detuning_signal", &CavityParams::detuning_signal)
      .def_readwrite("detuning_idler", &CavityParams::detuning_idler);

  py::class_<LossChannel>(m, "LossChannel")
      .def(py::init([](double s, double i) { return LossChannel{s, i}; }), py::arg("signal_efficiency") = 1.0,
           py::arg("idler_efficiency") = 1.0)
      .def_readwrite("signal_efficiency", &LossChannel::signal_efficiency)
      .def_readwrite("idler_efficiency", &LossChannel::idler_efficiency);

  py::class_<ElementResponse>(m, "ElementResponse")
      .def_readonly("transfer", &ElementResponse::transfer)
      .def_readonly("added", &ElementResponse::added);

  m.def("opo_ports", &opo_ports, py::arg("params"), py::arg("grid"));
  m.def("cavity_ports", &cavity_ports, py::arg("params"), py::arg("grid"), py::arg("label") = "cavity.loss");
  m.def("loss_ports", &loss_ports, py::arg("channel"), py::arg("grid"), py::arg("label_prefix") = "path.loss");
  m.def("phase_shift", &phase_shift, py::arg("signal_rad"), py::arg("idler_rad"), py::arg("grid"));
  m.def("compose", py::overload_cast<const NoisePortSet&, const ElementResponse&>(&compose), py::arg("upstream"),
        py::arg("element"));
  m.def("compose",
        py::overload_cast<const NoisePortSet&, const QuadratureTransfer&, const NoisePortSet&>(&compose),
        py::arg("upstream"), py::arg("transfer"), py::arg("new_ports"));

  py::class_<ReadoutConfig>(m, "ReadoutConfig")
      .def(py::init([](double ps, double pi, double gs, double gi, int sign) {
             ReadoutConfig c{ps, pi, gs, gi, sign};
             c.validate();
             return c;
           }),
           py::arg("signal_phase") = 0.0, py::arg("idler_phase") = 0.0, py::arg("signal_gain") = 1.0,
           py::arg("idler_gain") = 1.0, py::arg("combiner_sign") = -1)
      .def_readwrite("signal_phase", &ReadoutConfig::signal_phase)
      .def_readwrite("idler_phase", &ReadoutConfig::idler_phase)
      .def_readwrite("signal_gain", &ReadoutConfig::signal_gain)
      .def_readwrite("idler_gain", &ReadoutConfig::idler_gain)
      .def_readwrite("combiner_sign", &ReadoutConfig::combiner_sign);

  m.def("homodyne_variance",
        [](const SpectralCovariance& s, const ReadoutConfig& c) { return to_array(homodyne_variance(s, c)); },
        py::arg("covariance"), py::arg("config"));

  py::class_<SpectrumResult>(m, "SpectrumResult")
      .def_readonly("grid", &SpectrumResult::grid)
      .def_readonly("angles", &SpectrumResult::angles)
      .def_readonly("variance", &SpectrumResult::variance)
      .def_readonly("variance_db", &SpectrumResult::variance_db);

  m.def("angle_sweep",
        [](const SpectralCovariance& s, const std::vector<double>& angles, const ReadoutConfig& c) {
          return angle_sweep(s, angles, c);
        },
        py::arg("covariance"), py::arg("angles"), py::arg("config") = ReadoutConfig{});
  m.def("min_variance_angles",
        [](const SpectralCovariance& s, const ReadoutConfig& c) { return to_array(min_variance_angles(s, c)); },
        py::arg("covariance"), py::arg("config") = ReadoutConfig{});
  m.def("wiener_conditional",
        [](const SpectralCovariance& s, double phi_s) {
          const WienerResult w = wiener_conditional(s, phi_s);
          py::array_t<Complex> gain(w.gain.size());
          std::copy(w.gain.begin(), w.gain.end(), gain.mutable_data());
          return py::make_tuple(gain, to_array(w.variance), to_array(w.idler_phase));
        },
        py::arg("covariance"), py::arg("signal_phase") = 0.0,
        "Returns (gain, variance, idler_phase) arrays over the grid.");
  m.def("to_db", &to_db, py::arg("variance"));

  m.def("v_out_oracle", &v_out_oracle, py::arg("x"), py::arg("escape_efficiency"), py::arg("omega_over_gamma"));
  m.def("v_pm_oracle",
        [](double x, double eta, double w) {
          const PlusMinus v = v_pm_oracle(x, eta, w);
          return py::make_tuple(v.plus, v.minus);
        },
        py::arg("x"), py::arg("escape_efficiency"), py::arg("omega_over_gamma"));
  m.def("v_cond_oracle", &v_cond_oracle, py::arg("x"), py::arg("escape_efficiency"), py::arg("omega_over_gamma"),
        py::arg("pump_phase"));
  m.def("methods_loss_oracle",
        [](double x, double l, double w) {
          const PlusMinus v = methods_loss_oracle(x, l, w);
          return py::make_tuple(v.plus, v.minus);
        },
        py::arg("x"), py::arg("loss"), py::arg("omega_over_gamma"));
  m.def("pump_for_squeezing", &pump_for_squeezing, py::arg("target_db"), py::arg("loss"),
        py::arg("omega_over_gamma") = 0.0);

  py::class_<LossRecord>(m, "LossRecord")
      .def(py::init([](double p, double vp, double vm, double w) { return LossRecord{p, vp, vm, w}; }),
           py::arg("pump_power_mw"), py::arg("v_plus"), py::arg("v_minus"), py::arg("omega") = 0.0)
      .def_readwrite("pump_power_mw", &LossRecord::pump_power_mw)
      .def_readwrite("v_plus", &LossRecord::v_plus)
      .def_readwrite("v_minus", &LossRecord::v_minus)
      .def_readwrite("omega", &LossRecord::omega);

  py::class_<LossFitResult>(m, "LossFitResult")
      .def_readonly("loss", &LossFitResult::loss)
      .def_readonly("threshold_mw", &LossFitResult::threshold_mw)
      .def_readonly("threshold_fitted", &LossFitResult::threshold_fitted)
      .def_readonly("rms_residual_db", &LossFitResult::rms_residual_db)
      .def_readonly("pump_parameters", &LossFitResult::pump_parameters);

  m.def("fit_detection_loss",
        [](const std::vector<LossRecord>& records, std::optional<double> threshold_mw, double gamma_opo) {
          LossFitInput in;
          in.records = records;
          in.threshold_mw = threshold_mw;
          in.gamma_opo = gamma_opo;
          return fit_detection_loss(in);
        },
        py::arg("records"), py::arg("threshold_mw") = kDefaultThresholdMw, py::arg("gamma_opo") = kTwoPi * 12.1e6,
        "Pass threshold_mw=None to fit the threshold as well.");

  py::class_<ClfParams>(m, "ClfParams")
      .def(py::init([](double pump_phase, double clf_phase, double lo_phase, double x, double gamma_clf,
                       double gamma_in, double gamma_tot, double gain) {
             return ClfParams{pump_phase, clf_phase, lo_phase, x, gamma_clf, gamma_in, gamma_tot, gain};
           }),
           py::arg("pump_phase") = 0.0, py::arg("clf_phase") = 0.0, py::arg("lo_phase") = 0.0, py::arg("x") = 0.0,
           py::arg("gamma_clf") = 1.0, py::arg("gamma_in") = 1.0, py::arg("gamma_tot") = 1.0,
           py::arg("amplitude_gain") = 1.0);
  m.def("clf_reflection_error", &clf_reflection_error, py::arg("params"));
  m.def("clf_transmission_error", &clf_transmission_error, py::arg("params"), py::arg("locked") = false);

  py::class_<cli::ExperimentConfig>(m, "ExperimentConfig")
      .def("__eq__", [](const cli::ExperimentConfig& a, const cli::ExperimentConfig& b) { return a == b; })
      .def_property_readonly("pump_parameter", &cli::ExperimentConfig::pump_parameter);
  m.def("parse_config_text", &cli::parse_config_text, py::arg("text"), py::arg("source") = "<string>");
  m.def("serialize_config", &cli::serialize_config, py::arg("config"));
  m.def("simulate", &cli::simulate, py::arg("config"));
  m.def("spectrum_csv",
        [](const cli::ExperimentConfig& c, const std::vector<double>& angles) { return cli::spectrum_csv(c, angles); },
        py::arg("config"), py::arg("angles"));
  m.def("sweep_csv", &cli::sweep_csv, py::arg("config"));
  m.def("clf_csv", &cli::clf_csv, py::arg("config"));
}
