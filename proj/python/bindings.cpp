#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <string>

#include "modadc/blind.hpp"
#include "modadc/config_io.hpp"
#include "modadc/errors.hpp"
#include "modadc/harness.hpp"
#include "modadc/modcore.hpp"
#include "modadc/oracle.hpp"
#include "modadc/signals.hpp"

namespace py = pybind11;
using namespace modadc;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw DomainError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["n_samples"] = s.n_samples;
  d["n_wrong"] = s.n_wrong;
  d["empirical_error_prob"] = s.empirical_error_prob;
  d["mean_sq_v_error"] = s.mean_sq_v_error;
  d["tail_mean_M"] = s.tail_mean_M;
  d["n_error_events"] = s.n_error_events;
  d["n_resolution_ups"] = s.n_resolution_ups;
  d["n_resolution_downs"] = s.n_resolution_downs;
  d["steady_state_index"] = s.steady_state_index ? py::object(py::int_(*s.steady_state_index)) : py::none();
  d["sigma_bar_p"] = s.sigma_bar_p;
  d["predicted_M_inf"] = s.predicted_M_inf;
  return d;
}

py::dict run_dict(const CodecRun& run) {
  const auto n = run.trace.size();
  std::vector<double> x(n), v(n), y(n), v_hat(n), v_hat_p(n), e_hat(n), alpha(n), M(n);
  py::array_t<bool> err(static_cast<py::ssize_t>(n)), up(static_cast<py::ssize_t>(n)),
      down(static_cast<py::ssize_t>(n)), steady(static_cast<py::ssize_t>(n)), reinit(static_cast<py::ssize_t>(n));
  auto e = err.mutable_unchecked<1>();
  auto u = up.mutable_unchecked<1>();
  auto dn = down.mutable_unchecked<1>();
  auto st = steady.mutable_unchecked<1>();
  auto ri = reinit.mutable_unchecked<1>();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = run.trace[i];
    x[i] = r.x, v[i] = r.v, y[i] = r.y, v_hat[i] = r.v_hat, v_hat_p[i] = r.v_hat_p;
    e_hat[i] = r.e_hat, alpha[i] = r.alpha, M[i] = r.M;
    const auto k = static_cast<py::ssize_t>(i);
    e(k) = r.flag_error, u(k) = r.flag_res_up, dn(k) = r.flag_res_down;
    st(k) = r.flag_steady, ri(k) = r.flag_reinit;
  }
  py::dict d;
  d["x"] = to_array(x);
  d["v"] = to_array(v);
  d["y"] = to_array(y);
  d["v_hat"] = to_array(v_hat);
  d["v_hat_p"] = to_array(v_hat_p);
  d["e_hat"] = to_array(e_hat);
  d["alpha"] = to_array(alpha);
  d["M"] = to_array(M);
  d["flag_error"] = err;
  d["flag_res_up"] = up;
  d["flag_res_down"] = down;
  d["flag_steady"] = steady;
  d["flag_reinit"] = reinit;
  d["summary"] = summary_dict(run.summary);
  return d;
}

}  // namespace

PYBIND11_MODULE(_modadc, m) {
  m.doc() = "Modulo ADC with blind adaptive unfolding";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DesignError>(m, "DesignError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("mod_reduce", &mod_reduce, py::arg("x"), py::arg("delta"));
  m.def("center_shift", &center_shift, py::arg("y"), py::arg("delta"));
  m.def(
      "fold_quantize",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, double alpha, int R,
         std::uint64_t seed, bool deterministic) {
        const auto xs = from_array(x);
        const ModuloRange range(R);
        DitherSource d(seed, deterministic ? DitherMode::Deterministic : DitherMode::Random);
        std::vector<double> y(xs.size()), v(xs.size()), z(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const auto f = fold_quantize(xs[i], alpha, range, d);
          y[i] = f.y, v[i] = f.v, z[i] = f.z;
        }
        return py::make_tuple(to_array(y), to_array(v), to_array(z));
      },
      py::arg("x"), py::arg("alpha"), py::arg("R"), py::arg("seed") = 0, py::arg("deterministic") = false,
      "Fold and quantize a signal at a fixed resolution. Returns (y, v, z).");

  m.def("q_function", &q_function, py::arg("x"));
  m.def("overload_bound", &overload_bound, py::arg("R"), py::arg("sigma2_lmmse"));
  m.def("distortion_bound", &distortion_bound, py::arg("alpha"), py::arg("p_overload"));
  m.def(
      "lmmse_filter",
      [](const std::vector<double>& autocorr, double alpha, int p) {
        if (autocorr.size() < static_cast<std::size_t>(p) + 1) {
          throw DomainError("lmmse_filter: need p + 1 autocorrelation values");
        }
        const auto sol = lmmse_filter([&](int l) { return autocorr[static_cast<std::size_t>(std::abs(l))]; },
                                      alpha, p);
        return py::make_tuple(to_array(sol.h_opt), sol.sigma2_lmmse);
      },
      py::arg("autocorr"), py::arg("alpha"), py::arg("p"),
      "Optimal predictor from R_x[0..p]. Returns (h_opt, sigma2_lmmse).");

  m.def(
      "gen_ma_gaussian",
      [](int L_x, std::size_t n, std::uint64_t seed) { return to_array(gen_ma_gaussian({L_x, seed}, n)); },
      py::arg("L_x"), py::arg("n"), py::arg("seed") = 0);
  m.def("theoretical_autocorr_ma", &theoretical_autocorr_ma, py::arg("L_x"), py::arg("ell"));

  py::class_<AdcConfig>(m, "AdcConfig")
      .def(py::init<>())
      .def_readwrite("R", &AdcConfig::R)
      .def_readwrite("alpha0", &AdcConfig::alpha0)
      .def_readwrite("p", &AdcConfig::p)
      .def_readwrite("h0", &AdcConfig::h0)
      .def_readwrite("kappa", &AdcConfig::kappa)
      .def_readwrite("L_s", &AdcConfig::L_s)
      .def_readwrite("N_s", &AdcConfig::N_s)
      .def_readwrite("eps_mu", &AdcConfig::eps_mu)
      .def_readwrite("delta_alpha", &AdcConfig::delta_alpha)
      .def_readwrite("beta", &AdcConfig::beta)
      .def_readwrite("seed", &AdcConfig::seed)
      .def_readwrite("steady_state_enabled", &AdcConfig::steady_state_enabled)
      .def_readwrite("adapt_mu", &AdcConfig::adapt_mu)
      .def_readwrite("freeze_alpha", &AdcConfig::freeze_alpha)
      .def("validate", &AdcConfig::validate);

  m.def(
      "run_codec",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& signal, const AdcConfig& cfg) {
        const auto xs = from_array(signal);
        CodecRun run;
        {
          py::gil_scoped_release release;
          run = run_codec(xs, cfg);
        }
        return run_dict(run);
      },
      py::arg("signal"), py::arg("config"),
      "Encode and decode a signal. Returns per-sample arrays plus a 'summary' dict.");

  m.def(
      "run_experiment1",
      [](std::optional<double> kappa, std::uint64_t seed, std::size_t n) {
        return run_dict(run_single(experiment1_config(kappa, seed, n)).run);
      },
      py::arg("kappa") = py::none(), py::arg("seed") = 0, py::arg("n") = 10000);
  m.def(
      "run_experiment2", [](std::uint64_t seed) { return run_dict(run_single(experiment2_config(seed)).run); },
      py::arg("seed") = 0);

  m.def(
      "predict_asymptotics",
      [](double kappa, int R, double sigma_bar) {
        const auto a = predict_asymptotics(kappa, R, sigma_bar);
        py::dict d;
        d["alpha_inf"] = a.alpha_inf;
        d["M_inf"] = a.M_inf;
        d["sigma_lmmse"] = a.sigma_lmmse;
        d["excess_rate"] = a.excess_rate;
        d["rate"] = a.rate;
        return d;
      },
      py::arg("kappa"), py::arg("R"), py::arg("sigma_bar_p"));
}
