#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ergodic_lab/experiments.hpp"
#include "ergodic_lab/fbm_sde.hpp"
#include "ergodic_lab/kuramoto.hpp"
#include "ergodic_lab/mckean_waves.hpp"
#include "ergodic_lab/metrics.hpp"
#include "ergodic_lab/pdmp_bandit.hpp"
#include "ergodic_lab/rng.hpp"

namespace py = pybind11;
using namespace ergodic;

namespace {

metrics::EmpiricalMeasure cloud(std::vector<double> xs) {
  return metrics::EmpiricalMeasure::from_samples(std::move(xs));
}

waves::FluxDiffusionSpec make_spec(const std::function<double(double)>& B,
                                   const std::function<double(double)>& b,
                                   const std::function<double(double)>& s2) {
  waves::FluxDiffusionSpec spec;
  spec.B = B;
  spec.b = b;
  spec.sigma2 = s2;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_ergodic_lab, m) {
  m.doc() = "Stochastic long-time-behavior laboratory (native core)";

  // ---- metrics ----
  m.def(
      "wasserstein",
      [](std::vector<double> a, std::vector<double> b, double p) {
        return metrics::wasserstein_p(cloud(std::move(a)), cloud(std::move(b)),
                                      p);
      },
      py::arg("a"), py::arg("b"), py::arg("p") = 1.0,
      "Order-statistics W_p between two equal-size sample clouds.");
  m.def(
      "fit_exp_rate",
      [](const std::vector<double>& t, const std::vector<double>& v) {
        const auto fit = metrics::fit_exp_rate(t, v);
        return py::make_tuple(fit.rate, fit.intercept, fit.r_squared);
      },
      py::arg("times"), py::arg("values"),
      "Least-squares exponential rate; returns (rate, intercept, r2).");

  // ---- penalized bandit ----
  py::class_<bandit::BanditParams>(m, "BanditParams")
      .def(py::init<double, double>(), py::arg("p"), py::arg("q"))
      .def_readonly("p", &bandit::BanditParams::p)
      .def_readonly("q", &bandit::BanditParams::q)
      .def("stationary_mean", &bandit::BanditParams::stationary_mean);
  m.def("bandit_mean_at", &bandit::mean_at_t, py::arg("params"),
        py::arg("m0"), py::arg("t"));
  m.def("bandit_uM", &bandit::solve_uM, py::arg("params"));
  m.def("bandit_tv_rate", &bandit::tv_rate, py::arg("params"));
  m.def(
      "bandit_path",
      [](const bandit::BanditParams& params, double y0, double T,
         std::uint64_t seed) {
        RngStream rng = RngStream::derive(seed, 0);
        const auto path = bandit::simulate_path(params, y0, T, rng);
        std::vector<double> t, y;
        for (const auto& e : path) {
          t.push_back(e.t);
          y.push_back(e.y);
        }
        return py::make_tuple(t, y);
      },
      py::arg("params"), py::arg("y0"), py::arg("T"), py::arg("seed"),
      "Event-time trajectory; returns (times, states).");

  // ---- fractional Brownian motion ----
  m.def(
      "fbm_path",
      [](double hurst, int n_steps, double T, int dim, std::uint64_t seed) {
        RngStream rng = RngStream::derive(seed, 0);
        const auto path = fbm::generate_fbm(hurst, n_steps, T, dim, rng);
        return py::make_tuple(path.times, path.values);
      },
      py::arg("hurst"), py::arg("n_steps"), py::arg("T"), py::arg("dim") = 1,
      py::arg("seed") = 0,
      "Exact fBm sample; returns (times, values[dim][i]).");
  m.def("fbm_covariance", &fbm::fbm_covariance, py::arg("hurst"),
        py::arg("s"), py::arg("t"));
  m.def("evaluate_RT", &fbm::evaluate_RT, py::arg("g"),
        py::arg("support_len"), py::arg("T"), py::arg("t"), py::arg("hurst"));

  // ---- mean-field rotators ----
  m.def("kuramoto_psi", &kuramoto::psi_function, py::arg("x"));
  m.def("kuramoto_fixed_point", &kuramoto::solve_fixed_point, py::arg("K"));
  m.def(
      "kuramoto_order_parameter",
      [](const std::vector<double>& phases) {
        const auto [r, psi] = kuramoto::order_parameter(phases);
        return py::make_tuple(r, psi);
      },
      py::arg("phases"));
  m.def(
      "kuramoto_spectrum",
      [](double K, int modes) {
        return kuramoto::linearized_spectrum_uniform(K, modes);
      },
      py::arg("K"), py::arg("modes") = 8,
      "Eigenvalue/multiplicity pairs at the uniform state.");

  // ---- traveling waves ----
  m.def(
      "solve_wave",
      [](const std::function<double(double)>& B,
         const std::function<double(double)>& b,
         const std::function<double(double)>& sigma2,
         const std::vector<double>& x_grid) {
        const auto wave = waves::solve_wave(make_spec(B, b, sigma2), x_grid);
        return py::make_tuple(wave.phi.grid, wave.phi.values, wave.speed);
      },
      py::arg("B"), py::arg("b"), py::arg("sigma2"), py::arg("x_grid"),
      "Monotone wave profile; returns (grid, cdf values, speed).");
  m.def(
      "rankine_hugoniot",
      [](const std::function<double(double)>& B, double wm, double wp) {
        return waves::rankine_hugoniot(B, wm, wp);
      },
      py::arg("B"), py::arg("w_minus") = 0.0, py::arg("w_plus") = 1.0);
  m.def(
      "moment_condition",
      [](const std::function<double(double)>& B,
         const std::function<double(double)>& b,
         const std::function<double(double)>& sigma2) {
        const auto r = waves::moment_condition(make_spec(B, b, sigma2));
        return py::make_tuple(r.finite, r.value);
      },
      py::arg("B"), py::arg("b"), py::arg("sigma2"));

  // ---- experiment harness ----
  m.def("registry_json", &harness::registry_json,
        "All registered experiments as a JSON string.");
  m.def(
      "run_experiment_json",
      [](const std::string& name, const std::map<std::string, double>& params,
         std::uint64_t seed, int replicas) {
        const auto cfg = harness::make_config(name, params, seed, replicas);
        return harness::report_json(harness::run_experiment(cfg));
      },
      py::arg("name"), py::arg("params") = std::map<std::string, double>{},
      py::arg("seed") = 1, py::arg("replicas") = 1,
      "Runs a registered experiment and returns the report as JSON.");
}
