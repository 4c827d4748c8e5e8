#include <cmath>
#include <stdexcept>

#include "ergodic_lab/kuramoto.hpp"
#include "experiment_util.hpp"

namespace ergodic::harness {

namespace {

namespace km = ergodic::kuramoto;

ExperimentReport run_fixed_point(const ExperimentConfig& cfg) {
  const double K = param(cfg, "K");
  const double r = km::solve_fixed_point(K);

  ExperimentReport report;
  report.summary = {{"K", K}, {"r", r}};
  if (K <= 1.0) {
    report.checks.push_back(check_le("subcritical_r_zero", std::abs(r), 0.0,
                                     "K <= 1 has only the uniform state"));
  } else {
    const double residual = std::abs(km::psi_function(2.0 * K * r) - r);
    report.summary.emplace_back("residual", residual);
    report.checks.push_back(check_le("fixed_point_residual", residual, 1e-10));
    if (K == 2.0)
      report.checks.push_back(check_flag("rK_in_window", r > 0.8 && r < 0.95,
                                         "r = " + format_double(r)));
  }
  const double psi0 = km::psi_function(0.0);
  const double d = 1e-5;
  const double psi_prime = (km::psi_function(d) - psi0) / d;
  report.summary.emplace_back("psi_at_0", psi0);
  report.summary.emplace_back("psi_prime_at_0", psi_prime);
  report.checks.push_back(check_le("psi_at_0", std::abs(psi0), 1e-6));
  report.checks.push_back(
      check_le("psi_prime_half", std::abs(psi_prime - 0.5), 1e-6));
  return report;
}

ExperimentReport run_spectrum(const ExperimentConfig& cfg) {
  const double K = param(cfg, "K");
  const int modes = iparam(cfg, "modes");
  const auto spec = km::linearized_spectrum_uniform(K, modes);

  ExperimentReport report;
  Table table{"spectrum", {"eigenvalue", "multiplicity"}, {}};
  for (const auto& [lam, mult] : spec)
    table.rows.push_back({lam, static_cast<double>(mult)});
  report.tables.push_back(std::move(table));
  report.summary = {{"leading", spec.front().first}};
  report.checks.push_back(check_le(
      "leading_eigenvalue", std::abs(spec.front().first + 0.5 * (1.0 - K)), 0.0));
  report.checks.push_back(
      check_le("second_block", std::abs(spec[1].first + 2.0), 0.0));
  return report;
}

ExperimentReport run_pde(const ExperimentConfig& cfg) {
  const double K = param(cfg, "K");
  const int modes = iparam(cfg, "modes");
  const double dt = param(cfg, "dt");
  ExperimentReport report;

  // uniform state must be bitwise invariant
  km::FourierDensity uniform = km::FourierDensity::uniform(modes);
  const auto evolved_uniform = km::solve_pde(uniform, K, 1.0, dt);
  double max_coef = 0.0;
  for (int k = 0; k < modes; ++k)
    max_coef = std::max({max_coef, std::abs(evolved_uniform.a[k]),
                         std::abs(evolved_uniform.b[k])});
  report.checks.push_back(check_le("uniform_exactly_invariant", max_coef, 0.0));

  const double rK = km::solve_fixed_point(K);
  const auto profile = km::profile_coefficients(K, rK, 0.0, modes);
  const auto evolved_profile =
      km::solve_pde(profile, K, param(cfg, "T_invariant"), dt);
  const double drift = km::l2_distance(evolved_profile, profile);
  report.checks.push_back(check_le("profile_invariant_1e6", drift, 1e-6));

  // perturbed uniform relaxes onto the synchronized manifold
  km::FourierDensity p = km::FourierDensity::uniform(modes);
  p.a[0] = param(cfg, "perturb");
  Table table{"relaxation", {"t", "l2_to_manifold"}, {}};
  const auto observer = [&](double t, const km::FourierDensity& state) {
    const double psi = std::atan2(state.b[0], state.a[0]);
    table.rows.push_back(
        {t, km::l2_distance(state,
                            km::profile_coefficients(K, rK, psi, modes))});
  };
  const int steps_per_obs =
      std::max(1, static_cast<int>(std::llround(1.0 / dt)));
  const auto final_state = km::solve_pde(p, K, param(cfg, "T_converge"), dt,
                                         steps_per_obs, observer);
  const double psi_final = std::atan2(final_state.b[0], final_state.a[0]);
  const double l2_final = km::l2_distance(
      final_state, km::profile_coefficients(K, rK, psi_final, modes));
  report.tables.push_back(std::move(table));
  report.checks.push_back(check_le("converges_to_profile", l2_final, 1e-4));

  // mass: the constant mode is not even stored, so integrate the output
  double mass = 0.0;
  const int n_quad = 512;
  for (int i = 0; i < n_quad; ++i)
    mass += final_state.value_at(km::kTwoPi * i / n_quad);
  mass *= km::kTwoPi / n_quad;
  report.checks.push_back(check_le("mass_conserved", std::abs(mass - 1.0), 1e-12));

  report.summary = {{"r_K", rK},
                    {"profile_drift", drift},
                    {"final_l2", l2_final},
                    {"final_psi", psi_final},
                    {"mass", mass}};
  return report;
}

ExperimentReport run_phase(const ExperimentConfig& cfg) {
  const double K = param(cfg, "K");
  const int N = iparam(cfg, "N");
  const double tau_f = param(cfg, "tau_f");
  const double dt = param(cfg, "dt");
  const int n_tau = iparam(cfg, "n_tau");
  const int replicas = iparam(cfg, "n_replicas") * cfg.replicas;

  const auto main_run = km::phase_diffusion_experiment(N, K, tau_f, replicas,
                                                       dt, n_tau, cfg.seed);

  // doubled system, shorter horizon, to test stability of the variance
  const double tau_cmp = param(cfg, "tau_cmp");
  const int rep2 = iparam(cfg, "n_replicas_2n");
  const auto big_run = km::phase_diffusion_experiment(
      2 * N, K, tau_cmp, rep2, dt, std::max(2, n_tau / 2), cfg.seed + 1);

  ExperimentReport report;
  Table table{"variance", {"tau", "var_psi"}, {}};
  for (std::size_t i = 0; i < main_run.tau.size(); ++i)
    table.rows.push_back({main_run.tau[i], main_run.var_psi[i]});
  report.tables.push_back(std::move(table));

  // variance at tau_cmp from both system sizes
  auto var_at = [&](const km::PhaseDiffusionResult& run, double tau) {
    for (std::size_t i = 0; i < run.tau.size(); ++i)
      if (std::abs(run.tau[i] - tau) < 1e-9) return run.var_psi[i];
    throw std::logic_error("tau_cmp not on the recording grid");
  };
  const double v1 = var_at(main_run, tau_cmp);
  const double v2 = var_at(big_run, tau_cmp);
  const int n1 = replicas - main_run.excluded;
  const int n2 = rep2 - big_run.excluded;
  const double se = std::sqrt(2.0 * v1 * v1 / std::max(1, n1 - 1) +
                              2.0 * v2 * v2 / std::max(1, n2 - 1));

  report.summary = {{"slope", main_run.slope},
                    {"r_squared", main_run.r_squared},
                    {"excluded", static_cast<double>(main_run.excluded)},
                    {"frac_near_manifold", main_run.frac_near_manifold},
                    {"var_N", v1},
                    {"var_2N", v2},
                    {"se_diff", se}};
  report.checks.push_back(check_flag(
      "variance_linear_in_tau",
      main_run.r_squared > 0.9 && main_run.slope > 0.0,
      "R^2 = " + format_double(main_run.r_squared)));
  report.checks.push_back(
      check_le("variance_stable_under_2N", std::abs(v1 - v2), 2.0 * se));
  report.checks.push_back(check_flag(
      "few_desynchronized", main_run.excluded <= replicas / 10));
  return report;
}

}  // namespace

std::vector<ExperimentDef> kuramoto_experiments() {
  return {
      {"kuramoto-fixed-point",
       "solve_fixed_point / psi_function",
       "r = Psi(2Kr) has only r = 0 below K = 1 and a synchronized root "
       "above",
       {{"K", 0.0, true, 0.0, 100.0, "coupling strength"}},
       run_fixed_point},
      {"kuramoto-spectrum",
       "linearized_spectrum_uniform",
       "the linearization at the uniform state has eigenvalues -(1-K)/2 "
       "and -k^2/2",
       {{"K", 0.5, false, 0.0, 100.0, "coupling strength"},
        {"modes", 8, false, 2, 1024, "modes emitted"}},
       run_spectrum},
      {"kuramoto-pde",
       "solve_pde / profile_coefficients",
       "stationary states are invariant and perturbed states relax onto "
       "the synchronized manifold",
       {{"K", 2.0, false, 0.0, 100.0, "coupling strength"},
        {"modes", 64, false, 8, 1024, "spectral truncation"},
        {"dt", 0.01, false, 1e-5, 0.1, "time step"},
        {"T_invariant", 10, false, 1, 1e3, "invariance horizon"},
        {"T_converge", 50, false, 1, 1e3, "relaxation horizon"},
        {"perturb", 0.01, false, 1e-6, 0.1, "initial mode-1 amplitude"}},
       run_pde},
      {"kuramoto-phase",
       "phase_diffusion_experiment",
       "the synchronization center diffuses on the timescale N with "
       "variance linear in rescaled time",
       {{"K", 2.0, false, 1.0 + 1e-9, 100.0, "coupling strength"},
        {"N", 500, false, 10, 1e6, "rotators"},
        {"tau_f", 0.5, false, 0.01, 100, "rescaled horizon"},
        {"dt", 0.001, false, 1e-5, 0.01, "Euler step (pinned)"},
        {"n_tau", 20, false, 2, 1e3, "recording grid"},
        {"n_replicas", 100, false, 2, 1e5, "replicas"},
        {"tau_cmp", 0.25, false, 0.01, 100, "comparison point"},
        {"n_replicas_2n", 48, false, 2, 1e5, "replicas at 2N"}},
       run_phase},
  };
}

}  // namespace ergodic::harness
