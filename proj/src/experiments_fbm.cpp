#include <atomic>
#include <cmath>

#include "ergodic_lab/fbm_sde.hpp"
#include "ergodic_lab/metrics.hpp"
#include "experiment_util.hpp"

namespace ergodic::harness {

namespace {

constexpr int kChunk = 1024;

ExperimentReport run_fbm_check(const ExperimentConfig& cfg) {
  const double H = param(cfg, "hurst");
  const int n = iparam(cfg, "n_steps");
  const double T = param(cfg, "T");
  const int total = iparam(cfg, "n_paths") * cfg.replicas;

  // covariance probes (grid indices, 1-based)
  const std::vector<std::pair<int, int>> probes = {
      {n / 4, n / 4}, {n / 2, n / 2}, {n, n}, {n / 4, 3 * n / 4}, {n / 2, n}};

  const int n_chunks = (total + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> var_sum(n_chunks, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> cov_sum(n_chunks,
                                           std::vector<double>(probes.size(), 0.0));
  std::vector<std::vector<double>> cov_sumsq = cov_sum;
  bool cholesky = false;
  for_each_replica(n_chunks, [&](int ci) {
    fbm::FbmGenerator gen(H, n, T);
    if (gen.used_cholesky()) cholesky = true;
    for (int i = ci * kChunk; i < std::min(total, (ci + 1) * kChunk); ++i) {
      RngStream rng = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(i));
      const fbm::FBMPath path = gen.sample_path(1, rng);
      const auto& v = path.values[0];
      for (int k = 1; k <= n; ++k) var_sum[ci][k - 1] += v[k] * v[k];
      for (std::size_t pr = 0; pr < probes.size(); ++pr) {
        const double prod = v[probes[pr].first] * v[probes[pr].second];
        cov_sum[ci][pr] += prod;
        cov_sumsq[ci][pr] += prod * prod;
      }
    }
  });

  ExperimentReport report;
  Table var_table{"variance", {"t", "sample_var", "exact_var"}, {}};
  std::vector<double> log_t(n), log_var(n);
  for (int k = 1; k <= n; ++k) {
    double s = 0.0;
    for (int ci = 0; ci < n_chunks; ++ci) s += var_sum[ci][k - 1];
    const double t = T * k / n;
    const double sv = s / total;
    var_table.rows.push_back({t, sv, std::pow(t, 2.0 * H)});
    log_t[k - 1] = std::log(t);
    log_var[k - 1] = std::log(sv);
  }
  report.tables.push_back(std::move(var_table));

  Table cov_table{"covariance", {"s", "t", "sample_cov", "exact_cov", "se"}, {}};
  double worst_z = 0.0;
  for (std::size_t pr = 0; pr < probes.size(); ++pr) {
    double s = 0.0, s2 = 0.0;
    for (int ci = 0; ci < n_chunks; ++ci) {
      s += cov_sum[ci][pr];
      s2 += cov_sumsq[ci][pr];
    }
    const double mc = s / total;
    const double se = std::sqrt(std::max(1e-300, s2 / total - mc * mc) / total);
    const double ts = T * probes[pr].first / n;
    const double tt = T * probes[pr].second / n;
    const double exact = fbm::fbm_covariance(H, ts, tt);
    worst_z = std::max(worst_z, std::abs(mc - exact) / se);
    cov_table.rows.push_back({ts, tt, mc, exact, se});
  }
  report.tables.push_back(std::move(cov_table));

  // slope of log variance against log time recovers 2H
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < n; ++k) {
    sx += log_t[k];
    sy += log_var[k];
    sxx += log_t[k] * log_t[k];
    sxy += log_t[k] * log_var[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double H_hat = 0.5 * slope;

  report.summary = {{"hurst_hat", H_hat}, {"worst_cov_z", worst_z}};
  report.checks.push_back(check_le("covariance_within_3se", worst_z, 3.0));
  report.checks.push_back(check_le("hurst_recovered", std::abs(H_hat - H), 0.02));
  report.checks.push_back(
      check_flag("circulant_embedding_psd", !cholesky));
  return report;
}

ExperimentReport run_fsde_lyapunov(const ExperimentConfig& cfg) {
  const double H = param(cfg, "hurst");
  const double rho = param(cfg, "rho");
  const int total = iparam(cfg, "n_paths") * cfg.replicas;
  const int n_steps = iparam(cfg, "n_steps");
  const double T = param(cfg, "T");

  fbm::FSDEModel model;
  model.dim = 2;
  model.drift = fbm::rotation_drift(rho);
  model.diffusion = [](const fbm::Vec&) {
    return fbm::Mat{1.0, 0.0, 0.0, 1.0};
  };
  auto V = [](const fbm::Vec& x) {
    double n2 = 0.0;
    for (double v : x) n2 += v * v;
    return 1.0 + n2;
  };

  const int n_record = 21;
  const auto rec_times = linspace(0.0, T, n_record);
  std::vector<int> rec_idx(n_record);
  for (int r = 0; r < n_record; ++r)
    rec_idx[r] = static_cast<int>(std::llround(rec_times[r] / T * n_steps));
  const int idx5 = static_cast<int>(std::llround(0.5 * n_steps));

  const int n_chunks = (total + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> v_sum(n_chunks, std::vector<double>(n_record, 0.0));
  std::vector<std::vector<double>> abs5(n_chunks), abs10(n_chunks);
  std::atomic<int> overflows{0};
  for_each_replica(n_chunks, [&](int ci) {
    fbm::FbmGenerator gen(H, n_steps, T);
    for (int i = ci * kChunk; i < std::min(total, (ci + 1) * kChunk); ++i) {
      RngStream rng = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(i));
      const fbm::FBMPath path = gen.sample_path(2, rng);
      try {
        const auto traj = fbm::integrate_fsde(model, {2.0, 0.0}, path);
        for (int r = 0; r < n_record; ++r) v_sum[ci][r] += V(traj[rec_idx[r]]);
        abs5[ci].push_back(std::hypot(traj[idx5][0], traj[idx5][1]));
        abs10[ci].push_back(std::hypot(traj.back()[0], traj.back()[1]));
      } catch (const std::runtime_error&) {
        ++overflows;
      }
    }
  });

  ExperimentReport report;
  Table table{"lyapunov_moment", {"t", "mean_V"}, {}};
  double sup_v = 0.0;
  for (int r = 0; r < n_record; ++r) {
    double s = 0.0;
    for (int ci = 0; ci < n_chunks; ++ci) s += v_sum[ci][r];
    const double mean_v = s / total;
    sup_v = std::max(sup_v, mean_v);
    table.rows.push_back({rec_times[r], mean_v});
  }
  report.tables.push_back(std::move(table));

  std::vector<double> m5, m10;
  for (int ci = 0; ci < n_chunks; ++ci) {
    m5.insert(m5.end(), abs5[ci].begin(), abs5[ci].end());
    m10.insert(m10.end(), abs10[ci].begin(), abs10[ci].end());
  }
  const double w1 = metrics::wasserstein_p(
      metrics::EmpiricalMeasure::from_samples(m5),
      metrics::EmpiricalMeasure::from_samples(m10), 1.0);

  RngStream lyap_rng = RngStream::derive(cfg.seed, 0x10ad);
  const auto lyap = fbm::check_lyapunov_contraction(
      model, {V, 1.0, std::min(0.6, H - 0.01)}, H, iparam(cfg, "lyap_paths"),
      256, param(cfg, "max_radius"), lyap_rng);

  report.summary = {{"sup_mean_V", sup_v},
                    {"w1_abs_5_10", w1},
                    {"rho_hat", lyap.rho_hat},
                    {"c_hat", lyap.c_hat},
                    {"violation_rate", lyap.violation_rate},
                    {"overflows", static_cast<double>(overflows.load())}};
  report.checks.push_back(check_flag(
      "moment_bounded", overflows == 0 && std::isfinite(sup_v) && sup_v < 1e3));
  report.checks.push_back(check_le("w1_marginals_5_vs_10", w1, 0.05));
  report.checks.push_back(
      check_flag("lyapunov_feasible", lyap.feasible && lyap.rho_hat < 1.0,
                 "rho_hat = " + format_double(lyap.rho_hat)));
  return report;
}

ExperimentReport run_rt_operator(const ExperimentConfig& cfg) {
  ExperimentReport report;

  // H = 1/2, T = 0, g = 1 on [-1, 0] collapses to log((t+1)/t)
  Table table{"closed_form", {"t", "rt", "exact"}, {}};
  double worst_closed = 0.0;
  auto one = [](double) { return 1.0; };
  for (double t : {0.5, 1.0, 2.0}) {
    const double rt = fbm::evaluate_RT(one, 1.0, 0.0, t, 0.5);
    const double exact = std::log((t + 1.0) / t);
    worst_closed = std::max(worst_closed, std::abs(rt - exact));
    table.rows.push_back({t, rt, exact});
  }
  report.tables.push_back(std::move(table));

  const double H = param(cfg, "hurst");
  const double T = param(cfg, "T");
  const double t = param(cfg, "t");
  const double support = param(cfg, "support");
  auto g = [](double s) { return std::cos(s); };
  const double rt = fbm::evaluate_RT(g, support, T, t, H);

  // brute-force composite Simpson oracle
  const int m = 1 << 20;
  const double h = support / m;
  const double pref = std::pow(t, 0.5 - H);
  auto f = [&](double s) {
    return pref * std::pow(T - s, H - 0.5) / (t + T - s) * g(s);
  };
  double acc = f(-support) + f(0.0);
  for (int i = 1; i < m; ++i)
    acc += f(-support + i * h) * (i % 2 ? 4.0 : 2.0);
  const double brute = acc * h / 3.0;

  report.summary = {{"closed_form_error", worst_closed},
                    {"rt_generic", rt},
                    {"brute_force", brute}};
  report.checks.push_back(check_le("closed_form_1e10", worst_closed, 1e-10));
  report.checks.push_back(
      check_le("generic_vs_brute_force", std::abs(rt - brute), 1e-8));
  return report;
}

}  // namespace

std::vector<ExperimentDef> fbm_experiments() {
  return {
      {"fbm-check",
       "FbmGenerator / fbm_covariance",
       "circulant-embedding samples reproduce the exact fBm covariance",
       {{"hurst", 0.7, false, 0.05, 0.95, "Hurst index"},
        {"n_steps", 16, false, 4, 4096, "grid steps"},
        {"T", 1, false, 0.01, 1e3, "horizon"},
        {"n_paths", 100000, false, 100, 1e9, "paths"}},
       run_fbm_check},
      {"fsde-lyapunov",
       "integrate_fsde / check_lyapunov_contraction",
       "the rotation-drift fractional SDE keeps bounded moments and "
       "admits an empirical Lyapunov contraction",
       {{"hurst", 0.7, false, 0.55, 0.95, "Hurst index"},
        {"rho", 3, false, 0, 100, "rotation strength"},
        {"n_paths", 2000, false, 10, 1e7, "paths"},
        {"n_steps", 1000, false, 10, 1e6, "Euler steps"},
        {"T", 10, false, 1, 1e3, "horizon"},
        {"lyap_paths", 400, false, 40, 1e6, "contraction sample"},
        {"max_radius", 20, false, 1, 1e4, "radial grid extent"}},
       run_fsde_lyapunov},
      {"rt-operator",
       "evaluate_RT",
       "the memory operator quadrature matches closed form and brute force",
       {{"hurst", 0.7, false, 0.05, 0.95, "Hurst index"},
        {"T", 1, false, 0.01, 1e3, "restart time"},
        {"t", 1.5, false, 1e-3, 1e3, "evaluation time"},
        {"support", 2, false, 0.1, 100, "support length of g"}},
       run_rt_operator},
  };
}

}  // namespace ergodic::harness
