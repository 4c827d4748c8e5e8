#include "ergodic_lab/pdmp_bandit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ergodic::bandit {

BanditParams::BanditParams(double p_, double q_) : p(p_), q(q_) {
  if (!(0.0 < q && q < p && p < 1.0))
    throw std::invalid_argument("BanditParams: need 0 < q < p < 1");
}

double flow(double y, double dt, const BanditParams& params) {
  if (dt < 0.0) throw std::invalid_argument("flow: dt must be >= 0");
  return y * std::exp(-params.p * dt);
}

double integrated_rate(double y, double t, const BanditParams& params) {
  const double p = params.p, q = params.q;
  return q * ((y / p) * (1.0 - std::exp(-p * t)) + params.offset() * t);
}

double next_jump_time(double y, const BanditParams& params, double e) {
  if (e < 0.0) throw std::invalid_argument("next_jump_time: e must be >= 0");
  if (e == 0.0) return 0.0;
  const double base_rate = params.q * params.offset();  // rate floor
  // bracket: integrated_rate(t) >= base_rate * t
  double lo = 0.0;
  double hi = e / base_rate + 1.0;
  double t = std::min(e / params.jump_rate(y), hi);  // first-order guess
  for (int it = 0; it < 100; ++it) {
    const double r = integrated_rate(y, t, params) - e;
    if (std::abs(r) < 1e-12) return t;
    if (r > 0.0)
      hi = t;
    else
      lo = t;
    const double deriv = params.jump_rate(flow(y, t, params));
    double next = t - r / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
    t = next;
  }
  return t;
}

std::vector<PathEvent> simulate_path(const BanditParams& params, double y0,
                                     double T, RngStream& rng) {
  if (!(T > 0.0)) throw std::invalid_argument("simulate_path: T must be > 0");
  std::vector<PathEvent> path;
  path.push_back({0.0, y0});
  double t = 0.0, y = y0;
  for (;;) {
    const double dt = next_jump_time(y, params, rng.exponential());
    if (t + dt >= T) {
      path.push_back({T, flow(y, T - t, params)});
      return path;
    }
    t += dt;
    y = flow(y, dt, params) + 1.0;
    path.push_back({t, y});
  }
}

double state_at(const std::vector<PathEvent>& path, double t,
                const BanditParams& params) {
  auto it = std::upper_bound(
      path.begin(), path.end(), t,
      [](double tt, const PathEvent& ev) { return tt < ev.t; });
  if (it == path.begin()) return path.front().y;
  const PathEvent& ev = *(it - 1);
  return flow(ev.y, t - ev.t, params);
}

double mean_at_t(const BanditParams& params, double m0, double t) {
  if (t < 0.0) throw std::invalid_argument("mean_at_t: t must be >= 0");
  const double m_inf = params.stationary_mean();
  return m_inf + (m0 - m_inf) * std::exp(-(params.p - params.q) * t);
}

void couple_wasserstein_step(CoupledBanditPair& pair,
                             const BanditParams& params, RngStream& rng) {
  if (pair.coalesced) {
    const double dt = next_jump_time(pair.y, params, rng.exponential());
    pair.t += dt;
    pair.y = pair.y_tilde = flow(pair.y, dt, params) + 1.0;
    return;
  }
  const bool y_is_upper = pair.y >= pair.y_tilde;
  const double hi = y_is_upper ? pair.y : pair.y_tilde;
  const double lo = y_is_upper ? pair.y_tilde : pair.y;
  // total event rate along the flow equals the upper coordinate's rate
  const double dt = next_jump_time(hi, params, rng.exponential());
  double hi_now = flow(hi, dt, params);
  double lo_now = flow(lo, dt, params);
  pair.t += dt;
  const bool both = rng.uniform() * params.jump_rate(hi_now) <=
                    params.jump_rate(lo_now);
  hi_now += 1.0;
  if (both) lo_now += 1.0;
  pair.y = y_is_upper ? hi_now : lo_now;
  pair.y_tilde = y_is_upper ? lo_now : hi_now;
}

void couple_wasserstein_until(CoupledBanditPair& pair,
                              const BanditParams& params, double t_end,
                              RngStream& rng) {
  while (pair.t < t_end) {
    const double hi = std::max(pair.y, pair.y_tilde);
    const double dt = next_jump_time(hi, params, rng.exponential());
    if (pair.t + dt >= t_end) {
      const double rest = t_end - pair.t;
      pair.y = flow(pair.y, rest, params);
      pair.y_tilde = flow(pair.y_tilde, rest, params);
      pair.t = t_end;
      return;
    }
    // replay the event inside the step function with the same clock
    const bool y_is_upper = pair.y >= pair.y_tilde;
    double hi_now = flow(hi, dt, params);
    double lo_now = flow(std::min(pair.y, pair.y_tilde), dt, params);
    pair.t += dt;
    const bool both = rng.uniform() * params.jump_rate(hi_now) <=
                      params.jump_rate(lo_now);
    hi_now += 1.0;
    if (both) lo_now += 1.0;
    pair.y = y_is_upper ? hi_now : lo_now;
    pair.y_tilde = y_is_upper ? lo_now : hi_now;
  }
}

double coalescent_survival(double y, double s, double eps,
                           const BanditParams& params) {
  const double p = params.p, q = params.q;
  const double z = std::exp(p * s) - eps;
  if (!(z > 0.0)) return 1.0;
  return std::exp(-(q / p) *
                  (params.offset() * std::log(z) + (y + eps) * (1.0 - 1.0 / z)));
}

double coalescent_density(double y, double s, double eps,
                          const BanditParams& params) {
  const double p = params.p, q = params.q;
  const double z = std::exp(p * s) - eps;
  if (!(z > 0.0)) return 0.0;
  const double eps_term = (1.0 - p) / z + p * (y + eps) / (z * z);
  return (q * std::exp(p * s) / p) * eps_term *
         coalescent_survival(y, s, eps, params);
}

namespace {

// advance a single coordinate past its first jump (at local time
// t_jump) up to local time t_end, simulating any further jumps
double advance_after_first_jump(double y0, double t_jump, double t_end,
                                const BanditParams& params, RngStream& rng) {
  double y = flow(y0, t_jump, params) + 1.0;
  double t = t_jump;
  while (t < t_end) {
    const double dt = next_jump_time(y, params, rng.exponential());
    if (t + dt >= t_end) return flow(y, t_end - t, params);
    t += dt;
    y = flow(y, dt, params) + 1.0;
  }
  return y;
}

}  // namespace

bool couple_coalescent_attempt(CoupledBanditPair& pair,
                               const BanditParams& params, RngStream& rng) {
  if (pair.coalesced) return true;
  const bool y_is_lower = pair.y <= pair.y_tilde;
  const double lo = y_is_lower ? pair.y : pair.y_tilde;
  const double hi = y_is_lower ? pair.y_tilde : pair.y;
  const double eps = hi - lo;
  const double p = params.p;

  // T ~ first-jump law of the lower copy
  const double T = next_jump_time(lo, params, rng.exponential());
  if (eps == 0.0) {
    pair.t += T;
    pair.y = pair.y_tilde = flow(lo, T, params) + 1.0;
    pair.coalesced = true;
    pair.tau = pair.t;
    return true;
  }

  const double f0_T = coalescent_density(lo, T, 0.0, params);
  const double fe_T = coalescent_density(lo, T, eps, params);
  if (rng.uniform() * f0_T <= fe_T) {
    // maximal-coupling overlap: the lower copy jumps exactly onto the
    // flow of the upper one
    pair.t += T;
    pair.y = pair.y_tilde = flow(lo, T, params) + 1.0;
    pair.coalesced = true;
    pair.tau = pair.t;
    return true;
  }

  // residual part of the upper copy's mapped first-jump law
  double S;
  for (;;) {
    const double T_up = next_jump_time(hi, params, rng.exponential());
    S = std::log(eps + std::exp(p * T_up)) / p;
    const double f0_S = coalescent_density(lo, S, 0.0, params);
    const double fe_S = coalescent_density(lo, S, eps, params);
    if (rng.uniform() * fe_S > f0_S) break;
  }
  const double T_up = std::log(std::exp(p * S) - eps) / p;  // upper's jump
  const double t_att = std::max(T, T_up);
  const double lo_new = advance_after_first_jump(lo, T, t_att, params, rng);
  const double hi_new = advance_after_first_jump(hi, T_up, t_att, params, rng);
  pair.t += t_att;
  pair.y = y_is_lower ? lo_new : hi_new;
  pair.y_tilde = y_is_lower ? hi_new : lo_new;
  return false;
}

double solve_uM(const BanditParams& params) {
  if (!(params.p > params.q)) throw std::domain_error("solve_uM: need p > q");
  const double target = params.p / params.q;
  auto g = [&](double u) { return std::expm1(u) / u - target; };
  double lo = 1e-12, hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> laplace_log_psi(const BanditParams& params,
                                    const std::vector<double>& u_grid) {
  if (u_grid.empty() || u_grid.front() != 0.0)
    throw std::invalid_argument("laplace_log_psi: grid must start at 0");
  const double u_max = solve_uM(params);
  if (u_grid.back() >= u_max)
    throw std::domain_error("laplace_log_psi: grid reaches the singularity u_M");
  const double p = params.p, q = params.q, c = params.offset();
  auto integrand = [&](double u) {
    const double e1 = (u == 0.0) ? 1.0 : std::expm1(u) / u;
    return q * c * e1 / (p - q * e1);
  };
  std::vector<double> out(u_grid.size());
  out[0] = 0.0;  // psi(0) = 1
  for (std::size_t i = 1; i < u_grid.size(); ++i) {
    const int sub = 16;
    double v = out[i - 1];
    double u = u_grid[i - 1];
    const double h = (u_grid[i] - u_grid[i - 1]) / sub;
    for (int k = 0; k < sub; ++k) {
      const double k1 = integrand(u);
      const double k2 = integrand(u + 0.5 * h);
      const double k3 = k2;
      const double k4 = integrand(u + h);
      v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      u += h;
    }
    out[i] = v;
  }
  return out;
}

MomentTable moment_system(const BanditParams& params, int n_max,
                          const std::vector<double>& h_init, double T,
                          double dt) {
  if (n_max < 1) throw std::invalid_argument("moment_system: n_max must be >= 1");
  if (static_cast<int>(h_init.size()) != n_max)
    throw std::invalid_argument("moment_system: h_init size must equal n_max");
  // binomial table
  std::vector<std::vector<double>> binom(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    binom[n].assign(n + 1, 1.0);
    for (int k = 1; k < n; ++k)
      binom[n][k] = binom[n - 1][k - 1] + binom[n - 1][k];
  }
  const double gap = params.p - params.q;
  const double c = params.offset();
  // dh_n = -n(p-q) h_n + q sum_{k<=n-2} C(n,k) h_{k+1}
  //        + q c sum_{k<=n-1} C(n,k) h_k, with h_0 = 1
  auto rhs = [&](const std::vector<double>& h, std::vector<double>& dh) {
    for (int n = 1; n <= n_max; ++n) {
      double acc = -n * gap * h[n - 1];
      for (int k = 0; k <= n - 2; ++k) acc += params.q * binom[n][k] * h[k];
      acc += params.q * c;  // k = 0 term of the offset sum
      for (int k = 1; k <= n - 1; ++k)
        acc += params.q * c * binom[n][k] * h[k - 1];
      dh[n - 1] = acc;
    }
  };
  MomentTable table;
  table.h.assign(n_max, {});
  std::vector<double> h = h_init, k1(n_max), k2(n_max), k3(n_max), k4(n_max),
                      tmp(n_max);
  auto record = [&](double t) {
    table.times.push_back(t);
    for (int i = 0; i < n_max; ++i) table.h[i].push_back(h[i]);
  };
  record(0.0);
  const int n_steps = static_cast<int>(std::ceil(T / dt));
  const double step = T / n_steps;
  for (int s = 0; s < n_steps; ++s) {
    rhs(h, k1);
    for (int i = 0; i < n_max; ++i) tmp[i] = h[i] + 0.5 * step * k1[i];
    rhs(tmp, k2);
    for (int i = 0; i < n_max; ++i) tmp[i] = h[i] + 0.5 * step * k2[i];
    rhs(tmp, k3);
    for (int i = 0; i < n_max; ++i) tmp[i] = h[i] + step * k3[i];
    rhs(tmp, k4);
    for (int i = 0; i < n_max; ++i)
      h[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    record((s + 1) * step);
  }
  return table;
}

double tv_rate(const BanditParams& params) {
  const double p = params.p, q = params.q;
  return (p - q) / (2.0 + p * (p - q) / (q * (1.0 - p)));
}

SurvivalCurve tv_experiment(const BanditParams& params, const Sampler& mu0,
                            const Sampler& nu0, double T, double alpha,
                            int n_pairs, int n_grid, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("tv_experiment: alpha must lie in (0,1)");
  std::vector<double> taus;
  taus.reserve(n_pairs);
  const double t_switch = alpha * T;
  for (int r = 0; r < n_pairs; ++r) {
    CoupledBanditPair pair;
    pair.y = mu0(rng);
    pair.y_tilde = nu0(rng);
    couple_wasserstein_until(pair, params, t_switch, rng);
    while (!pair.coalesced && pair.t < T)
      couple_coalescent_attempt(pair, params, rng);
    taus.push_back(pair.coalesced ? pair.tau : kNeverCoalesced);
  }
  SurvivalCurve curve;
  curve.t.resize(n_grid);
  curve.survival.resize(n_grid);
  std::sort(taus.begin(), taus.end());
  for (int i = 0; i < n_grid; ++i) {
    const double t = T * i / (n_grid - 1);
    const auto it = std::upper_bound(taus.begin(), taus.end(), t);
    const std::size_t coalesced_by_t = static_cast<std::size_t>(it - taus.begin());
    curve.t[i] = t;
    curve.survival[i] =
        1.0 - static_cast<double>(coalesced_by_t) / static_cast<double>(n_pairs);
  }
  return curve;
}

}  // namespace ergodic::bandit
