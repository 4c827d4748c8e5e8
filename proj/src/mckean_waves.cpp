#include "ergodic_lab/mckean_waves.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ergodic::waves {

double rankine_hugoniot(const std::function<double(double)>& B, double w_minus,
                        double w_plus) {
  if (w_minus == w_plus)
    throw std::domain_error("rankine_hugoniot: equal end states");
  return (B(w_plus) - B(w_minus)) / (w_plus - w_minus);
}

OleinikResult check_oleinik(const std::function<double(double)>& B,
                            double w_minus, double w_plus, int n_grid) {
  if (n_grid < 3) throw std::invalid_argument("check_oleinik: n_grid >= 3");
  const double s = rankine_hugoniot(B, w_minus, w_plus);
  const double B0 = B(w_minus);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n_grid - 1; ++i) {
    const double u =
        w_minus + (w_plus - w_minus) * i / static_cast<double>(n_grid - 1);
    margin = std::min(margin, B(u) - B0 - s * (u - w_minus));
  }
  return {margin > 0.0, margin};
}

namespace {

// logit-coordinate right-hand side of the wave ODE and its RK4 driver

struct LogitOde {
  const FluxDiffusionSpec& spec;
  double s, q;

  static void split(double lam, double& phi, double& one_minus) {
    if (lam >= 0.0) {
      const double e = std::exp(-lam);
      phi = 1.0 / (1.0 + e);
      one_minus = e / (1.0 + e);
    } else {
      const double e = std::exp(lam);
      phi = e / (1.0 + e);
      one_minus = 1.0 / (1.0 + e);
    }
  }

  double operator()(double lam) const {
    double phi, om;
    split(lam, phi, om);
    const double m = spec.B(phi) - s * phi - q;
    if (m <= 0.0) {
      if (phi > 1e-9 && om > 1e-9)
        throw std::runtime_error("solve_wave: nonpositive slope detected");
      return 0.0;  // frozen tail, below representable resolution
    }
    const double den = spec.sigma2(phi) * phi * om;
    if (!(den > 0.0))
      throw std::runtime_error("solve_wave: diffusion vanishes on (0,1)");
    return 2.0 * m / den;
  }
};

double rk4_span(const LogitOde& f, double lam0, double span, int n) {
  const double h = span / n;
  double lam = lam0;
  for (int i = 0; i < n; ++i) {
    const double k1 = f(lam);
    const double k2 = f(lam + 0.5 * h * k1);
    const double k3 = f(lam + 0.5 * h * k2);
    const double k4 = f(lam + h * k3);
    lam += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return lam;
}

double advance(const LogitOde& f, double lam0, double span) {
  int n = 8;
  double prev = rk4_span(f, lam0, span, n);
  for (;;) {
    n *= 2;
    const double cur = rk4_span(f, lam0, span, n);
    if (std::abs(cur - prev) < 1e-11 * std::max(1.0, std::abs(cur)) ||
        n >= 8192)
      return cur;
    prev = cur;
  }
}

double logistic(double lam) { return 0.5 * (1.0 + std::tanh(0.5 * lam)); }

}  // namespace

WaveProfile solve_wave(const FluxDiffusionSpec& spec,
                       std::span<const double> x_grid) {
  if (x_grid.size() < 2 || x_grid.front() > 0.0 || x_grid.back() < 0.0)
    throw std::invalid_argument("solve_wave: grid must straddle the anchor 0");
  const auto adm = check_oleinik(spec.B);
  if (!adm.admissible)
    throw std::invalid_argument("solve_wave: flux violates the entropy chord");
  const double s = rankine_hugoniot(spec.B, 0.0, 1.0);
  const double q = spec.B(0.0);
  const LogitOde ode{spec, s, q};

  const std::size_t n = x_grid.size();
  std::vector<double> values(n);
  std::size_t first_right = 0;
  while (first_right < n && x_grid[first_right] < 0.0) ++first_right;

  double x = 0.0, lam = 0.0;
  for (std::size_t i = first_right; i < n; ++i) {
    lam = advance(ode, lam, x_grid[i] - x);
    x = x_grid[i];
    values[i] = logistic(lam);
    if (i > first_right) values[i] = std::max(values[i], values[i - 1]);
  }
  x = 0.0;
  lam = 0.0;
  for (std::size_t k = first_right; k-- > 0;) {
    lam = advance(ode, lam, x_grid[k] - x);
    x = x_grid[k];
    values[k] = logistic(lam);
    if (k + 1 < first_right) values[k] = std::min(values[k], values[k + 1]);
  }
  if (first_right > 0 && first_right < n)
    values[first_right - 1] = std::min(values[first_right - 1], values[first_right]);

  WaveProfile out;
  out.speed = s;
  out.q_flux = q;
  out.phi = metrics::GridCDF::make(
      std::vector<double>(x_grid.begin(), x_grid.end()), std::move(values));
  return out;
}

namespace {

// one Simpson panel of unit width in the substituted variable
template <typename F>
double simpson_unit(F&& g, double v0) {
  constexpr int kIntervals = 128;
  const double h = 1.0 / kIntervals;
  double acc = g(v0) + g(v0 + 1.0);
  for (int i = 1; i < kIntervals; ++i)
    acc += g(v0 + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

MomentResult moment_condition(const FluxDiffusionSpec& spec, double quad_tol) {
  const auto adm = check_oleinik(spec.B);
  if (!adm.admissible)
    throw std::invalid_argument("moment_condition: inadmissible flux");
  const double s = rankine_hugoniot(spec.B, 0.0, 1.0);
  const double B0 = spec.B(0.0);
  auto margin = [&](double u) { return spec.B(u) - B0 - s * u; };

  // weight(u) is u near 0 and 1-u near 1; both substitutions read
  // u_of(v) with weight e^{-v}
  auto half = [&](auto u_of) -> MomentResult {
    double acc = 0.0;
    const double v_start = std::log(2.0);
    for (int k = 0; k < 700; ++k) {
      const double panel = simpson_unit(
          [&](double v) {
            const double w = std::exp(-v);  // distance to the endpoint
            const double u = u_of(w);
            const double m = margin(u);
            if (!(m > 0.0)) return 1e9;  // degenerate endpoint margin
            return w * spec.sigma2(u) / m * w;  // f(u) * |du/dv|
          },
          v_start + k);
      acc += panel;
      if (acc > 1e6) return {false, acc};
      if (panel < 0.5 * quad_tol && k > 3) return {true, acc};
    }
    return {false, acc};
  };

  const MomentResult left = half([](double w) { return w; });
  const MomentResult right = half([](double w) { return 1.0 - w; });
  // add the regular middle part, u in [1/2 - ..]: both substituted halves
  // already cover (0,1/2] and [1/2,1) entirely
  return {left.finite && right.finite, left.value + right.value};
}

double phase_shift_delta(const metrics::GridCDF& u0,
                         const metrics::GridCDF& phi) {
  auto saturated = [](const metrics::GridCDF& f) {
    return f.values.front() < 1e-3 && f.values.back() > 1.0 - 1e-3;
  };
  if (!saturated(u0) || !saturated(phi))
    throw std::domain_error("phase_shift_delta: CDF limits do not reach 0/1");
  std::vector<double> xs;
  xs.reserve(u0.grid.size() + phi.grid.size());
  xs.insert(xs.end(), u0.grid.begin(), u0.grid.end());
  xs.insert(xs.end(), phi.grid.begin(), phi.grid.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  // both CDFs are piecewise linear with nodes inside xs, so the
  // trapezoid rule on the merged grid is exact
  double acc = 0.0;
  double prev_x = xs.front();
  double prev_d = u0.evaluate(prev_x) - phi.evaluate(prev_x);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double d = u0.evaluate(xs[i]) - phi.evaluate(xs[i]);
    acc += 0.5 * (d + prev_d) * (xs[i] - prev_x);
    prev_x = xs[i];
    prev_d = d;
  }
  return acc;
}

ParticleTrajectory simulate_ranked_from(const FluxDiffusionSpec& spec,
                                        std::vector<double> positions,
                                        std::span<const std::uint64_t> stream_ids,
                                        std::span<const double> record_times,
                                        double dt, std::uint64_t seed) {
  const std::size_t N = positions.size();
  if (N < 2) throw std::invalid_argument("simulate_ranked_from: N >= 2");
  if (stream_ids.size() != N)
    throw std::invalid_argument("simulate_ranked_from: stream id count");
  if (!(dt > 0.0)) throw std::invalid_argument("simulate_ranked_from: dt > 0");

  std::vector<RngStream> streams;
  streams.reserve(N);
  for (std::uint64_t id : stream_ids) streams.push_back(RngStream::derive(seed, id));

  std::vector<std::size_t> idx(N);
  std::vector<std::size_t> rank(N);
  ParticleTrajectory out;
  double t = 0.0;
  for (double rt : record_times) {
    if (rt < t - 1e-12)
      throw std::invalid_argument("simulate_ranked_from: unsorted record times");
    const double span = std::max(0.0, rt - t);
    const int n_steps =
        span > 0.0 ? std::max(1, static_cast<int>(std::llround(span / dt))) : 0;
    const double h = n_steps ? span / n_steps : 0.0;
    const double sqrt_h = std::sqrt(h);
    for (int step = 0; step < n_steps; ++step) {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return positions[a] < positions[b];
      });
      for (std::size_t k = 0; k < N; ++k) rank[idx[k]] = k;
      for (std::size_t j = 0; j < N; ++j) {
        const double r = (rank[j] + 0.5) / static_cast<double>(N);
        positions[j] += spec.b(r) * h +
                        std::sqrt(spec.sigma2(r)) * sqrt_h * streams[j].normal();
      }
    }
    t = rt;
    std::vector<double> snap = positions;
    std::sort(snap.begin(), snap.end());
    out.times.push_back(rt);
    out.snapshots.push_back(std::move(snap));
  }
  return out;
}

ParticleTrajectory simulate_ranked_particles(const FluxDiffusionSpec& spec,
                                             int N, const Sampler& init,
                                             std::span<const double> record_times,
                                             double dt, std::uint64_t seed) {
  if (N < 2) throw std::invalid_argument("simulate_ranked_particles: N >= 2");
  std::vector<double> positions(N);
  std::vector<std::uint64_t> ids(N);
  for (int j = 0; j < N; ++j) {
    ids[j] = static_cast<std::uint64_t>(j);
    RngStream init_rng = RngStream::derive(seed ^ 0x77ddf1a3c0ffee11ULL, ids[j]);
    positions[j] = init(init_rng);
  }
  return simulate_ranked_from(spec, std::move(positions), ids, record_times, dt,
                              seed);
}

WpTable check_contraction(const FluxDiffusionSpec& spec, const Sampler& u0,
                          const Sampler& v0, double p,
                          std::span<const double> t_grid, int N, double dt,
                          std::uint64_t seed) {
  if (N < 2) throw std::invalid_argument("check_contraction: N >= 2");
  // the two clouds reuse the same underlying uniforms so that equal
  // samplers give equal clouds; independence is not needed under the
  // order-statistics coupling
  RngStream init_u = RngStream::derive(seed, 1);
  RngStream init_v = RngStream::derive(seed, 1);
  std::vector<double> xs(N), ys(N);
  for (int j = 0; j < N; ++j) xs[j] = u0(init_u);
  for (int j = 0; j < N; ++j) ys[j] = v0(init_v);
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());

  RngStream noise = RngStream::derive(seed, 2);
  WpTable out;
  double t = 0.0;
  for (double rt : t_grid) {
    if (rt < t - 1e-12)
      throw std::invalid_argument("check_contraction: unsorted time grid");
    const double span = std::max(0.0, rt - t);
    const int n_steps =
        span > 0.0 ? std::max(1, static_cast<int>(std::llround(span / dt))) : 0;
    const double h = n_steps ? span / n_steps : 0.0;
    const double sqrt_h = std::sqrt(h);
    for (int step = 0; step < n_steps; ++step) {
      for (int k = 0; k < N; ++k) {
        const double r = (k + 0.5) / static_cast<double>(N);
        const double inc =
            spec.b(r) * h + std::sqrt(spec.sigma2(r)) * sqrt_h * noise.normal();
        xs[k] += inc;
        ys[k] += inc;
      }
      std::sort(xs.begin(), xs.end());
      std::sort(ys.begin(), ys.end());
    }
    t = rt;
    out.times.push_back(rt);
    out.wp.push_back(
        metrics::wasserstein_p(metrics::EmpiricalMeasure::from_samples(xs),
                               metrics::EmpiricalMeasure::from_samples(ys), p));
  }
  return out;
}

double dissipation_rate(const metrics::GridCDF& u, const metrics::GridCDF& v,
                        const FluxDiffusionSpec& spec, double p,
                        int n_quantiles) {
  if (p < 2.0) throw std::invalid_argument("dissipation_rate: p >= 2");
  if (n_quantiles < 8)
    throw std::invalid_argument("dissipation_rate: n_quantiles >= 8");
  const double n = n_quantiles;
  const double h = 2.0 / n;  // smoothing kernel width
  constexpr int kWindowNodes = 9;
  auto smoothed = [&](const metrics::GridCDF& f, double w) {
    double lo = std::max(w - 0.5 * h, 1e-9);
    double hi = std::min(w + 0.5 * h, 1.0 - 1e-9);
    double acc = 0.0;
    for (int j = 0; j < kWindowNodes; ++j)
      acc += metrics::pseudo_inverse(
          f, lo + (hi - lo) * (j + 0.5) / kWindowNodes);
    return acc / kWindowNodes;
  };

  const double d = 0.5 * h;  // centered-difference offset
  double acc = 0.0;
  for (int i = 1; i < n_quantiles; ++i) {
    const double w = i / n;
    const double uc = smoothed(u, w), vc = smoothed(v, w);
    const double du = (smoothed(u, w + d) - smoothed(u, w - d)) / (2.0 * d);
    const double dv = (smoothed(v, w + d) - smoothed(v, w - d)) / (2.0 * d);
    if (!(du > 0.0) || !(dv > 0.0))
      throw std::domain_error("dissipation_rate: non-monotone quantile input");
    const double diff = du - dv;
    const double gap = std::abs(uc - vc);
    const double weight = (p == 2.0) ? 1.0 : std::pow(gap, p - 2.0);
    acc += spec.sigma2(w) * weight * diff * diff / (du * dv);
  }
  return -0.5 * p * (p - 1.0) * acc / n;
}

ConvergenceTable convergence_to_wave(const FluxDiffusionSpec& spec,
                                     const Sampler& u0,
                                     std::span<const double> t_schedule, int N,
                                     double dt,
                                     std::span<const double> p_orders,
                                     std::uint64_t seed) {
  if (!moment_condition(spec).finite)
    throw std::invalid_argument("convergence_to_wave: infinite first moment");

  std::vector<double> x_grid;
  for (double x = -40.0; x <= 40.0 + 1e-9; x += 0.05) x_grid.push_back(x);
  const WaveProfile wave = solve_wave(spec, x_grid);

  ParticleTrajectory traj =
      simulate_ranked_particles(spec, N, u0, t_schedule, dt, seed);
  for (double x : traj.snapshots.front())
    if (std::abs(x) > 1e6)
      throw std::invalid_argument("convergence_to_wave: heavy-tailed start");

  const metrics::GridCDF emp0 = metrics::empirical_cdf(
      metrics::EmpiricalMeasure::from_samples(traj.snapshots.front()));
  const double delta = phase_shift_delta(emp0, wave.phi);

  ConvergenceTable out;
  out.times = traj.times;
  out.orders.assign(p_orders.begin(), p_orders.end());
  out.delta = delta;
  out.speed = wave.speed;
  {
    metrics::GridCDF shifted = wave.phi;
    for (double& x : shifted.grid) x -= delta;
    out.delta_residual = phase_shift_delta(emp0, shifted);
  }
  out.wq.assign(p_orders.size(), std::vector<double>(traj.times.size(), 0.0));
  out.delta_t.resize(traj.times.size());
  for (std::size_t it = 0; it < traj.times.size(); ++it) {
    // the empirical mean is a martingale with variance t/N, so the
    // comparison wave is re-anchored to the expectation of u_t, which
    // the limit equation conserves exactly
    metrics::GridCDF target = wave.phi;
    for (double& x : target.grid) x += wave.speed * traj.times[it];
    const auto emp =
        metrics::EmpiricalMeasure::from_samples(traj.snapshots[it]);
    const double dt_shift =
        phase_shift_delta(metrics::empirical_cdf(emp), target);
    for (double& x : target.grid) x -= dt_shift;
    out.delta_t[it] = dt_shift;
    for (std::size_t iq = 0; iq < p_orders.size(); ++iq)
      out.wq[iq][it] = metrics::wasserstein_p(emp, target, p_orders[iq]);
  }
  return out;
}

}  // namespace ergodic::waves
