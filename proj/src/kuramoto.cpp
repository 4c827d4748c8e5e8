#include "ergodic_lab/kuramoto.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ergodic_lab/metrics.hpp"

namespace ergodic::kuramoto {

double wrap_angle(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

RotatorEnsemble RotatorEnsemble::make(std::vector<double> phases,
                                      double coupling) {
  if (coupling < 0.0)
    throw std::invalid_argument("RotatorEnsemble: coupling must be >= 0");
  for (auto& p : phases) p = wrap_angle(p);
  return RotatorEnsemble{std::move(phases), coupling};
}

std::pair<double, double> order_parameter(std::span<const double> phases) {
  if (phases.empty())
    throw std::invalid_argument("order_parameter: empty ensemble");
  double c = 0.0, s = 0.0;
  for (double phi : phases) {
    c += std::cos(phi);
    s += std::sin(phi);
  }
  c /= static_cast<double>(phases.size());
  s /= static_cast<double>(phases.size());
  const double r = std::hypot(c, s);
  const double psi = wrap_angle(std::atan2(s, c));
  return {r, psi};
}

namespace {

constexpr int kQuadNodes = 4096;

// trapezoid rule on the torus (spectrally accurate for smooth periodic f)
template <typename F>
double torus_quad(F&& f) {
  double acc = 0.0;
  for (int i = 0; i < kQuadNodes; ++i) acc += f(kTwoPi * i / kQuadNodes);
  return acc * kTwoPi / kQuadNodes;
}

}  // namespace

double psi_function(double x) {
  if (x < 0.0) throw std::invalid_argument("psi_function: x must be >= 0");
  // weight e^{x cos t} rescaled by e^{-x} to stay bounded
  const double num =
      torus_quad([x](double t) { return std::cos(t) * std::exp(x * (std::cos(t) - 1.0)); });
  const double den =
      torus_quad([x](double t) { return std::exp(x * (std::cos(t) - 1.0)); });
  return num / den;
}

double solve_fixed_point(double K) {
  if (K < 0.0) throw std::invalid_argument("solve_fixed_point: K must be >= 0");
  if (K <= 1.0) return 0.0;
  auto g = [K](double r) { return psi_function(2.0 * K * r) - r; };
  double lo = 1e-12, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> stationary_profile(double K, double r, double psi,
                                       std::span<const double> grid) {
  const double x = 2.0 * K * r;
  const double mass =
      torus_quad([x](double t) { return std::exp(x * (std::cos(t) - 1.0)); });
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out[i] = std::exp(x * (std::cos(grid[i] - psi) - 1.0)) / mass;
  return out;
}

FourierDensity FourierDensity::uniform(int modes) {
  FourierDensity p;
  p.a.assign(modes, 0.0);
  p.b.assign(modes, 0.0);
  return p;
}

double FourierDensity::value_at(double theta) const {
  double v = 1.0 / kTwoPi;
  for (int k = 1; k <= modes(); ++k)
    v += a[k - 1] * std::cos(k * theta) + b[k - 1] * std::sin(k * theta);
  return v;
}

FourierDensity profile_coefficients(double K, double r, double psi, int modes) {
  const double x = 2.0 * K * r;
  const double mass =
      torus_quad([x](double t) { return std::exp(x * (std::cos(t) - 1.0)); });
  auto q = [&](double t) {
    return std::exp(x * (std::cos(t - psi) - 1.0)) / mass;
  };
  FourierDensity p = FourierDensity::uniform(modes);
  for (int k = 1; k <= modes; ++k) {
    p.a[k - 1] =
        torus_quad([&](double t) { return q(t) * std::cos(k * t); }) / M_PI;
    p.b[k - 1] =
        torus_quad([&](double t) { return q(t) * std::sin(k * t); }) / M_PI;
  }
  return p;
}

double l2_distance(const FourierDensity& p, const FourierDensity& q) {
  if (p.modes() != q.modes())
    throw std::invalid_argument("l2_distance: mode counts differ");
  double acc = 0.0;
  for (int k = 0; k < p.modes(); ++k) {
    const double da = p.a[k] - q.a[k], db = p.b[k] - q.b[k];
    acc += da * da + db * db;
  }
  return std::sqrt(M_PI * acc);
}

std::vector<std::pair<double, int>> linearized_spectrum_uniform(double K,
                                                                int modes) {
  if (modes < 2)
    throw std::invalid_argument("linearized_spectrum_uniform: modes >= 2");
  std::vector<std::pair<double, int>> spec;
  spec.emplace_back(-0.5 * (1.0 - K), 2);
  for (int k = 2; k <= modes; ++k) spec.emplace_back(-0.5 * k * k, 2);
  return spec;
}

void pde_step(FourierDensity& p, double K, double dt) {
  const int M = p.modes();
  const double u0 = 1.0 / kTwoPi;
  // single-mode interaction field J*p = c cos(theta) + s sin(theta)
  const double c = K * M_PI * p.b[0];
  const double s = -K * M_PI * p.a[0];
  // product p * (J*p), modes 0..M+1
  std::vector<double> A(M + 2, 0.0), B(M + 2, 0.0);
  A[1] += u0 * c;
  B[1] += u0 * s;
  for (int k = 1; k <= M; ++k) {
    const double ak = p.a[k - 1], bk = p.b[k - 1];
    A[k + 1] += 0.5 * (c * ak - s * bk);
    B[k + 1] += 0.5 * (s * ak + c * bk);
    A[k - 1] += 0.5 * (c * ak + s * bk);
    if (k >= 2) {
      B[k - 1] += 0.5 * (c * bk - s * ak);
    }
  }
  // advection term -d/dtheta (p J*p), semi-implicit Laplacian
  for (int m = 1; m <= M; ++m) {
    const double n_cos = -static_cast<double>(m) * B[m];
    const double n_sin = static_cast<double>(m) * A[m];
    const double denom = 1.0 + 0.5 * dt * m * m;
    p.a[m - 1] = (p.a[m - 1] + dt * n_cos) / denom;
    p.b[m - 1] = (p.b[m - 1] + dt * n_sin) / denom;
    if (!std::isfinite(p.a[m - 1]) || !std::isfinite(p.b[m - 1]))
      throw std::runtime_error("pde_step: spectral blow-up, reduce dt");
  }
}

FourierDensity solve_pde(
    const FourierDensity& p0, double K, double T, double dt, int observe_every,
    const std::function<void(double, const FourierDensity&)>& observer) {
  if (p0.modes() < 8) throw std::invalid_argument("solve_pde: need >= 8 modes");
  FourierDensity p = p0;
  const int n_steps = static_cast<int>(std::ceil(T / dt));
  const double step = T / n_steps;
  for (int i = 1; i <= n_steps; ++i) {
    pde_step(p, K, step);
    if (observer && observe_every > 0 &&
        (i % observe_every == 0 || i == n_steps))
      observer(i * step, p);
  }
  return p;
}

PhaseSampler profile_sampler(double K, double r, double psi) {
  const double x = 2.0 * K * r;
  return [x, psi](RngStream& rng) {
    for (;;) {
      const double theta = kTwoPi * rng.uniform();
      if (rng.uniform() < std::exp(x * (std::cos(theta - psi) - 1.0)))
        return wrap_angle(theta);
    }
  };
}

void evolve_rotators(
    std::vector<double>& phases, double K, double t_len, double dt,
    RngStream& rng, int observe_every,
    const std::function<void(double, std::span<const double>)>& observer) {
  if (dt > 0.1) throw std::invalid_argument("evolve_rotators: dt must be <= 0.1");
  const std::size_t n = phases.size();
  if (n < 2) throw std::invalid_argument("evolve_rotators: need N >= 2");
  const int n_steps = static_cast<int>(std::llround(t_len / dt));
  const double sqrt_dt = std::sqrt(dt);
  const double w = K / static_cast<double>(n);
  std::vector<double> sj(n), cj(n);
  for (int step = 1; step <= n_steps; ++step) {
    double s_sum = 0.0, c_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sj[j] = std::sin(phases[j]);
      cj[j] = std::cos(phases[j]);
      s_sum += sj[j];
      c_sum += cj[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double drift = -w * (sj[j] * c_sum - cj[j] * s_sum);
      phases[j] += drift * dt + sqrt_dt * rng.normal();
    }
    if (observer && observe_every > 0 &&
        (step % observe_every == 0 || step == n_steps))
      observer(step * dt, phases);
  }
}

double circular_w1_to_profile(std::span<const double> phases, double K,
                              double r, double psi, int n_grid) {
  std::vector<double> wrapped(phases.begin(), phases.end());
  for (auto& p : wrapped) p = wrap_angle(p);
  std::sort(wrapped.begin(), wrapped.end());
  const double x = 2.0 * K * r;
  const double mass =
      torus_quad([x](double t) { return std::exp(x * (std::cos(t) - 1.0)); });
  // CDF difference on a uniform grid; circular W1 is the L1 norm after
  // subtracting the optimal constant (the median)
  std::vector<double> diff(n_grid);
  double cum_q = 0.0;
  const double h = kTwoPi / n_grid;
  std::size_t idx = 0;
  for (int i = 0; i < n_grid; ++i) {
    const double theta = h * (i + 1);
    const double density =
        std::exp(x * (std::cos(theta - 0.5 * h - psi) - 1.0)) / mass;
    cum_q += density * h;
    while (idx < wrapped.size() && wrapped[idx] <= theta) ++idx;
    const double cum_emp = static_cast<double>(idx) / wrapped.size();
    diff[i] = cum_emp - cum_q;
  }
  std::vector<double> sorted_diff = diff;
  std::nth_element(sorted_diff.begin(), sorted_diff.begin() + n_grid / 2,
                   sorted_diff.end());
  const double median = sorted_diff[n_grid / 2];
  double acc = 0.0;
  for (double d : diff) acc += std::abs(d - median);
  return acc * h;
}

PhaseDiffusionResult phase_diffusion_experiment(int N, double K, double tau_f,
                                                int n_replicas, double dt,
                                                int n_tau, std::uint64_t seed) {
  if (!(K > 1.0))
    throw std::invalid_argument("phase_diffusion_experiment: need K > 1");
  const double r_K = solve_fixed_point(K);
  const double psi0 = 0.0;
  const PhaseSampler sampler = profile_sampler(K, r_K, psi0);

  const double t_total = tau_f * N;
  const double obs_spacing = 0.5;  // physical time between psi observations
  const int obs_every = std::max(1, static_cast<int>(std::llround(obs_spacing / dt)));
  const int w1_stride = 10;  // order-parameter obs per manifold-distance check

  PhaseDiffusionResult result;
  result.tau.resize(n_tau);
  for (int i = 0; i < n_tau; ++i)
    result.tau[i] = tau_f * (i + 1) / static_cast<double>(n_tau);

  std::vector<std::vector<double>> psi_at_tau(n_tau);
  long manifold_checks = 0, manifold_near = 0;

  for (int rep = 0; rep < n_replicas; ++rep) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(rep));
    std::vector<double> phases(N);
    for (auto& p : phases) p = sampler(rng);

    auto [r0, psi_prev] = order_parameter(phases);
    const double psi_start = psi_prev;
    double unwrapped = psi_prev;
    bool desync = false;
    std::vector<double> psi_samples(n_tau,
                                    std::numeric_limits<double>::quiet_NaN());
    int next_tau = 0;
    long obs_count = 0;

    auto observer = [&](double t, std::span<const double> ph) {
      auto [r, psi] = order_parameter(ph);
      if (r < 0.2) desync = true;
      double delta = psi - psi_prev;
      if (delta > M_PI) delta -= kTwoPi;
      if (delta < -M_PI) delta += kTwoPi;
      unwrapped += delta;
      psi_prev = psi;
      if (obs_count % w1_stride == 0) {
        ++manifold_checks;
        if (circular_w1_to_profile(ph, K, r_K, psi) < 0.1) ++manifold_near;
      }
      ++obs_count;
      while (next_tau < n_tau && t >= result.tau[next_tau] * N - 1e-9) {
        psi_samples[next_tau] = unwrapped - psi_start;
        ++next_tau;
      }
    };
    evolve_rotators(phases, K, t_total, dt, rng, obs_every, observer);

    if (desync) {
      ++result.excluded;
      continue;
    }
    for (int i = 0; i < n_tau; ++i)
      if (std::isfinite(psi_samples[i])) psi_at_tau[i].push_back(psi_samples[i]);
  }

  result.var_psi.resize(n_tau, 0.0);
  for (int i = 0; i < n_tau; ++i) {
    const auto& xs = psi_at_tau[i];
    if (xs.size() < 2) continue;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    result.var_psi[i] = var / (xs.size() - 1);
  }

  // regression through the origin
  double sxy = 0.0, sxx = 0.0, vbar = 0.0;
  for (int i = 0; i < n_tau; ++i) {
    sxy += result.tau[i] * result.var_psi[i];
    sxx += result.tau[i] * result.tau[i];
    vbar += result.var_psi[i];
  }
  vbar /= n_tau;
  result.slope = (sxx > 0.0) ? sxy / sxx : 0.0;
  double ss_res = 0.0, ss_tot = 0.0;
  for (int i = 0; i < n_tau; ++i) {
    const double resid = result.var_psi[i] - result.slope * result.tau[i];
    ss_res += resid * resid;
    ss_tot += (result.var_psi[i] - vbar) * (result.var_psi[i] - vbar);
  }
  result.r_squared = (ss_tot > 0.0) ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
  result.frac_near_manifold =
      (manifold_checks > 0)
          ? static_cast<double>(manifold_near) / manifold_checks
          : 0.0;
  return result;
}

}  // namespace ergodic::kuramoto
