#include "ergodic_lab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ergodic::metrics {

EmpiricalMeasure EmpiricalMeasure::from_samples(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("EmpiricalMeasure: empty sample set");
  for (double x : xs) {
    if (!std::isfinite(x))
      throw std::invalid_argument("EmpiricalMeasure: non-finite sample");
  }
  std::sort(xs.begin(), xs.end());
  return EmpiricalMeasure{std::move(xs)};
}

double EmpiricalMeasure::mean() const {
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

GridCDF GridCDF::make(std::vector<double> grid, std::vector<double> values) {
  if (grid.size() != values.size() || grid.size() < 2)
    throw std::invalid_argument("GridCDF: need matching grid/values, size >= 2");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("GridCDF: grid must be strictly increasing");
    if (values[i] < values[i - 1] - 1e-12)
      throw std::invalid_argument("GridCDF: values must be nondecreasing");
  }
  const double tol = 1e-9;
  for (double v : values) {
    if (v < -tol || v > 1.0 + tol)
      throw std::invalid_argument("GridCDF: values must lie in [0,1]");
  }
  return GridCDF{std::move(grid), std::move(values)};
}

double GridCDF::evaluate(double x) const {
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  const double x0 = grid[i - 1], x1 = grid[i];
  const double f0 = values[i - 1], f1 = values[i];
  return f0 + (f1 - f0) * (x - x0) / (x1 - x0);
}

double pseudo_inverse(const GridCDF& cdf, double w) {
  if (!(w > 0.0 && w < 1.0))
    throw std::domain_error("pseudo_inverse: w must lie in (0,1)");
  const auto& F = cdf.values;
  const auto& x = cdf.grid;
  // first node with F >= w
  auto it = std::lower_bound(F.begin(), F.end(), w);
  if (it == F.end()) return x.back();
  std::size_t i = static_cast<std::size_t>(it - F.begin());
  if (i == 0) return x.front();
  const double f0 = F[i - 1], f1 = F[i];
  if (f1 == f0) return x[i];
  return x[i - 1] + (w - f0) / (f1 - f0) * (x[i] - x[i - 1]);
}

double wasserstein_p(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     double p) {
  if (p < 1.0) throw std::invalid_argument("wasserstein_p: order must be >= 1");
  if (mu.size() != nu.size())
    throw std::invalid_argument(
        "wasserstein_p: sample counts differ (resample upstream)");
  const std::size_t n = mu.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += std::pow(std::abs(mu.samples[i] - nu.samples[i]), p);
  return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

double wasserstein_p(const GridCDF& F, const GridCDF& G, double p,
                     int n_quantiles) {
  if (n_quantiles < 2)
    throw std::invalid_argument("wasserstein_p: n_quantiles must be >= 2");
  double acc = 0.0;
  for (int k = 1; k <= n_quantiles; ++k) {
    const double w = (k - 0.5) / n_quantiles;
    acc += std::pow(std::abs(pseudo_inverse(F, w) - pseudo_inverse(G, w)), p);
  }
  return std::pow(acc / n_quantiles, 1.0 / p);
}

double wasserstein_p(const EmpiricalMeasure& mu, const GridCDF& F, double p) {
  const std::size_t n = mu.size();
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k + 0.5) / static_cast<double>(n);
    acc += std::pow(std::abs(mu.samples[k] - pseudo_inverse(F, w)), p);
  }
  return std::pow(acc / static_cast<double>(n), 1.0 / p);
}

GridCDF empirical_cdf(const EmpiricalMeasure& mu) {
  const std::size_t n = mu.size();
  std::vector<double> grid, values;
  grid.reserve(n + 1);
  values.reserve(n + 1);
  const double span = std::max(1e-12, mu.samples.back() - mu.samples.front());
  grid.push_back(mu.samples.front() - 1e-9 * span - 1e-12);
  values.push_back(0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double x = mu.samples[k];
    if (x <= grid.back()) x = grid.back() + 1e-12 * (1.0 + std::abs(x));
    grid.push_back(x);
    values.push_back(static_cast<double>(k + 1) / static_cast<double>(n));
  }
  return GridCDF::make(std::move(grid), std::move(values));
}

double coalescence_fraction(const std::vector<bool>& coalesced) {
  if (coalesced.empty())
    throw std::invalid_argument("coalescence_fraction: empty flag list");
  std::size_t apart = 0;
  for (bool c : coalesced)
    if (!c) ++apart;
  return static_cast<double>(apart) / static_cast<double>(coalesced.size());
}

RateFit fit_exp_rate(std::span<const double> times,
                     std::span<const double> values) {
  if (times.size() != values.size() || times.size() < 3)
    throw std::invalid_argument("fit_exp_rate: need >= 3 matched points");
  const std::size_t n = times.size();
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0))
      throw std::domain_error("fit_exp_rate: values must be positive");
    logs[i] = std::log(values[i]);
  }
  double tbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tbar += times[i];
    ybar += logs[i];
  }
  tbar /= n;
  ybar /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = times[i] - tbar, dy = logs[i] - ybar;
    sxx += dt * dt;
    sxy += dt * dy;
    syy += dy * dy;
  }
  RateFit fit;
  if (sxx == 0.0) throw std::invalid_argument("fit_exp_rate: degenerate times");
  const double slope = sxy / sxx;
  fit.rate = -slope;
  fit.intercept = ybar - slope * tbar;
  fit.r_squared = (syy == 0.0) ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

}  // namespace ergodic::metrics
