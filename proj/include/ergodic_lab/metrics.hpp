#pragma once

#include <span>
#include <vector>

namespace ergodic::metrics {

/// Sorted sample cloud representing a probability law on the line.
struct EmpiricalMeasure {
  std::vector<double> samples;  // sorted ascending, finite, non-empty

  /// Sorts and validates. Throws std::invalid_argument on empty or
  /// non-finite input.
  static EmpiricalMeasure from_samples(std::vector<double> xs);

  std::size_t size() const { return samples.size(); }
  double mean() const;
};

/// Piecewise-linear CDF on a strictly increasing grid.
struct GridCDF {
  std::vector<double> grid;    // strictly increasing
  std::vector<double> values;  // nondecreasing, in [0,1]

  static GridCDF make(std::vector<double> grid, std::vector<double> values);

  /// F(x) with linear interpolation, clamped to the boundary values
  /// outside the grid.
  double evaluate(double x) const;
};

struct RateFit {
  double rate = 0.0;       // 1/time
  double intercept = 0.0;  // log value at t = 0
  double r_squared = 0.0;  // in [0,1]
};

/// inf{x : F(x) >= w}, linearly interpolated between grid nodes.
/// Throws std::domain_error unless 0 < w < 1.
double pseudo_inverse(const GridCDF& cdf, double w);

/// Order-statistics W_p between equal-size sample clouds.
double wasserstein_p(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     double p);

/// Quantile-quadrature W_p between two grid CDFs, midpoint rule with
/// n_quantiles nodes.
double wasserstein_p(const GridCDF& F, const GridCDF& G, double p,
                     int n_quantiles);

/// W_p between a sorted sample cloud and a grid CDF, matching the k-th
/// order statistic with the (k-1/2)/n quantile.
double wasserstein_p(const EmpiricalMeasure& mu, const GridCDF& F, double p);

/// Empirical CDF of a sample cloud as a GridCDF (values (k)/n at the
/// k-th order statistic, with a left pad at value 0).
GridCDF empirical_cdf(const EmpiricalMeasure& mu);

/// Fraction of pairs that have not coalesced (upper bound estimate for
/// total variation). Throws std::invalid_argument on empty input.
double coalescence_fraction(const std::vector<bool>& coalesced);

/// Least-squares line on (t, log v); rate is minus the slope.
/// Requires >= 3 points and strictly positive values.
RateFit fit_exp_rate(std::span<const double> times,
                     std::span<const double> values);

}  // namespace ergodic::metrics
