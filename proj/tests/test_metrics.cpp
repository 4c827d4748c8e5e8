#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "ergodic_lab/metrics.hpp"
#include "ergodic_lab/rng.hpp"

using namespace ergodic::metrics;
using ergodic::RngStream;

TEST_CASE("from_samples sorts and validates") {
  auto mu = EmpiricalMeasure::from_samples({3.0, 1.0, 2.0});
  CHECK(mu.samples == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(mu.mean() == doctest::Approx(2.0));
  CHECK_THROWS_AS(EmpiricalMeasure::from_samples({}), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalMeasure::from_samples({1.0, std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("pseudo inverse of a simple grid CDF") {
  auto cdf = GridCDF::make({0.0, 1.0, 2.0}, {0.0, 0.5, 1.0});
  CHECK(pseudo_inverse(cdf, 0.25) == doctest::Approx(0.5));
  CHECK(pseudo_inverse(cdf, 0.75) == doctest::Approx(1.5));
  CHECK_THROWS_AS(pseudo_inverse(cdf, 0.0), std::domain_error);
  CHECK_THROWS_AS(pseudo_inverse(cdf, 1.0), std::domain_error);
}

TEST_CASE("wasserstein between point clouds equals the sorted L1 mean") {
  auto mu = EmpiricalMeasure::from_samples({0.0, 1.0, 2.0});
  auto nu = EmpiricalMeasure::from_samples({0.5, 1.5, 4.0});
  // order statistics pair up after sorting
  const double expect = (0.5 + 0.5 + 2.0) / 3.0;
  CHECK(wasserstein_p(mu, nu, 1.0) == doctest::Approx(expect));
  CHECK(wasserstein_p(mu, mu, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("W1 equals the L1 distance between empirical CDFs") {
  RngStream rng = RngStream::derive(3, 0);
  std::vector<double> xs(400), ys(400);
  for (auto& v : xs) v = rng.normal();
  for (auto& v : ys) v = 0.7 * rng.normal() + 0.3;
  auto mu = EmpiricalMeasure::from_samples(xs);
  auto nu = EmpiricalMeasure::from_samples(ys);
  const double w1 = wasserstein_p(mu, nu, 1.0);

  // exact integral of |F - G| over the merged breakpoints
  std::vector<double> grid;
  grid.insert(grid.end(), mu.samples.begin(), mu.samples.end());
  grid.insert(grid.end(), nu.samples.begin(), nu.samples.end());
  std::sort(grid.begin(), grid.end());
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double x = grid[i];
    const double f =
        (std::upper_bound(mu.samples.begin(), mu.samples.end(), x) -
         mu.samples.begin()) /
        static_cast<double>(mu.size());
    const double g =
        (std::upper_bound(nu.samples.begin(), nu.samples.end(), x) -
         nu.samples.begin()) /
        static_cast<double>(nu.size());
    l1 += std::abs(f - g) * (grid[i + 1] - grid[i]);
  }
  CHECK(w1 == doctest::Approx(l1).epsilon(1e-10));
}

TEST_CASE("W2 between translated clouds is the translation distance") {
  RngStream rng = RngStream::derive(8, 0);
  std::vector<double> xs(500);
  for (auto& v : xs) v = rng.normal();
  std::vector<double> ys = xs;
  for (auto& v : ys) v += 1.5;
  auto mu = EmpiricalMeasure::from_samples(xs);
  auto nu = EmpiricalMeasure::from_samples(ys);
  CHECK(wasserstein_p(mu, nu, 2.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("grid CDF quantile quadrature agrees with the sample formula") {
  auto cdf = GridCDF::make({-1.0, 0.0, 2.0}, {0.0, 0.25, 1.0});
  auto same = GridCDF::make({-1.0, 0.0, 2.0}, {0.0, 0.25, 1.0});
  CHECK(wasserstein_p(cdf, same, 2.0, 512) == doctest::Approx(0.0));
  auto shifted = GridCDF::make({0.0, 1.0, 3.0}, {0.0, 0.25, 1.0});
  CHECK(wasserstein_p(cdf, shifted, 1.0, 2048) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("empirical cloud against its own empirical CDF") {
  RngStream rng = RngStream::derive(11, 0);
  std::vector<double> xs(256);
  for (auto& v : xs) v = rng.normal();
  auto mu = EmpiricalMeasure::from_samples(xs);
  CHECK(wasserstein_p(mu, empirical_cdf(mu), 1.0) < 0.02);
}

TEST_CASE("coalescence fraction") {
  CHECK(coalescence_fraction({true, true, false, true}) ==
        doctest::Approx(0.25));
  CHECK_THROWS_AS(coalescence_fraction({}), std::invalid_argument);
}

TEST_CASE("exponential rate fit recovers a synthetic rate") {
  std::vector<double> t, v;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.5 * i);
    v.push_back(3.0 * std::exp(-0.3 * 0.5 * i));
  }
  const auto fit = fit_exp_rate(t, v);
  CHECK(fit.rate == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-10));
}
