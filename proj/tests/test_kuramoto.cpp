#include <cmath>
#include <vector>

#include <doctest.h>

#include "ergodic_lab/kuramoto.hpp"

using namespace ergodic::kuramoto;
using ergodic::RngStream;

TEST_CASE("angle wrapping") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kTwoPi) == doctest::Approx(0.0));
  CHECK(wrap_angle(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_angle(7.0 * kTwoPi + 1.2) == doctest::Approx(1.2));
}

TEST_CASE("order parameter extremes") {
  std::vector<double> aligned(64, 1.3);
  auto [r1, psi1] = order_parameter(aligned);
  CHECK(r1 == doctest::Approx(1.0));
  CHECK(psi1 == doctest::Approx(1.3));

  std::vector<double> spread(64);
  for (int i = 0; i < 64; ++i) spread[i] = kTwoPi * i / 64.0;
  auto [r0, psi0] = order_parameter(spread);
  (void)psi0;
  CHECK(r0 < 1e-12);
}

TEST_CASE("psi function against the Bessel series") {
  // Psi(x) = I1(x)/I0(x); sum the modified Bessel series directly
  auto bessel_ratio = [](double x) {
    double i0 = 0.0, i1 = 0.0, term = 1.0;
    for (int k = 0; k < 40; ++k) {
      if (k > 0) term *= (x * x / 4.0) / (k * k);
      i0 += term;
      i1 += term * (x / 2.0) / (k + 1.0);
    }
    return i1 / i0;
  };
  for (double x : {0.1, 0.5, 1.0, 2.0, 4.0})
    CHECK(psi_function(x) == doctest::Approx(bessel_ratio(x)).epsilon(1e-10));
  CHECK(psi_function(0.0) == doctest::Approx(0.0));
  const double d = 1e-6;
  CHECK(psi_function(d) / d == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("fixed point branch structure") {
  CHECK(solve_fixed_point(0.5) == 0.0);
  CHECK(solve_fixed_point(1.0) == 0.0);
  const double r15 = solve_fixed_point(1.5);
  const double r2 = solve_fixed_point(2.0);
  const double r4 = solve_fixed_point(4.0);
  CHECK(r15 > 0.0);
  CHECK(r2 > r15);
  CHECK(r4 > r2);
  CHECK(r4 < 1.0);
  for (double r : {r15, r2, r4}) CHECK(r > 0.0);
  CHECK(std::abs(r2 - psi_function(2.0 * 2.0 * r2)) < 1e-10);
}

TEST_CASE("stationary profile has unit mass") {
  const double K = 2.0, r = solve_fixed_point(K);
  const int n = 2048;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = kTwoPi * i / n;
  const auto q = stationary_profile(K, r, 0.7, grid);
  double mass = 0.0;
  for (double v : q) mass += v * (kTwoPi / n);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fourier truncation reproduces the profile pointwise") {
  const double K = 2.0, r = solve_fixed_point(K), psi = 1.1;
  const auto p = profile_coefficients(K, r, psi, 48);
  std::vector<double> grid{0.0, 0.9, 2.3, 4.0, 5.8};
  const auto exact = stationary_profile(K, r, psi, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(p.value_at(grid[i]) == doctest::Approx(exact[i]).epsilon(1e-12));
}

TEST_CASE("parseval distance equals direct quadrature") {
  const auto p = profile_coefficients(2.0, solve_fixed_point(2.0), 0.0, 32);
  const auto q = profile_coefficients(1.5, solve_fixed_point(1.5), 0.4, 32);
  const int n = 8192;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double th = kTwoPi * i / n;
    const double d = p.value_at(th) - q.value_at(th);
    acc += d * d * (kTwoPi / n);
  }
  CHECK(l2_distance(p, q) == doctest::Approx(std::sqrt(acc)).epsilon(1e-10));
  CHECK(l2_distance(p, p) == doctest::Approx(0.0));
}

TEST_CASE("linearized spectrum at the uniform state") {
  const auto spec = linearized_spectrum_uniform(0.5, 4);
  REQUIRE(spec.size() == 4);
  CHECK(spec[0].first == doctest::Approx(-0.25));
  CHECK(spec[0].second == 2);
  CHECK(spec[1].first == doctest::Approx(-2.0));
  CHECK(spec[2].first == doctest::Approx(-4.5));
  CHECK(spec[3].first == doctest::Approx(-8.0));
}

TEST_CASE("pde leaves the uniform state bitwise fixed") {
  auto p = FourierDensity::uniform(16);
  pde_step(p, 2.0, 0.01);
  for (int k = 0; k < 16; ++k) {
    CHECK(p.a[k] == 0.0);
    CHECK(p.b[k] == 0.0);
  }
}

TEST_CASE("small perturbations grow at the linear rate") {
  // mode 1 perturbation of the uniform state evolves like e^{(K-1)t/2}
  const double K = 2.0, dt = 1e-4, T = 0.5;
  auto p = FourierDensity::uniform(16);
  p.a[0] = 1e-6;
  const auto out = solve_pde(p, K, T, dt);
  const double growth = out.a[0] / 1e-6;
  CHECK(growth == doctest::Approx(std::exp((K - 1.0) * T / 2.0)).epsilon(1e-3));
}

TEST_CASE("profile sampler satisfies the self-consistency identity") {
  // E[cos(theta - psi)] under q_{psi, r} equals Psi(2 K r)
  const double K = 2.0, r = solve_fixed_point(K), psi = 0.8;
  auto sample = profile_sampler(K, r, psi);
  RngStream rng = RngStream::derive(31, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = std::cos(sample(rng) - psi);
    s += c;
    s2 += c * c;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - psi_function(2.0 * K * r)) < 3.0 * se + 1e-12);
}

TEST_CASE("uncoupled rotators diffuse like brownian motions") {
  RngStream rng = RngStream::derive(41, 0);
  const int n = 2000;
  std::vector<double> phases(n, 0.0);
  const double t = 2.0;
  evolve_rotators(phases, 0.0, t, 1e-3, rng);
  double s2 = 0.0;
  for (double v : phases) s2 += v * v;
  CHECK(s2 / n == doctest::Approx(t).epsilon(0.1));
}

TEST_CASE("circular W1 is small for samples from the profile") {
  const double K = 2.0, r = solve_fixed_point(K), psi = 2.0;
  auto sample = profile_sampler(K, r, psi);
  RngStream rng = RngStream::derive(47, 0);
  std::vector<double> phases(20000);
  for (auto& v : phases) v = sample(rng);
  CHECK(circular_w1_to_profile(phases, K, r, psi) < 0.03);
  // and not small against a rotated profile
  CHECK(circular_w1_to_profile(phases, K, r, psi + 2.0) > 0.2);
}
