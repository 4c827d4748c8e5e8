#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "ergodic_lab/fbm_sde.hpp"

using namespace ergodic::fbm;
using ergodic::RngStream;

TEST_CASE("H = 1/2 covariance collapses to min(s, t)") {
  CHECK(fbm_covariance(0.5, 0.3, 1.7) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(fbm_covariance(0.5, 2.0, 0.8) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(fbm_covariance(0.7, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sampled paths reproduce the exact covariance") {
  const double H = 0.8;
  const int n = 8;
  FbmGenerator gen(H, n, 1.0);
  RngStream rng = RngStream::derive(101, 0);
  const int reps = 40000;
  std::vector<double> inc(n);
  double c48 = 0.0, v8 = 0.0;
  for (int r = 0; r < reps; ++r) {
    gen.sample_increments(rng, inc);
    double b4 = 0.0, b8 = 0.0;
    for (int i = 0; i < n; ++i) {
      b8 += inc[i];
      if (i < n / 2) b4 += inc[i];
    }
    c48 += b4 * b8;
    v8 += b8 * b8;
  }
  c48 /= reps;
  v8 /= reps;
  CHECK(c48 == doctest::Approx(fbm_covariance(H, 0.5, 1.0)).epsilon(0.03));
  CHECK(v8 == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("generation is deterministic per stream") {
  RngStream a = RngStream::derive(7, 1), b = RngStream::derive(7, 1);
  const auto p1 = generate_fbm(0.7, 32, 2.0, 2, a);
  const auto p2 = generate_fbm(0.7, 32, 2.0, 2, b);
  REQUIRE(p1.values.size() == 2);
  for (int d = 0; d < 2; ++d)
    for (std::size_t i = 0; i < p1.values[d].size(); ++i)
      CHECK(p1.values[d][i] == p2.values[d][i]);
  CHECK(p1.times.front() == 0.0);
  CHECK(p1.times.back() == doctest::Approx(2.0));
  CHECK(p1.values[0][0] == 0.0);
}

TEST_CASE("holder norm of a linear path has a closed form") {
  // |slope (t-s)| / (t-s)^theta peaks on the widest window
  const double slope = 1.3, theta = 0.6;
  std::vector<double> t, v;
  for (int i = 0; i <= 40; ++i) {
    t.push_back(0.05 * i);
    v.push_back(slope * t.back());
  }
  const double got = holder_norm(t, v, theta, 0.5, 1.5);
  CHECK(got == doctest::Approx(slope * std::pow(1.0, 1.0 - theta)).epsilon(1e-12));
  const double got2 = holder_norm(t, v, theta, 0.0, 2.0);
  CHECK(got2 == doctest::Approx(slope * std::pow(2.0, 1.0 - theta)).epsilon(1e-12));
}

TEST_CASE("zero-noise Euler matches the recursion exactly") {
  FSDEModel model;
  model.dim = 1;
  model.drift = [](const Vec& x) { return Vec{-x[0]}; };
  model.diffusion = [](const Vec&) { return Mat{0.0}; };
  FBMPath path;
  path.hurst = 0.7;
  const int n = 100;
  const double dt = 1.0 / n;
  path.times.resize(n + 1);
  path.values.assign(1, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i <= n; ++i) path.times[i] = i * dt;
  const auto traj = integrate_fsde(model, {2.0}, path);
  REQUIRE(traj.size() == static_cast<std::size_t>(n + 1));
  double expect = 2.0;
  for (int k = 0; k <= n; ++k) {
    CHECK(traj[k][0] == doctest::Approx(expect).epsilon(1e-14));
    expect *= 1.0 - dt;
  }
}

TEST_CASE("overflow guard trips on an explosive field") {
  FSDEModel model;
  model.dim = 1;
  model.drift = [](const Vec& x) { return Vec{x[0] * x[0] * x[0]}; };
  model.diffusion = [](const Vec&) { return Mat{0.0}; };
  FBMPath path;
  path.hurst = 0.7;
  path.times = {0.0, 1.0, 2.0, 3.0, 4.0};
  path.values.assign(1, std::vector<double>(5, 0.0));
  CHECK_THROWS_AS(integrate_fsde(model, {3.0}, path), std::runtime_error);
}

TEST_CASE("rotation drift is purely inward radially") {
  auto b = rotation_drift(3.0);
  const Vec zero = b({0.0, 0.0});
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);
  RngStream rng = RngStream::derive(13, 0);
  for (int i = 0; i < 50; ++i) {
    Vec z{2.0 * rng.normal(), 2.0 * rng.normal()};
    const Vec d = b(z);
    const double dot = z[0] * d[0] + z[1] * d[1];
    const double n2 = z[0] * z[0] + z[1] * z[1];
    CHECK(dot == doctest::Approx(-n2).epsilon(1e-12));
  }
}

TEST_CASE("contraction check separates stable from unstable drifts") {
  FSDEModel stable;
  stable.dim = 2;
  stable.drift = rotation_drift(3.0);
  stable.diffusion = [](const Vec&) { return Mat{1.0, 0.0, 0.0, 1.0}; };
  LyapunovSpec spec;
  spec.V = [](const Vec& x) { return 1.0 + x[0] * x[0] + x[1] * x[1]; };
  spec.r = 1.0;
  spec.theta = 0.6;
  RngStream rng = RngStream::derive(17, 0);
  const auto good = check_lyapunov_contraction(stable, spec, 0.7, 200, 128,
                                               15.0, rng);
  CHECK(good.feasible);
  CHECK(good.rho_hat < 1.0);
  CHECK(good.violation_rate == doctest::Approx(0.0));

  FSDEModel unstable = stable;
  unstable.drift = [](const Vec& x) { return Vec{x[0], x[1]}; };
  RngStream rng2 = RngStream::derive(17, 1);
  const auto bad = check_lyapunov_contraction(unstable, spec, 0.7, 200, 128,
                                              15.0, rng2);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.rho_hat > 1.0);
}

TEST_CASE("memory operator closed form at H = 1/2, T = 0") {
  auto one = [](double) { return 1.0; };
  for (double t : {0.5, 1.0, 2.0}) {
    const double expect = std::log((t + 1.0) / t);
    CHECK(evaluate_RT(one, 1.0, 0.0, t, 0.5) ==
          doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("memory operator against a brute-force Simpson sum") {
  const double H = 0.65, T = 0.8, t = 1.2, L = 2.0;
  auto g = [](double s) { return std::cos(s); };
  const int m = 1 << 18;
  const double h = L / m;
  auto f = [&](double s) {
    return std::pow(t, 0.5 - H) * std::pow(T - s, H - 0.5) / (t + T - s) * g(s);
  };
  double acc = f(-L) + f(0.0);
  for (int i = 1; i < m; ++i) acc += f(-L + i * h) * (i % 2 ? 4.0 : 2.0);
  acc *= h / 3.0;
  CHECK(evaluate_RT(g, L, T, t, H) == doctest::Approx(acc).epsilon(1e-7));
}
