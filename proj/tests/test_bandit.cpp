#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "ergodic_lab/metrics.hpp"
#include "ergodic_lab/pdmp_bandit.hpp"

using namespace ergodic::bandit;
using ergodic::RngStream;

namespace {
const BanditParams kP(0.7, 0.3);
}

TEST_CASE("integrated rate matches direct quadrature along the flow") {
  // independent oracle: composite Simpson of the jump rate on the flow
  const double y = 1.7, t = 2.3;
  const int m = 1 << 14;
  const double h = t / m;
  auto rate = [&](double s) { return kP.jump_rate(flow(y, s, kP)); };
  double acc = rate(0.0) + rate(t);
  for (int i = 1; i < m; ++i) acc += rate(i * h) * (i % 2 ? 4.0 : 2.0);
  acc *= h / 3.0;
  CHECK(integrated_rate(y, t, kP) == doctest::Approx(acc).epsilon(1e-10));
}

TEST_CASE("next jump time inverts the integrated rate") {
  RngStream rng = RngStream::derive(21, 0);
  for (int i = 0; i < 200; ++i) {
    const double y = 3.0 * rng.uniform();
    const double e = rng.exponential();
    const double t = next_jump_time(y, kP, e);
    CHECK(std::abs(integrated_rate(y, t, kP) - e) < 1e-10);
  }
}

TEST_CASE("stationary mean arithmetic") {
  CHECK(kP.stationary_mean() == doctest::Approx(9.0 / 28.0).epsilon(1e-15));
  // mean_at_t interpolates between the start and the stationary value
  CHECK(mean_at_t(kP, 2.0, 0.0) == doctest::Approx(2.0));
  CHECK(mean_at_t(kP, 2.0, 200.0) ==
        doctest::Approx(kP.stationary_mean()).epsilon(1e-12));
}

TEST_CASE("paths are right-continuous step-flow trajectories") {
  RngStream rng = RngStream::derive(33, 0);
  const auto path = simulate_path(kP, 1.0, 5.0, rng);
  REQUIRE(path.size() >= 2);
  CHECK(path.front().t == 0.0);
  CHECK(path.front().y == 1.0);
  CHECK(path.back().t == 5.0);
  for (std::size_t i = 1; i < path.size(); ++i)
    CHECK(path[i].t >= path[i - 1].t);
  // state_at the horizon equals the recorded final state
  CHECK(state_at(path, 5.0, kP) == doctest::Approx(path.back().y));
}

TEST_CASE("monotone coupling preserves order and contracts on average") {
  RngStream rng = RngStream::derive(55, 0);
  const int n = 3000;
  const double t = 3.0;
  double mean_gap = 0.0;
  for (int i = 0; i < n; ++i) {
    CoupledBanditPair pair;
    pair.y = 2.0;
    pair.y_tilde = 0.5;
    couple_wasserstein_until(pair, kP, t, rng);
    CHECK(pair.y >= pair.y_tilde);
    mean_gap += pair.y - pair.y_tilde;
  }
  mean_gap /= n;
  const double expect = 1.5 * std::exp(-(kP.p - kP.q) * t);
  CHECK(mean_gap == doctest::Approx(expect).epsilon(0.15));
}

TEST_CASE("uM solves its defining equation") {
  const double u = solve_uM(kP);
  CHECK(std::abs(std::expm1(u) / u - kP.p / kP.q) < 1e-12);
  const double u2 = solve_uM(BanditParams(0.5, 0.25));
  CHECK(u2 == doctest::Approx(1.2564).epsilon(1e-4));
  CHECK_THROWS_AS(BanditParams(0.3, 0.3), std::invalid_argument);
}

TEST_CASE("laplace transform slope at zero is the stationary mean") {
  // psi'(0)/psi(0) = E[Y] under the invariant law
  const double h = 1e-4;
  const auto lp = laplace_log_psi(kP, {0.0, h});
  CHECK(lp[0] == doctest::Approx(0.0));
  CHECK((lp[1] - lp[0]) / h ==
        doctest::Approx(kP.stationary_mean()).epsilon(1e-3));
  CHECK_THROWS_AS(laplace_log_psi(kP, {0.0, solve_uM(kP) + 0.1}),
                  std::domain_error);
}

TEST_CASE("moment hierarchy first component matches the closed form") {
  const auto table = moment_system(kP, 3, {1.0, 1.0, 1.0}, 4.0, 1e-3);
  for (std::size_t i = 0; i < table.times.size(); i += 100)
    CHECK(table.h[0][i] ==
          doctest::Approx(mean_at_t(kP, 1.0, table.times[i])).epsilon(1e-10));
}

TEST_CASE("moment hierarchy is stationary at the fixed point") {
  // solve for the stationary first two moments directly from the
  // generator balance, then check the ODE does not move them
  const double m1 = kP.stationary_mean();
  const double c = kP.offset();
  // 0 = -2(p-q) h2 + q C(2,0) h1 + q c (C(2,0) + C(2,1) h1)
  const double m2 = (kP.q * m1 + kP.q * c * (1.0 + 2.0 * m1)) /
                    (2.0 * (kP.p - kP.q));
  const auto table = moment_system(kP, 2, {m1, m2}, 2.0, 1e-3);
  CHECK(table.h[0].back() == doctest::Approx(m1).epsilon(1e-10));
  CHECK(table.h[1].back() == doctest::Approx(m2).epsilon(1e-10));
}

TEST_CASE("coalescent density is the derivative of one minus survival") {
  const double y = 1.2, eps = 0.4;
  for (double s : {0.3, 0.8, 1.7}) {
    const double h = 1e-5;
    const double fd = (coalescent_survival(y, s - h, eps, kP) -
                       coalescent_survival(y, s + h, eps, kP)) /
                      (2.0 * h);
    CHECK(coalescent_density(y, s, eps, kP) ==
          doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("eps zero gives the plain first jump density") {
  const double y = 0.9;
  for (double s : {0.2, 1.0, 2.5}) {
    const double lam = integrated_rate(y, s, kP);
    const double direct = kP.jump_rate(flow(y, s, kP)) * std::exp(-lam);
    CHECK(coalescent_density(y, s, 0.0, kP) ==
          doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("coalescence attempts merge the pair or advance it") {
  RngStream rng = RngStream::derive(77, 0);
  int merged = 0;
  for (int i = 0; i < 500; ++i) {
    CoupledBanditPair pair;
    pair.y = 0.6;
    pair.y_tilde = 0.4;
    const double t0 = pair.t;
    const bool ok = couple_coalescent_attempt(pair, kP, rng);
    CHECK(pair.t > t0);
    if (ok) {
      ++merged;
      CHECK(pair.coalesced);
      CHECK(pair.y == doctest::Approx(pair.y_tilde));
      CHECK(pair.tau == doctest::Approx(pair.t));
    }
  }
  // gap 0.2 at these rates should coalesce most of the time
  CHECK(merged > 250);
}

TEST_CASE("tv rate closed form") {
  const double v = tv_rate(kP);
  CHECK(v == doctest::Approx(0.4 / (2.0 + 0.7 * 0.4 / (0.3 * 0.3))));
  CHECK(v == doctest::Approx(0.0782608695652174).epsilon(1e-12));
}

TEST_CASE("tv experiment survival curve is a monotone step function") {
  RngStream rng = RngStream::derive(91, 0);
  const auto curve = tv_experiment(
      kP, [](RngStream&) { return 1.5; }, [](RngStream&) { return 0.0; }, 30.0,
      0.4, 400, 20, rng);
  REQUIRE(curve.t.size() == curve.survival.size());
  for (std::size_t i = 1; i < curve.survival.size(); ++i)
    CHECK(curve.survival[i] <= curve.survival[i - 1] + 1e-15);
  CHECK(curve.survival.back() < 0.5);
}
