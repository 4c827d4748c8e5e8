#include <cmath>
#include <vector>

#include <doctest.h>

#include "ergodic_lab/rng.hpp"

using ergodic::RngStream;

TEST_CASE("derived streams are reproducible") {
  RngStream a = RngStream::derive(42, 7);
  RngStream b = RngStream::derive(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("sibling streams are effectively uncorrelated") {
  RngStream a = RngStream::derive(42, 0);
  RngStream b = RngStream::derive(42, 1);
  const int n = 10000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform(), y = b.uniform();
    sa += x;
    sb += y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) *
                                      (sbb / n - (sb / n) * (sb / n)));
  CHECK(std::abs(corr) < 0.05);
}

TEST_CASE("uniform stays inside the open unit interval") {
  RngStream rng = RngStream::derive(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  RngStream rng = RngStream::derive(5, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("exponential moments") {
  RngStream rng = RngStream::derive(9, 3);
  const int n = 200000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += rng.exponential();
  CHECK(std::abs(s / n - 1.0) < 0.01);
}
