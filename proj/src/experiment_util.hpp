#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ergodic_lab/experiments.hpp"

namespace ergodic::harness {

inline double param(const ExperimentConfig& c, const std::string& key) {
  return c.params.at(key);
}

inline int iparam(const ExperimentConfig& c, const std::string& key) {
  return static_cast<int>(std::llround(c.params.at(key)));
}

inline CheckResult check_le(std::string name, double observed, double tol,
                            std::string detail = {}) {
  return {std::move(name), observed <= tol, observed, tol, std::move(detail)};
}

inline CheckResult check_flag(std::string name, bool ok,
                              std::string detail = {}) {
  return {std::move(name), ok, ok ? 1.0 : 0.0, 0.0, std::move(detail)};
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = (n == 1) ? a : a + (b - a) * i / static_cast<double>(n - 1);
  return out;
}

}  // namespace ergodic::harness
