// Acceptance harness: one numbered criterion per invocation (or several),
// each mapped to a registry experiment run at its pinned defaults.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "ergodic_lab/experiments.hpp"

using namespace ergodic::harness;

namespace {

struct Criterion {
  int id;
  const char* label;
  std::vector<std::pair<std::string, std::map<std::string, double>>> runs;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> table{
      {1, "bandit W1 decay rate", {{"bandit-w1", {}}}},
      {2, "bandit mean closed form", {{"bandit-mean", {}}}},
      {3, "bandit Laplace transform and uM", {{"bandit-laplace", {}}}},
      {4, "bandit TV coalescence rate", {{"bandit-tv", {}}}},
      {5, "bandit moment hierarchy", {{"bandit-moments", {}}}},
      {6, "fBm exactness", {{"fbm-check", {}}}},
      {7, "fSDE ergodicity and Lyapunov feasibility",
       {{"fsde-lyapunov", {}}}},
      {8, "memory operator quadrature", {{"rt-operator", {}}}},
      {9, "Kuramoto fixed point",
       {{"kuramoto-fixed-point", {{"K", 0.8}}},
        {"kuramoto-fixed-point", {{"K", 2.0}}}}},
      {10, "Kuramoto linearized spectrum", {{"kuramoto-spectrum", {}}}},
      {11, "Kuramoto PDE invariance and convergence", {{"kuramoto-pde", {}}}},
      {12, "Kuramoto phase diffusion", {{"kuramoto-phase", {}}}},
      {13, "wave profile solver", {{"waves-solve", {}}}},
      {14, "moment condition", {{"waves-moment", {}}}},
      {15, "ranked-system contraction", {{"waves-contraction", {}}}},
      {16, "mean drift at wave speed", {{"waves-meandrift", {}}}},
      {17, "convergence to the wave", {{"waves-converge", {}}}},
  };
  return table;
}

constexpr std::uint64_t kSeed = 20250823;

bool run_criterion(const Criterion& crit) {
  bool ok = true;
  std::string failures;
  for (const auto& [name, overrides] : crit.runs) {
    try {
      const auto cfg = make_config(name, overrides, kSeed, 1);
      const auto report = run_experiment(cfg);
      for (const auto& c : report.checks)
        if (!c.passed) {
          ok = false;
          failures += " " + name + "/" + c.name;
        }
    } catch (const std::exception& ex) {
      ok = false;
      failures += " " + name + "(" + ex.what() + ")";
    }
  }
  std::printf("criterion %d (%s): %s%s\n", crit.id, crit.label,
              ok ? "PASS" : "FAIL", failures.c_str());
  std::fflush(stdout);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  if (wanted.empty())
    for (const auto& c : criteria()) wanted.push_back(c.id);

  bool all_ok = true;
  for (int id : wanted) {
    const Criterion* found = nullptr;
    for (const auto& c : criteria())
      if (c.id == id) found = &c;
    if (!found) {
      std::fprintf(stderr, "unknown criterion %d (valid: 1..17)\n", id);
      return 1;
    }
    if (!run_criterion(*found)) all_ok = false;
  }
  return all_ok ? 0 : 1;
}
