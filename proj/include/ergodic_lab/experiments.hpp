#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ergodic::harness {

/// One numeric experiment parameter. Required parameters have no
/// fallback and must be supplied by the caller.
struct ParamSpec {
  std::string key;
  double fallback = 0.0;
  bool required = false;
  double min_value = -1e300;
  double max_value = 1e300;
  std::string doc;
};

struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, double> params;  // fully resolved
  std::uint64_t seed = 1;
  int replicas = 1;
};

/// Named column set; every cell is a double, serialized losslessly.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Pass/fail flag together with the tolerance it was judged against.
struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<Table> tables;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> summary;
  double wall_seconds = 0.0;

  bool passed() const;
};

struct ExperimentDef {
  std::string name;
  std::string operation;  // module operation exercised
  std::string claim;      // behavior under test
  std::vector<ParamSpec> params;
  std::function<ExperimentReport(const ExperimentConfig&)> run;
};

/// Full experiment registry (stable order).
const std::vector<ExperimentDef>& registry();
const ExperimentDef* find_experiment(const std::string& name);

/// Validates overrides against the registry entry: unknown, missing or
/// out-of-range keys raise std::invalid_argument naming every offender.
ExperimentConfig make_config(const std::string& name,
                             const std::map<std::string, double>& overrides,
                             std::uint64_t seed, int replicas);

/// Runs the named experiment (config must come from make_config);
/// deterministic for a fixed seed regardless of the worker count.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Lossless CSV: header row, shortest round-trip decimal per cell.
std::string table_csv(const Table& table);
std::string format_double(double x);

std::string report_json(const ExperimentReport& report);
std::string registry_json();

/// Worker cap: ERGODIC_LAB_THREADS if set, else the hardware count.
int worker_cap();

/// Runs body(0..n-1) on up to worker_cap() threads. Bodies must only
/// touch their own output slots; results are index-keyed so the
/// schedule cannot influence any reduction.
void for_each_replica(int n, const std::function<void(int)>& body);

// per-module registry fragments, concatenated by registry()
std::vector<ExperimentDef> bandit_experiments();
std::vector<ExperimentDef> fbm_experiments();
std::vector<ExperimentDef> kuramoto_experiments();
std::vector<ExperimentDef> waves_experiments();

}  // namespace ergodic::harness
