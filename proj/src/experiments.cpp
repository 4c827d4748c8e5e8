#include "ergodic_lab/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace ergodic::harness {

bool ExperimentReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const std::vector<ExperimentDef>& registry() {
  static const std::vector<ExperimentDef> defs = [] {
    std::vector<ExperimentDef> all;
    for (auto* group : {&bandit_experiments, &fbm_experiments,
                        &kuramoto_experiments, &waves_experiments}) {
      auto part = (*group)();
      all.insert(all.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    return all;
  }();
  return defs;
}

const ExperimentDef* find_experiment(const std::string& name) {
  for (const auto& def : registry())
    if (def.name == name) return &def;
  return nullptr;
}

ExperimentConfig make_config(const std::string& name,
                             const std::map<std::string, double>& overrides,
                             std::uint64_t seed, int replicas) {
  const ExperimentDef* def = find_experiment(name);
  if (!def) throw std::invalid_argument("unknown experiment: " + name);
  if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");

  std::vector<std::string> offenders;
  ExperimentConfig config;
  config.experiment = name;
  config.seed = seed;
  config.replicas = replicas;
  for (const auto& spec : def->params) {
    auto it = overrides.find(spec.key);
    if (it == overrides.end()) {
      if (spec.required) {
        offenders.push_back("missing " + spec.key);
        continue;
      }
      config.params[spec.key] = spec.fallback;
    } else if (it->second < spec.min_value || it->second > spec.max_value) {
      offenders.push_back("out-of-range " + spec.key);
    } else {
      config.params[spec.key] = it->second;
    }
  }
  for (const auto& [key, value] : overrides) {
    (void)value;
    bool known = false;
    for (const auto& spec : def->params) known = known || spec.key == key;
    if (!known) offenders.push_back("unknown " + key);
  }
  if (!offenders.empty()) {
    std::string msg = "invalid parameters for " + name + ":";
    for (const auto& o : offenders) msg += " " + o;
    throw std::invalid_argument(msg);
  }
  return config;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const ExperimentDef* def = find_experiment(config.experiment);
  if (!def) throw std::invalid_argument("unknown experiment: " + config.experiment);
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report = def->run(config);
  report.config = config;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string table_csv(const Table& table) {
  std::ostringstream out;
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::logic_error("table_csv: ragged row in " + table.name);
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json table_json(const Table& t) {
  nlohmann::json j;
  j["name"] = t.name;
  j["columns"] = t.columns;
  j["rows"] = t.rows;
  return j;
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["experiment"] = report.config.experiment;
  j["seed"] = report.config.seed;
  j["replicas"] = report.config.replicas;
  j["params"] = report.config.params;
  j["wall_seconds"] = report.wall_seconds;
  j["passed"] = report.passed();
  auto& checks = j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"observed", c.observed},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  auto& summary = j["summary"] = nlohmann::json::object();
  for (const auto& [k, v] : report.summary) summary[k] = v;
  auto& tables = j["tables"] = nlohmann::json::array();
  for (const auto& t : report.tables) tables.push_back(table_json(t));
  return j.dump(2);
}

std::string registry_json() {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& def : registry()) {
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& p : def.params)
      keys.push_back({{"key", p.key},
                      {"required", p.required},
                      {"default", p.fallback},
                      {"doc", p.doc}});
    j.push_back({{"name", def.name},
                 {"operation", def.operation},
                 {"claim", def.claim},
                 {"params", keys}});
  }
  return j.dump(2);
}

int worker_cap() {
  if (const char* env = std::getenv("ERGODIC_LAB_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void for_each_replica(int n, const std::function<void(int)>& body) {
  const int workers = std::min(worker_cap(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  for (auto& th : pool) th.join();
}

}  // namespace ergodic::harness
