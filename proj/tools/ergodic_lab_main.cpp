#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergodic_lab/experiments.hpp"

namespace {

using ergodic::harness::ExperimentDef;

struct Invocation {
  std::string config_file;
  std::uint64_t seed = 1;
  int replicas = 1;
  std::string out_dir;
  std::string format = "csv";
  std::vector<std::string> sets;
};

// key=value line: numeric keys become parameters, seed/replicas are
// harness-level
void parse_kv(const std::string& text, std::map<std::string, double>& params,
              std::uint64_t& seed, int& replicas) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("expected key=value, got: " + text);
  const std::string key = text.substr(0, eq);
  const std::string value = text.substr(eq + 1);
  if (key == "seed") {
    seed = std::stoull(value);
    return;
  }
  if (key == "replicas") {
    replicas = std::stoi(value);
    return;
  }
  std::size_t used = 0;
  const double v = std::stod(value, &used);
  if (used != value.size())
    throw std::invalid_argument("non-numeric value for " + key + ": " + value);
  params[key] = v;
}

int run_one(const ExperimentDef& def, const Invocation& inv,
            const CLI::App& sub) {
  std::map<std::string, double> params;
  std::uint64_t seed = 1;
  int replicas = 1;
  if (!inv.config_file.empty()) {
    std::ifstream in(inv.config_file);
    if (!in)
      throw std::invalid_argument("cannot open config file: " + inv.config_file);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      parse_kv(line.substr(first, last - first + 1), params, seed, replicas);
    }
  }
  // command-line flags win over the file
  if (sub.count("--seed")) seed = inv.seed;
  if (sub.count("--replicas")) replicas = inv.replicas;
  for (const auto& s : inv.sets) parse_kv(s, params, seed, replicas);

  const auto config =
      ergodic::harness::make_config(def.name, params, seed, replicas);
  const auto report = ergodic::harness::run_experiment(config);

  if (!inv.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(inv.out_dir);
    if (inv.format == "json") {
      std::ofstream(fs::path(inv.out_dir) / (def.name + "_report.json"))
          << ergodic::harness::report_json(report);
    } else {
      for (const auto& table : report.tables)
        std::ofstream(fs::path(inv.out_dir) /
                      (def.name + "_" + table.name + ".csv"))
            << ergodic::harness::table_csv(table);
      std::ofstream(fs::path(inv.out_dir) / (def.name + "_summary.json"))
          << ergodic::harness::report_json(report);
    }
  }

  std::cout << ergodic::harness::report_json(report) << "\n";
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << def.name << "/" << c.name
              << " observed=" << ergodic::harness::format_double(c.observed)
              << " tolerance=" << ergodic::harness::format_double(c.tolerance)
              << "\n";
  return report.passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergodic_lab: long-time-behavior experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "print the experiment registry");
  std::string list_format = "text";
  list->add_option("--format", list_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  std::map<const CLI::App*, const ExperimentDef*> defs;
  std::map<const CLI::App*, Invocation> invocations;
  for (const auto& def : ergodic::harness::registry()) {
    auto* sub = app.add_subcommand(def.name, def.claim);
    auto& inv = invocations[sub];
    defs[sub] = &def;
    sub->add_option("--config", inv.config_file, "key=value config file");
    sub->add_option("--seed", inv.seed, "master seed");
    sub->add_option("--replicas", inv.replicas, "replica multiplier")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", inv.out_dir, "output directory");
    sub->add_option("--format", inv.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", inv.sets, "parameter override key=value");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (list->parsed()) {
      if (list_format == "json") {
        std::cout << ergodic::harness::registry_json() << "\n";
      } else {
        for (const auto& def : ergodic::harness::registry()) {
          std::printf("%-22s %-40s %s\n", def.name.c_str(),
                      def.operation.c_str(), def.claim.c_str());
          for (const auto& p : def.params)
            std::printf("    %-18s %s%s (default %g)\n", p.key.c_str(),
                        p.doc.c_str(), p.required ? " [required]" : "",
                        p.fallback);
        }
      }
      return 0;
    }
    for (const auto* sub : app.get_subcommands())
      if (defs.count(sub)) return run_one(*defs.at(sub), invocations.at(sub), *sub);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
