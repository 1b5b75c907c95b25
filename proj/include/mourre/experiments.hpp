#pragma once

#include <map>
#include <string>

#include "mourre/mourre_chain.hpp"
#include "mourre/resonance.hpp"

namespace mourre {

/// Flat key = value configuration (one pair per line, '#' comments).
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> kv;  // raw pairs, echoed in reports
  std::string out_dir = "out";
  std::uint64_t seed = 20250810;

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  RVec get_list(const std::string& key, const RVec& fallback) const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

struct CriterionResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct RunReport {
  std::string experiment;
  std::string verifies;  // property slug from the registry coverage table
  std::map<std::string, std::string> config_echo;
  std::vector<std::string> columns;
  std::vector<RVec> rows;
  std::map<std::string, double> fitted;
  std::vector<CriterionResult> checks;
  bool pass = false;
  bool error = false;
  std::string error_message;
  double wall_seconds = 0.0;
  std::string version;
};

/// Registry coverage table: experiment name -> verified property slug.
const std::map<std::string, std::string>& experiment_registry();

RunReport run_experiment(const ExperimentConfig& config);

/// Writes report.json, table.csv (17 significant digits, stable column order)
/// and summary.txt into dir. Returns the file paths.
std::vector<std::string> write_report(const RunReport& report, const std::string& dir);

/// Sweep helper: runs fn(i) for i in [0, n) on up to MOURRE_LAB_THREADS
/// workers; results must be written into independent slots by fn.
void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mourre
