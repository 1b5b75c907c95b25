#include <cstdio>
#include <cstring>
#include <string>

#include "mourre/experiments.hpp"

namespace {

void usage(const char* argv0) {
  std::printf(
      "usage: %s <config-path> [--out DIR] [--quiet]\n"
      "\n"
      "Runs one experiment described by a flat key = value config file and\n"
      "writes report.json, table.csv and summary.txt.\n"
      "Exit status: 0 pass, 2 experiment fail, 1 error.\n",
      argv0);
}

}  // namespace

int main(int argc, char** argv) {
  std::string config_path;
  std::string out_override;
  bool quiet = false;

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--help" || arg == "-h") {
      usage(argv[0]);
      return 0;
    } else if (arg == "--quiet") {
      quiet = true;
    } else if (arg == "--out") {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "error: --out needs a directory\n");
        return 1;
      }
      out_override = argv[++i];
    } else if (!arg.empty() && arg[0] == '-') {
      std::fprintf(stderr, "error: unknown option %s\n", arg.c_str());
      usage(argv[0]);
      return 1;
    } else if (config_path.empty()) {
      config_path = arg;
    } else {
      std::fprintf(stderr, "error: more than one config path\n");
      return 1;
    }
  }
  if (config_path.empty()) {
    usage(argv[0]);
    return 1;
  }

  try {
    mourre::ExperimentConfig cfg = mourre::load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    const mourre::RunReport rep = mourre::run_experiment(cfg);
    const auto files = mourre::write_report(rep, cfg.out_dir);
    if (!quiet) {
      std::printf("%s (%s): %s in %.1f s\n", rep.experiment.c_str(),
                  rep.verifies.c_str(), rep.error ? "ERROR" : (rep.pass ? "PASS" : "FAIL"),
                  rep.wall_seconds);
      if (rep.error) std::printf("  %s\n", rep.error_message.c_str());
      for (const auto& c : rep.checks)
        std::printf("  [%s] %s (%.6g)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.value);
      for (const auto& f : files) std::printf("  wrote %s\n", f.c_str());
    }
    if (rep.error) return 1;
    return rep.pass ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
