#pragma once

#include "growup/io.hpp"
#include "growup/presets.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace growup {

struct RunContext {
  std::filesystem::path out = "out";
  unsigned long long seed = 1;
  int workers = 0;
  bool reproducible = false;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

class CheckLog {
 public:
  void add(const std::string& name, bool passed, const std::string& detail = {});
  // Runs fn and records a failed check instead of propagating numerical errors.
  template <class Fn>
  void guarded(const std::string& name, Fn fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      add(name, false, std::string("error: ") + e.what());
    }
  }
  const std::vector<Check>& checks() const { return checks_; }
  std::size_t failures() const;
  bool ok() const { return failures() == 0; }
  json to_json() const;
  void append(const CheckLog& other);

 private:
  std::vector<Check> checks_;
};

// Single-file JSON configuration. Top-level keys: preset, system,
// nonlinearity, seed, workers, and one section per subcommand. Unknown keys
// are rejected.
struct ExperimentConfig {
  std::string preset = "saturated_random(1)";
  std::optional<SplitSystem> system;
  double l_f = 0.2;
  double c_f = 0.5;
  std::optional<unsigned long long> seed;
  std::optional<int> workers;
  json simulate = json::object();
  json classify = json::object();
  json attractor = json::object();
  json lp = json::object();
  json bounds = json::object();
  json thickness = json::object();
  json infinity = json::object();
  json pullback = json::object();

  static ExperimentConfig from_json(const json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  Preset build() const;
};

struct PullbackOverrides {
  std::optional<double> t;
  std::optional<std::vector<double>> ladder;
  std::optional<std::string> example;
};

CheckLog run_simulate(const ExperimentConfig& cfg, const RunContext& ctx);
CheckLog run_classify(const ExperimentConfig& cfg, const RunContext& ctx);
CheckLog run_attractor_gt(const ExperimentConfig& cfg, const RunContext& ctx);
CheckLog run_attractor_lp(const ExperimentConfig& cfg, const RunContext& ctx);
CheckLog run_bounds_table(const ExperimentConfig& cfg, const RunContext& ctx);
CheckLog run_thickness(const ExperimentConfig& cfg, const RunContext& ctx);
CheckLog run_infinity(const ExperimentConfig& cfg, const RunContext& ctx);
CheckLog run_pullback(const ExperimentConfig& cfg, const RunContext& ctx,
                      const PullbackOverrides& overrides = {});

// Worked examples and counterexamples with their stated facts.
CheckLog run_examples(const RunContext& ctx);

// Invariant suite over all modules at reduced sizes.
CheckLog run_selftest(const RunContext& ctx);

// report.json with every check; returns the process exit status (0 or 1).
int finish_run(const std::string& command, const CheckLog& log, const RunContext& ctx);

}  // namespace growup
