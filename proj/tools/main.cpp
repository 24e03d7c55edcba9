#include "growup/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

using namespace growup;

int main(int argc, char** argv) {
  CLI::App app{"Unbounded attractors of slowly non-dissipative systems"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir = "out";
  unsigned long long seed = 0;
  int workers = -1;
  bool reproducible = false;
  app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for all stochastic sampling");
  app.add_option("--workers", workers, "worker threads (default: available cores)");
  app.add_flag("--reproducible", reproducible, "omit timestamp lines from artifacts");

  const std::vector<std::pair<std::string, std::string>> simple = {
      {"simulate", "integrate one trajectory"},
      {"classify", "classify a sampled set (escaping / bounded / mixed)"},
      {"attractor-gt", "attractor graph by the graph transform"},
      {"attractor-lp", "attractor graph by the Lyapunov-Perron fixed point"},
      {"bounds-table", "Lipschitz threshold and remark tables"},
      {"thickness", "attractor thickness decay"},
      {"infinity", "dynamics at infinity on the sphere"},
      {"examples", "worked examples and counterexamples"},
      {"selftest", "invariant suite over all modules"}};
  for (const auto& [name, help] : simple) app.add_subcommand(name, help);

  PullbackOverrides po;
  double t = 0.0;
  std::vector<double> ladder;
  std::string example;
  CLI::App* pull = app.add_subcommand("pullback", "pullback attractor sections of a process");
  CLI::Option* t_opt = pull->add_option("--t", t, "section time");
  CLI::Option* ladder_opt = pull->add_option("--ladder", ladder, "pullback depths")->delimiter(',');
  CLI::Option* ex_opt = pull->add_option("--example", example, "sin-forced | autonomous-consistency | oscillating-b")
                            ->check(CLI::IsMember({"sin-forced", "autonomous-consistency", "oscillating-b"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    RunContext ctx;
    ctx.out = out_dir;
    ctx.reproducible = reproducible;
    ctx.seed = seed ? seed : cfg.seed.value_or(1);
    ctx.workers = workers >= 0 ? workers : cfg.workers.value_or(0);
    if (ctx.workers == 0) ctx.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (*t_opt) po.t = t;
    if (*ladder_opt) po.ladder = ladder;
    if (*ex_opt) po.example = example;

    CheckLog log;
    if (cmd == "simulate") log = run_simulate(cfg, ctx);
    else if (cmd == "classify") log = run_classify(cfg, ctx);
    else if (cmd == "attractor-gt") log = run_attractor_gt(cfg, ctx);
    else if (cmd == "attractor-lp") log = run_attractor_lp(cfg, ctx);
    else if (cmd == "bounds-table") log = run_bounds_table(cfg, ctx);
    else if (cmd == "thickness") log = run_thickness(cfg, ctx);
    else if (cmd == "infinity") log = run_infinity(cfg, ctx);
    else if (cmd == "pullback") log = run_pullback(cfg, ctx, po);
    else if (cmd == "examples") log = run_examples(ctx);
    else log = run_selftest(ctx);
    return finish_run(cmd, log, ctx);
  } catch (const ConfigError& e) {
    std::cerr << json({{"command", cmd}, {"config_error", e.what()}}).dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json({{"command", cmd}, {"error", e.what()}}).dump() << '\n';
    return 1;
  }
}
