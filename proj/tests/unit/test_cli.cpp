#include "gen.hpp"

#include "growup/experiment.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace growup;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("growup_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("system JSON round trip") {
  json j = {{"n_plus", 2},
            {"a_plus", {{2.0, 0.5}, {0.0, 1.0}}},
            {"minus_rates", {-1.0, json::array({-2.0, 3.0}), json::array({-2.0, -3.0})}},
            {"norm_choice", "max"}};
  SplitSystem sys = parse_system(j);
  CHECK(sys.n_plus() == 2);
  CHECK(sys.n_minus() == 3);
  CHECK(sys.minus_rates()(1) == cplx(-2.0, 3.0));
  CHECK(sys.norm() == NormChoice::Max);
  SplitSystem back = parse_system(system_to_json(sys));
  CHECK((Eigen::MatrixXd(back.a_plus()) - Eigen::MatrixXd(sys.a_plus())).norm() == 0.0);
  CHECK(back.minus_rates() == sys.minus_rates());
}

TEST_CASE("unknown and malformed keys are configuration errors") {
  CHECK_THROWS_AS(parse_system({{"n_plus", 1}, {"a_plus", {{1.0}}}, {"minus_rates", {-1.0}}, {"typo", 1}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_system({{"n_plus", 2}, {"a_plus", {{1.0}}}, {"minus_rates", {-1.0}}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"presett", "ex1"}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"lp", {{"tolerance", 1e-3}}}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"preset", "nope"}}).build(), ConfigError);
  CHECK_NOTHROW(ExperimentConfig::from_json({{"preset", "ex1"}, {"lp", {{"tol", 1e-3}}}}).build());
}

TEST_CASE("explicit system with a seeded saturated nonlinearity") {
  json j = {{"preset", "saturated_random(3)"},
            {"system", {{"n_plus", 1}, {"a_plus", {{1.0}}}, {"minus_rates", {-1.0, -1.5}}}},
            {"nonlinearity", {{"l_f", 0.1}, {"c_f", 0.3}}}};
  Preset pr = ExperimentConfig::from_json(j).build();
  CHECK(pr.f.lipschitz.constant == 0.1);
  CHECK(pr.f.c_f == 0.3);
  CHECK(pr.sys.n_minus() == 2);
}

TEST_CASE("state parsing checks dimensions") {
  State u = parse_state({{"p", {1.0, 2.0}}, {"q", {json::array({0.5, -0.5})}}}, 2, 1);
  CHECK(u.q(0) == cplx(0.5, -0.5));
  CHECK_THROWS_AS(parse_state({{"p", {1.0}}, {"q", {0.0}}}, 2, 1), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) * std::pow(10.0, k % 20 - 10);
    CHECK(std::stod(fmt(x)) == x);
  }
}

TEST_CASE("CSV tables omit the timestamp line when reproducible") {
  CsvTable t({"a", "b"});
  t.row({1.0, 0.1});
  t.row(std::vector<std::string>{"x", ""});
  CHECK(t.str(true) == "a,b\n1,0.10000000000000001\nx,\n");
  CHECK(t.str(false).rfind("# generated ", 0) == 0);
}

TEST_CASE("graph JSON round trip") {
  GridSpec grid = GridSpec::cube(2, 1.5, 4);
  GraphFn g(grid, 2);
  for (std::size_t i = 0; i < g.size(); ++i) g.value(i) << cplx(0.1 * i, -0.2), cplx(std::sin(i), 0.3);
  GraphFn back = graph_from_json(graph_to_json(g));
  CHECK(back.spec().same_lattice(g.spec()));
  CHECK(sup_distance(back, g) == 0.0);
}

TEST_CASE("check log and report") {
  CheckLog log;
  log.add("a", true);
  log.guarded("b", [] { throw SolverError("no convergence", 1.0); });
  CHECK(log.failures() == 1);
  CHECK_THROWS_AS(log.guarded("c", [] { throw ConfigError("bad"); }), ConfigError);
  RunContext ctx;
  ctx.out = scratch("report");
  CHECK(finish_run("unit", log, ctx) == 1);
  json rep = json::parse(slurp(ctx.out / "report.json"));
  CHECK(rep["failed"] == 1);
  CHECK(rep["checks"][1]["name"] == "b");
}

TEST_CASE("subcommands write their artifacts") {
  RunContext ctx;
  ctx.out = scratch("artifacts");
  ctx.reproducible = true;
  ExperimentConfig cfg;
  CHECK(run_simulate(cfg, ctx).ok());
  CHECK(std::filesystem::exists(ctx.out / "trajectory.csv"));
  CHECK(slurp(ctx.out / "trajectory.csv").rfind("time,p_1,q_1,q_2\n", 0) == 0);
  CHECK(run_attractor_gt(cfg, ctx).ok());
  CHECK(std::filesystem::exists(ctx.out / "gt_graph.json"));
  CHECK(run_bounds_table(cfg, ctx).ok());
  std::string table = slurp(ctx.out / "threshold_table.csv");
  CHECK(table.rfind("gamma1,gamma2,lp_full,lp_first_second,gt\n", 0) == 0);
}

TEST_CASE("reproducible runs are byte identical across worker counts") {
  ExperimentConfig cfg;
  RunContext a, b;
  a.out = scratch("det_a");
  b.out = scratch("det_b");
  a.reproducible = b.reproducible = true;
  a.workers = 1;
  b.workers = 3;
  run_attractor_lp(cfg, a);
  run_attractor_lp(cfg, b);
  for (const char* f : {"lp_graph.csv", "lp_log.csv", "lp_graph.json"})
    CHECK(slurp(a.out / f) == slurp(b.out / f));
}
