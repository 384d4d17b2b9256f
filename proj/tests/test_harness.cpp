#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sphflow/config.hpp"
#include "sphflow/harness.hpp"

using namespace sphflow;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Small fast ladder used by the directory-artifact tests.
const char* kTinyConfig =
    "N = 2\n"
    "alpha = 0.5\n"
    "coeff.kind = saint_venant\n"
    "init.kind = gaussian\n"
    "schedule.levels = 2\n"
    "schedule.eps0 = 0.1\n"
    "schedule.delta0 = 0.05\n"
    "schedule.K0 = 16\n"
    "run.t_end = 0.05\n"
    "run.cfl = 0.3\n"
    "run.observer_dt = 0.0125\n"
    "eval.quad_subintervals = 128\n";

}  // namespace

TEST_CASE("configuration parsing basics") {
  auto cfg = Config::parse_string(
      "a = 1\nsection.key = two  # comment\n\n# full comment\nflag = true\n");
  CHECK(cfg.get_int("a") == 1);
  CHECK(cfg.get_string("section.key") == "two");
  CHECK(cfg.get_bool("flag"));
  CHECK(cfg.get_double("missing", 2.5) == 2.5);
  CHECK(cfg.has("a"));
  CHECK_FALSE(cfg.has("b"));
  CHECK_THROWS_AS(cfg.get_double("missing"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("x = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(cfg.require_known({"a", "flag"}, {}), ConfigError);
  CHECK_NOTHROW(cfg.require_known({"a", "flag"}, {"section."}));
}

TEST_CASE("refinement schedule ladder") {
  RefinementSchedule sch;  // levels 3, eps0 0.1, delta0 0.05, K0 256
  CHECK_NOTHROW(sch.validate());
  CHECK(sch.eps_at(0) == 0.1);
  CHECK(sch.eps_at(1) == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(sch.eps_at(2) == doctest::Approx(0.00625).epsilon(1e-15));
  CHECK(sch.R_at(0, 2) ==
        doctest::Approx(std::pow(0.1, -0.25)).epsilon(1e-15));
  CHECK(sch.R_at(2, 2) ==
        doctest::Approx(std::pow(0.00625, -0.25)).epsilon(1e-15));
  CHECK(sch.delta_at(1) == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(sch.K_at(0) == 256);
  CHECK(sch.K_at(1) == 512);
  CHECK(sch.K_at(2) == 1024);

  sch.levels = 1;
  CHECK_THROWS_WITH_AS(sch.validate(), doctest::Contains("at least 2 levels"),
                       ConfigError);
  sch.levels = 3;
  sch.eps0 = 1.0;
  CHECK_THROWS_AS(sch.validate(), ConfigError);
  sch.eps0 = 0.1;
  sch.K0 = 4;
  CHECK_THROWS_AS(sch.validate(), ConfigError);
}

TEST_CASE("scenario resolution from configuration text") {
  auto sc = scenario_from_config(
      Config::parse_string("coeff.kind = saint_venant\n"));
  CHECK(sc.params.dim == 2);
  CHECK(sc.params.epsilon == 0.1);
  CHECK(sc.params.alpha == 0.5);
  CHECK(sc.params.R == doctest::Approx(std::pow(0.1, -0.25)).epsilon(1e-15));
  CHECK(sc.t_end == 0.5);
  CHECK(sc.observer_dt == 0.05);
  CHECK(sc.K == 256);
  CHECK(sc.diag.beta == 1.5);
  CHECK(sc.ball_n == 1.0);
  CHECK(sc.model.gamma == 2.0);

  // explicit epsilon/R keys beat the schedule at level 0
  auto sc2 = scenario_from_config(Config::parse_string(
      "coeff.kind = saint_venant\nepsilon = 0.2\nR = 1.2\ndelta = 0.01\n"));
  CHECK(sc2.params.epsilon == 0.2);
  CHECK(sc2.params.R == 1.2);
  CHECK(sc2.params.delta == 0.01);

  // structural exponent in three dimensions
  auto sc3 =
      scenario_from_config(Config::parse_string("N = 3\neval.beta = 9.9\n"));
  CHECK(sc3.diag.beta == doctest::Approx(5.0 / 3.0).epsilon(1e-16));

  CHECK_THROWS_AS(
      scenario_from_config(Config::parse_string("bogus_key = 1\n")),
      ConfigError);
  CHECK_THROWS_AS(scenario_from_config(Config::parse_string(
                      "coeff.kind = saint_venant\ncoeff.nu1 = 3\n")),
                  ConfigError);
  CHECK_THROWS_AS(scenario_from_config(Config::parse_string(
                      "coeff.kind = saint_venant\ngamma = 1.4\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      scenario_from_config(Config::parse_string("run.t_end = -1\n")),
      ConfigError);
  CHECK_THROWS_AS(scenario_from_config(Config::parse_string(
                      "eval.quad_subintervals = 8\n")),
                  ConfigError);
}

TEST_CASE("per-level scenario parameters follow the ladder") {
  auto cfg = Config::parse_string(kTinyConfig);
  auto l0 = scenario_for_level(cfg, 0);
  auto l1 = scenario_for_level(cfg, 1);
  CHECK(l0.params.epsilon == 0.1);
  CHECK(l0.K == 16);
  CHECK(l1.params.epsilon == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(l1.params.R ==
        doctest::Approx(std::pow(0.025, -0.25)).epsilon(1e-15));
  CHECK(l1.params.delta == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(l1.K == 32);
  CHECK_THROWS_AS(scenario_for_level(cfg, 2), ConfigError);
  CHECK_THROWS_AS(scenario_for_level(cfg, -1), ConfigError);
}

TEST_CASE("bundled scenario passes validation") {
  auto cfg = Config::parse_file(std::string(SPHFLOW_CONFIG_DIR) +
                                "/saint_venant.cfg");
  auto sc = scenario_from_config(cfg);
  auto summary = validate_scenario(sc);
  CHECK(summary.pass());
  CHECK(summary.dimension_bounds);
  CHECK(summary.alpha_admissible);
  CHECK(summary.growth_envelope);
  CHECK_FALSE(summary.to_text().empty());
}

TEST_CASE("residual test specifications") {
  auto defaults = default_residual_tests(0.5);
  REQUIRE(defaults.size() == 4);
  CHECK(defaults[0].id == "interior_a");
  CHECK(defaults[3].id == "wall_probe");
  for (const auto& t : defaults) {
    CHECK(t.t1 == 0.0);
    CHECK(t.t2 == 0.5);
    CHECK(t.b > t.a);
  }

  auto cfg = Config::parse_file(std::string(SPHFLOW_CONFIG_DIR) +
                                "/residual_tests.cfg");
  auto specs = residual_tests_from_config(cfg);
  REQUIRE(specs.size() == 4);
  CHECK(specs[0].id == "interior_a");
  CHECK(specs[0].flank_in == 0.25);
  CHECK(specs[0].flank_out == 0.25);  // defaults to flank
  CHECK(specs[3].flank_in == 0.55);
  CHECK(specs[3].flank_out == 0.30);
  CHECK(specs[0].t1 == 0.0);
  CHECK(specs[0].t2 == 0.0);  // full stored horizon

  CHECK_THROWS_AS(
      residual_tests_from_config(Config::parse_string("tests.count = 0\n")),
      ConfigError);
  CHECK_THROWS_AS(residual_tests_from_config(Config::parse_string(
                      "tests.count = 1\ntests.0.id = x\ntests.0.a = 0.1\n"
                      "tests.0.b = 0.9\ntests.0.flank = 0.2\n"
                      "tests.9.id = stray\n")),
                  ConfigError);
}

TEST_CASE("snapshot files round trip") {
  auto cfg = Config::parse_string(kTinyConfig);
  auto sc = scenario_from_config(cfg);
  auto st = initial_state_for(sc);
  st.time = 0.25;

  const char* path = "tmp_snapshot.txt";
  write_snapshot(path, st, sc.model.gamma, sc.params);
  SnapshotHeader hdr;
  auto back = read_snapshot(path, &hdr);

  CHECK(hdr.dim == 2);
  CHECK(hdr.gamma == 2.0);
  CHECK(hdr.epsilon == 0.1);
  CHECK(hdr.K == 16);
  CHECK(hdr.t == 0.25);
  CHECK(back.time == 0.25);
  REQUIRE(back.node_r.size() == st.node_r.size());
  for (std::size_t i = 0; i < st.node_r.size(); ++i) {
    CHECK(back.node_r[i] == st.node_r[i]);  // full-precision text round trip
    CHECK(back.node_u[i] == st.node_u[i]);
  }
  for (int j = 0; j < st.cells(); ++j) {
    CHECK(back.cell_rho[j] == st.cell_rho[j]);
    CHECK(back.cell_mass[j] ==
          doctest::Approx(st.cell_mass[j]).epsilon(1e-13));
  }
  CHECK_NOTHROW(back.require_valid());
  fs::remove(path);

  std::ofstream bad("tmp_bad_snapshot.txt");
  bad << "not a snapshot\n";
  bad.close();
  CHECK_THROWS_AS(read_snapshot("tmp_bad_snapshot.txt"), SolverError);
  fs::remove("tmp_bad_snapshot.txt");
}

TEST_CASE("simulation directories carry the run artifacts") {
  const std::string dir = "tmp_sim_run";
  fs::remove_all(dir);
  auto cfg = Config::parse_string(kTinyConfig);
  auto sc = scenario_from_config(cfg);
  auto result = simulate_to_dir(sc, dir);
  CHECK_FALSE(result.run.aborted);
  CHECK(result.run.steps > 0);
  CHECK(fs::exists(fs::path(dir) / "scenario.cfg"));
  CHECK(fs::exists(fs::path(dir) / "diagnostics.csv"));
  CHECK(read_file((fs::path(dir) / "scenario.cfg").string()) ==
        sc.config_text);

  auto rows = read_diagnostics_csv((fs::path(dir) / "diagnostics.csv").string());
  CHECK(rows.size() == result.run.records.size());

  auto lr = load_run_dir(dir);
  CHECK(lr.level == 0);
  CHECK(lr.scenario.K == sc.K);
  CHECK(lr.scenario.params.epsilon == sc.params.epsilon);
  REQUIRE(lr.snapshots.size() == result.run.snapshots.size());
  for (std::size_t k = 0; k < lr.snapshots.size(); ++k) {
    CHECK(lr.snapshots[k].time == result.run.snapshots[k].time);
    CHECK(lr.snapshots[k].node_r == result.run.snapshots[k].node_r);
  }

  // byte-for-byte determinism of a repeated simulation
  const std::string dir2 = "tmp_sim_run_b";
  fs::remove_all(dir2);
  simulate_to_dir(sc, dir2);
  CHECK(read_file((fs::path(dir) / "diagnostics.csv").string()) ==
        read_file((fs::path(dir2) / "diagnostics.csv").string()));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("identical solutions are at distance zero") {
  auto cfg = Config::parse_string(kTinyConfig);
  auto sc = scenario_from_config(cfg);
  auto st = initial_state_for(sc);
  StepControl ctl = sc.control;
  auto res = run(st, sc.model, sc.params, ctl, sc.t_end, sc.observer_dt);
  REQUIRE_FALSE(res.aborted);

  auto reg = sc.params;
  ExtendedSolution a(res.snapshots, sc.model, reg);
  ExtendedSolution b(res.snapshots, sc.model, reg);
  auto d = solution_distances(a, b, sc.ball_n, sc.diag.beta, sc.observer_dt,
                              sc.t_end, sc.quad_panels);
  CHECK(d.rho_l1_max == 0.0);
  CHECK(d.momentum_l2_lbeta == 0.0);
  CHECK(d.sqrt_rho_u_l2 == 0.0);
}

TEST_CASE("envelope bounds anchor at the lowest level") {
  // two levels, one test: the bound at the anchor level equals the measured
  // magnitude, and scales by sqrt(eps1/eps0) = 1/2 on the next level
  std::vector<ResidualTestSpec> tests = {
      {"probe", 0.5, 1.0, 0.2, 0.2, 0.0, 0.5}};
  std::vector<ResidualRow> rows(2);
  rows[0].level = 0;
  rows[0].test_id = "probe";
  rows[0].epsilon_terms = -0.08;
  rows[1].level = 1;
  rows[1].test_id = "probe";
  rows[1].epsilon_terms = 0.03;
  std::map<int, double> eps = {{0, 0.1}, {1, 0.025}};
  apply_envelope_bounds(rows, eps, 0.75, 2, tests);
  CHECK(rows[0].epsilon_terms_bound == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(rows[1].epsilon_terms_bound == doctest::Approx(0.04).epsilon(1e-14));
}

TEST_CASE("refinement study produces the full artifact set") {
  const std::string dir = "tmp_refine";
  fs::remove_all(dir);
  auto cfg = Config::parse_string(kTinyConfig);
  auto rep = run_refinement(cfg, dir);

  REQUIRE(rep.per_level.size() == 2);
  CHECK(rep.per_level[0].level == 0);
  CHECK(rep.per_level[0].K == 16);
  CHECK(rep.per_level[1].K == 32);
  CHECK_FALSE(rep.per_level[0].aborted);
  CHECK_FALSE(rep.per_level[1].aborted);
  CHECK(rep.per_level[0].steps > 0);
  CHECK(rep.per_level[0].maxima.count("energy") == 1);
  CHECK(rep.per_level[0].maxima.count("mass") == 1);
  CHECK(rep.per_level[0].maxima.count("pressure_partial_norm") == 1);

  REQUIRE(rep.distances.size() == 1);
  CHECK(rep.distances[0].coarse == 0);
  CHECK(rep.distances[0].fine == 1);
  CHECK(rep.distances[0].rho_l1_max > 0.0);

  CHECK(rep.residuals.size() == 8);  // 2 levels x 4 default tests

  bool saw_levels_completed = false;
  for (const auto& f : rep.flags)
    if (f.name == "levels_completed") {
      saw_levels_completed = true;
      CHECK(f.pass);
    }
  CHECK(saw_levels_completed);

  CHECK(fs::exists(fs::path(dir) / "report.json"));
  CHECK(fs::exists(fs::path(dir) / "residuals.csv"));
  CHECK(fs::exists(fs::path(dir) / "plot.py"));
  CHECK(fs::exists(fs::path(dir) / "level0" / "diagnostics.csv"));
  CHECK(fs::exists(fs::path(dir) / "level0" / "level.cfg"));
  CHECK(fs::exists(fs::path(dir) / "level1" / "diagnostics.csv"));

  const std::string csv =
      read_file((fs::path(dir) / "residuals.csv").string());
  CHECK(csv.rfind(kResidualsCsvHeader, 0) == 0);

  // identical invocation = identical bytes
  const std::string dir2 = "tmp_refine_b";
  fs::remove_all(dir2);
  run_refinement(cfg, dir2);
  CHECK(read_file((fs::path(dir) / "report.json").string()) ==
        read_file((fs::path(dir2) / "report.json").string()));
  CHECK(read_file((fs::path(dir) / "residuals.csv").string()) ==
        read_file((fs::path(dir2) / "residuals.csv").string()));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("single-level ladders are rejected") {
  auto cfg = Config::parse_string(
      "coeff.kind = saint_venant\nschedule.levels = 1\n");
  CHECK_THROWS_WITH_AS(run_refinement(cfg, "tmp_never_created"),
                       doctest::Contains("at least 2 levels"), ConfigError);
  CHECK_FALSE(fs::exists("tmp_never_created"));
}
