// Command-line front end: simulate / refine / validate / residuals / plot.
#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "sphflow/harness.hpp"
#include "sphflow/numerics.hpp"

namespace {

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const sphflow::Config cfg = sphflow::Config::parse_file(config_path);
  const sphflow::Scenario sc = sphflow::scenario_from_config(cfg);
  const sphflow::SimulateResult res = sphflow::simulate_to_dir(sc, out_dir);
  sphflow::write_plot_script(out_dir);
  std::printf("run directory: %s\n", res.dir.c_str());
  std::printf("steps: %ld, records: %zu, final t = %s\n", res.run.steps,
              res.run.records.size(),
              sphflow::format_full(res.run.final_state.time).c_str());
  if (res.run.aborted) {
    std::printf("ABORTED: %s\n", res.run.abort_reason.c_str());
    return 2;
  }
  return 0;
}

int cmd_refine(const std::string& config_path, const std::string& out_dir,
               const std::string& tests_path) {
  const sphflow::Config cfg = sphflow::Config::parse_file(config_path);
  std::vector<sphflow::ResidualTestSpec> tests;
  if (!tests_path.empty())
    tests = sphflow::residual_tests_from_config(
        sphflow::Config::parse_file(tests_path));
  const sphflow::RefinementReport rep =
      sphflow::run_refinement(cfg, out_dir, std::move(tests));
  std::printf("report directory: %s\n", out_dir.c_str());
  for (const auto& f : rep.flags)
    std::printf("flag %-28s %s  (%s)\n", f.name.c_str(),
                f.pass ? "pass" : "FAIL", f.detail.c_str());
  return rep.pass() ? 0 : 1;
}

int cmd_validate(const std::string& config_path) {
  const sphflow::Config cfg = sphflow::Config::parse_file(config_path);
  const sphflow::Scenario sc = sphflow::scenario_from_config(cfg);
  const sphflow::ValidationSummary summary = sphflow::validate_scenario(sc);
  std::fputs(summary.to_text().c_str(), stdout);
  return summary.pass() ? 0 : 1;
}

int cmd_residuals(const std::string& run_dir, const std::string& tests_path) {
  const sphflow::LoadedRun lr = sphflow::load_run_dir(run_dir);
  const auto tests = sphflow::residual_tests_from_config(
      sphflow::Config::parse_file(tests_path));
  const sphflow::ExtendedSolution sol(lr.snapshots, lr.scenario.model,
                                      lr.scenario.params);
  sphflow::QuadratureSpec quad;
  quad.panels = lr.scenario.quad_panels;
  auto rows = sphflow::evaluate_residuals(sol, tests, lr.level, quad);
  sphflow::apply_envelope_bounds(rows, {{lr.level, lr.scenario.params.epsilon}},
                                 lr.scenario.params.theta,
                                 lr.scenario.params.dim, tests);
  const std::string out = run_dir + "/residuals.csv";
  sphflow::write_residuals_csv(out, rows);
  std::printf("wrote %s (%zu rows)\n", out.c_str(), rows.size());
  return 0;
}

int cmd_plot(const std::string& run_dir) {
  sphflow::write_plot_script(run_dir);
  std::printf("wrote %s/plot.py\n", run_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Radial compressible flow simulator and verification harness"};
  app.require_subcommand(1);

  std::string sim_config, sim_out = "run";
  CLI::App* sim = app.add_subcommand(
      "simulate", "Run one scenario and write snapshots + diagnostics");
  sim->add_option("config", sim_config, "scenario configuration file")
      ->required();
  sim->add_option("--out", sim_out, "output directory (default: run)");

  std::string ref_config, ref_out = "refinement", ref_tests;
  CLI::App* ref = app.add_subcommand(
      "refine", "Run the refinement ladder and write report.json + CSVs");
  ref->add_option("config", ref_config, "scenario configuration file")
      ->required();
  ref->add_option("--out", ref_out,
                  "output directory (default: refinement)");
  ref->add_option("--tests", ref_tests,
                  "residual test configuration (default: built-in tests)");

  std::string val_config;
  CLI::App* val = app.add_subcommand(
      "validate", "Check coefficient conditions, admissibility and data "
                  "hypotheses");
  val->add_option("config", val_config, "scenario configuration file")
      ->required();

  std::string res_dir, res_tests;
  CLI::App* res = app.add_subcommand(
      "residuals", "Evaluate weak-form residuals over a stored run");
  res->add_option("run_dir", res_dir, "run directory written by simulate")
      ->required();
  res->add_option("tests", res_tests, "residual test configuration file")
      ->required();

  std::string plot_dir;
  CLI::App* plot =
      app.add_subcommand("plot", "Emit a plotting script over the CSVs");
  plot->add_option("run_dir", plot_dir, "run or refinement directory")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out);
    if (ref->parsed()) return cmd_refine(ref_config, ref_out, ref_tests);
    if (val->parsed()) return cmd_validate(val_config);
    if (res->parsed()) return cmd_residuals(res_dir, res_tests);
    if (plot->parsed()) return cmd_plot(plot_dir);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 3;
  }
  return 0;
}
