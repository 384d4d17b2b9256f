#pragma once

#include <map>
#include <string>
#include <vector>

#include "sphflow/coefficients.hpp"
#include "sphflow/config.hpp"
#include "sphflow/initial_data.hpp"
#include "sphflow/solver.hpp"
#include "sphflow/weak_residual.hpp"

namespace sphflow {

// Refinement ladder: eps_j = eps0 4^-j, delta_j = delta0 2^-j, K_j = K0 2^j,
// outer radius from the default rule R_j = eps_j^(-1/(2 dim)).
struct RefinementSchedule {
  int levels = 3;
  double eps0 = 0.1;
  double delta0 = 0.05;
  int K0 = 256;

  double eps_at(int j) const;
  double R_at(int j, int dim) const;
  double delta_at(int j) const;
  int K_at(int j) const;
  void validate() const;  // throws ConfigError
};

// Fully resolved single-run setup.
struct Scenario {
  CoefficientModel model;  // base (unregularized) coefficients
  RadialProfile profile;
  RegularizationParams params;
  StepControl control;
  RefinementSchedule schedule;
  double t_end = 0.5;
  double observer_dt = 0.05;
  int K = 256;
  DiagnosticsOptions diag;
  double ball_n = 1.0;     // comparison ball radius for refinement distances
  int quad_panels = 1024;  // radial quadrature subintervals
  std::string config_text; // verbatim source configuration
};

// Level 0 / plain simulation parameters (explicit epsilon/R/delta keys win
// over the schedule's level-0 values).
Scenario scenario_from_config(const Config& cfg);
// Parameters for refinement level j (ladder values; the explicit R key does
// not apply, the radius rule does).
Scenario scenario_for_level(const Config& cfg, int level);

// --- scenario validation -----------------------------------------------------

struct ValidationSummary {
  ValidationReport model_report;
  HypothesisReport hypothesis_report;
  bool dimension_bounds = false;
  bool alpha_admissible = false;
  bool growth_envelope = false;
  bool pass() const;
  std::string to_text() const;
};

ValidationSummary validate_scenario(const Scenario& sc);

// --- residual test specifications ---------------------------------------------

struct ResidualTestSpec {
  std::string id;
  double a = 0.0, b = 0.0;
  double flank_in = 0.0, flank_out = 0.0;
  double t1 = 0.0, t2 = 0.0;
};

std::vector<ResidualTestSpec> residual_tests_from_config(const Config& cfg);
// Three interior bumps (the residual-convergence trio) plus one inner-wall
// probe used for the boundary-term decay check.
std::vector<ResidualTestSpec> default_residual_tests(double t_end);

// --- run directory input/output -------------------------------------------------

struct SnapshotHeader {
  int dim = 2;
  double gamma = 2.0, epsilon = 0.1, R = 0.0, delta = 0.0;
  int K = 0;
  double t = 0.0;
};

void write_snapshot(const std::string& path, const RadialState& s,
                    double gamma, const RegularizationParams& p);
RadialState read_snapshot(const std::string& path,
                          SnapshotHeader* header = nullptr);

// Truncate, floor, mollify and discretize the scenario's initial profile.
RadialState initial_state_for(const Scenario& sc);

struct SimulateResult {
  RunResult run;
  std::string dir;
};
// Creates dir, copies the configuration, runs, writes diagnostics.csv and
// snapshots/snap_NNNNNN.txt; on solver abort also writes abort.txt and the
// dump snapshot, and marks the result aborted.
SimulateResult simulate_to_dir(const Scenario& sc, const std::string& out_dir);

struct LoadedRun {
  Scenario scenario;
  std::vector<RadialState> snapshots;
  int level = 0;  // from level.cfg when the directory belongs to a ladder
};
LoadedRun load_run_dir(const std::string& dir);

// --- residual evaluation ----------------------------------------------------------

struct ResidualRow {
  int level = 0;
  std::string test_id;
  double t1 = 0.0, t2 = 0.0;
  double mass_residual = 0.0;
  // Defect of the regularized weak form: limit-form defect minus the
  // epsilon terms minus the inner-wall boundary term.  This is the quantity
  // that contracts under grid refinement at fixed regularization.
  double momentum_residual = 0.0;
  double boundary = 0.0;
  double epsilon_terms = 0.0;       // measured
  double epsilon_terms_bound = 0.0; // envelope anchored at the first level
};

std::vector<ResidualRow> evaluate_residuals(
    const ExtendedSolution& sol, const std::vector<ResidualTestSpec>& tests,
    int level, const QuadratureSpec& q);

// Fits the envelope constant per test on the lowest level present and fills
// epsilon_terms_bound = C * sqrt(eps_level) * n^(dim (1-theta)/2).
void apply_envelope_bounds(std::vector<ResidualRow>& rows,
                           const std::map<int, double>& level_epsilon,
                           double theta, int dim,
                           const std::vector<ResidualTestSpec>& tests);

extern const char kResidualsCsvHeader[];
void write_residuals_csv(const std::string& path,
                         const std::vector<ResidualRow>& rows);

// --- refinement study ---------------------------------------------------------------

struct LevelSummary {
  int level = 0;
  double epsilon = 0.0, R = 0.0, delta = 0.0;
  int K = 0;
  long steps = 0;
  bool aborted = false;
  std::string abort_reason;
  std::map<std::string, double> maxima;  // per-functional max over records
};

struct DistanceRow {
  int coarse = 0, fine = 0;
  double rho_l1_max = 0.0;        // max over ticks of L1 density difference
  double momentum_l2_lbeta = 0.0; // L2 in t of the L-beta momentum difference
  double sqrt_rho_u_l2 = 0.0;     // space-time L2 of sqrt(rho) u difference
};

struct FlagRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RefinementReport {
  std::vector<LevelSummary> per_level;
  std::vector<DistanceRow> distances;
  std::vector<FlagRow> flags;
  std::vector<ResidualRow> residuals;
  bool pass() const;
};

// Runs every level of the ladder (levels in parallel), writes level
// directories, residuals.csv and report.json under out_dir.  An empty test
// vector selects the built-in default tests.
RefinementReport run_refinement(const Config& cfg, const std::string& out_dir,
                                std::vector<ResidualTestSpec> tests = {});

void write_report_json(const std::string& path, const RefinementReport& rep);

// Distances between consecutive-level solutions on the ball of radius n,
// compared at the nominal observer ticks.
DistanceRow solution_distances(const ExtendedSolution& coarse,
                               const ExtendedSolution& fine, double ball_n,
                               double beta, double observer_dt, double t_end,
                               int quad_panels);

// Emits a matplotlib script rendering the CSV/JSON artifacts of a run or
// refinement directory.
void write_plot_script(const std::string& dir);

}  // namespace sphflow
