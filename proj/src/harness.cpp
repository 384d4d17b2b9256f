#include "sphflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "sphflow/diagnostics.hpp"
#include "sphflow/numerics.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace sphflow {

// --- refinement schedule -----------------------------------------------------

double RefinementSchedule::eps_at(int j) const {
  return eps0 * std::pow(4.0, -j);
}

double RefinementSchedule::R_at(int j, int dim) const {
  return RegularizationParams::default_radius(eps_at(j), dim);
}

double RefinementSchedule::delta_at(int j) const {
  return delta0 * std::pow(2.0, -j);
}

int RefinementSchedule::K_at(int j) const { return K0 << j; }

void RefinementSchedule::validate() const {
  if (levels < 2)
    throw ConfigError("refinement schedule: need at least 2 levels");
  if (levels > 12) throw ConfigError("refinement schedule: too many levels");
  if (!(eps0 > 0.0 && eps0 < 1.0))
    throw ConfigError("refinement schedule: eps0 must lie in (0, 1)");
  if (!(delta0 >= 0.0))
    throw ConfigError("refinement schedule: delta0 must be nonnegative");
  if (K0 < 8) throw ConfigError("refinement schedule: K0 must be at least 8");
}

// --- configuration -> scenario -----------------------------------------------

namespace {

std::vector<std::pair<double, double>> read_pair_table(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file: " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double a = 0.0, b = 0.0;
    if (ls >> a >> b) rows.emplace_back(a, b);
  }
  if (rows.size() < 2)
    throw ConfigError("table file needs at least 2 rows: " + path);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].first > rows[i - 1].first))
      throw ConfigError("table file rows must increase strictly: " + path);
  return rows;
}

CoefficientModel model_from_config(const Config& cfg, int dim) {
  (void)dim;
  const double gamma = cfg.get_double("gamma", 2.0);
  const std::string kind = cfg.get_string("coeff.kind", "power");
  if (kind == "saint_venant") {
    for (const char* key :
         {"coeff.c", "coeff.p", "coeff.nu", "coeff.nu1", "coeff.nu2",
          "coeff.table_path"})
      if (cfg.has(key))
        throw ConfigError(
            std::string("coeff.kind saint_venant takes no coefficient "
                        "parameters, found ") +
            key);
    if (cfg.has("gamma") && gamma != 2.0)
      throw ConfigError("coeff.kind saint_venant requires gamma = 2");
    return saint_venant_model();
  }
  const double nu = cfg.get_double("coeff.nu", 0.5);
  const double nu1 = cfg.get_double("coeff.nu1", 2.0);
  const double nu2 = cfg.get_double("coeff.nu2", 2.0);
  if (kind == "power") {
    return power_law_model(cfg.get_double("coeff.c", 1.0),
                           cfg.get_double("coeff.p", 1.0), nu, nu1, nu2,
                           gamma);
  }
  if (kind == "table") {
    const auto rows = read_pair_table(cfg.get_string("coeff.table_path"));
    std::vector<double> knots, values;
    for (const auto& [s, h] : rows) {
      knots.push_back(s);
      values.push_back(h);
    }
    return table_model(knots, values, nu, nu1, nu2, gamma);
  }
  throw ConfigError("coeff.kind: unknown kind '" + kind +
                    "' (expected power, table or saint_venant)");
}

RadialProfile profile_from_config(const Config& cfg) {
  const std::string kind = cfg.get_string("init.kind", "gaussian");
  if (kind == "gaussian") {
    return gaussian_profile(cfg.get_double("init.rho_base", 0.5),
                            cfg.get_double("init.rho_amp", 0.4),
                            cfg.get_double("init.rho_width", 0.5),
                            cfg.get_double("init.rho_center", 1.0),
                            cfg.get_double("init.m_amp", 0.1),
                            cfg.get_double("init.m_width", 1.0));
  }
  if (kind == "bump") {
    return bump_profile(cfg.get_double("init.rho_base", 0.1),
                        cfg.get_double("init.rho_amp", 0.4),
                        cfg.get_double("init.bump_a", 0.5),
                        cfg.get_double("init.bump_b", 1.5),
                        cfg.get_double("init.m_amp", 0.0),
                        cfg.get_double("init.m_width", 1.0));
  }
  if (kind == "table") {
    return table_profile(cfg.get_string("init.table_path"),
                         cfg.get_string("init.m_table_path", ""));
  }
  if (kind == "expr") {
    return expression_profile(cfg.get_string("init.rho_expr"),
                              cfg.get_string("init.m_expr", ""));
  }
  throw ConfigError("init.kind: unknown kind '" + kind +
                    "' (expected gaussian, bump, table or expr)");
}

const std::vector<std::string>& scenario_keys() {
  static const std::vector<std::string> keys = {
      "N",
      "gamma",
      "alpha",
      "epsilon",
      "R",
      "delta",
      "exterior",
      "coeff.kind",
      "coeff.c",
      "coeff.p",
      "coeff.nu",
      "coeff.nu1",
      "coeff.nu2",
      "coeff.table_path",
      "init.kind",
      "init.rho_base",
      "init.rho_amp",
      "init.rho_width",
      "init.rho_center",
      "init.m_amp",
      "init.m_width",
      "init.bump_a",
      "init.bump_b",
      "init.rho_expr",
      "init.m_expr",
      "init.table_path",
      "init.m_table_path",
      "schedule.levels",
      "schedule.eps0",
      "schedule.delta0",
      "schedule.K0",
      "run.t_end",
      "run.cfl",
      "run.dt_max",
      "run.observer_dt",
      "run.implicit_viscosity",
      "run.newton_tol",
      "run.newton_max_iter",
      "eval.ball_n",
      "eval.beta",
      "eval.quad_subintervals",
      "eval.moment_eta",
  };
  return keys;
}

}  // namespace

Scenario scenario_from_config(const Config& cfg) {
  cfg.require_known(scenario_keys(), {});

  Scenario sc;
  const int dim = cfg.get_int("N", 2);
  sc.model = model_from_config(cfg, dim);
  sc.profile = profile_from_config(cfg);

  sc.schedule.levels = cfg.get_int("schedule.levels", 3);
  sc.schedule.eps0 = cfg.get_double("schedule.eps0", 0.1);
  sc.schedule.delta0 = cfg.get_double("schedule.delta0", 0.05);
  sc.schedule.K0 = cfg.get_int("schedule.K0", 256);

  const double eps = cfg.get_double("epsilon", sc.schedule.eps0);
  const double R = cfg.has("R")
                       ? cfg.get_double("R")
                       : RegularizationParams::default_radius(eps, dim);
  const double delta = cfg.get_double("delta", sc.schedule.delta0);
  const double alpha = cfg.get_double("alpha", 0.5);
  const bool exterior = cfg.get_bool("exterior", false);
  sc.params = RegularizationParams::make(eps, R, delta, alpha, dim, exterior);

  sc.control.cfl = cfg.get_double("run.cfl", 0.4);
  sc.control.dt_max = cfg.get_double(
      "run.dt_max", std::numeric_limits<double>::infinity());
  sc.control.visc_theta_implicit = cfg.get_bool("run.implicit_viscosity", true);
  sc.control.newton_tol = cfg.get_double("run.newton_tol", 1e-10);
  sc.control.newton_max_iter = cfg.get_int("run.newton_max_iter", 20);
  sc.control.validate();

  sc.t_end = cfg.get_double("run.t_end", 0.5);
  if (!(sc.t_end >= 0.0)) throw ConfigError("run.t_end must be nonnegative");
  sc.observer_dt = cfg.get_double("run.observer_dt", 0.05);
  sc.K = sc.schedule.K0;

  // For dim >= 3 the space-time pressure exponent is structural.
  sc.diag.beta = dim >= 3 ? static_cast<double>(dim + 2) / dim
                          : cfg.get_double("eval.beta", 1.5);
  sc.diag.eta = cfg.get_double("eval.moment_eta", 0.2);
  sc.ball_n = cfg.get_double("eval.ball_n", 1.0);
  if (!(sc.ball_n > 0.0)) throw ConfigError("eval.ball_n must be positive");
  sc.quad_panels = cfg.get_int("eval.quad_subintervals", 1024);
  if (sc.quad_panels < 16)
    throw ConfigError("eval.quad_subintervals must be at least 16");

  sc.config_text = cfg.text();
  return sc;
}

Scenario scenario_for_level(const Config& cfg, int level) {
  Scenario sc = scenario_from_config(cfg);
  sc.schedule.validate();
  if (level < 0 || level >= sc.schedule.levels)
    throw ConfigError("refinement level out of range");
  const int dim = sc.params.dim;
  sc.params = RegularizationParams::make(
      sc.schedule.eps_at(level), sc.schedule.R_at(level, dim),
      sc.schedule.delta_at(level), sc.params.alpha, dim, sc.params.exterior);
  sc.K = sc.schedule.K_at(level);
  return sc;
}

// --- scenario validation -------------------------------------------------------

bool ValidationSummary::pass() const {
  return model_report.pass() && hypothesis_report.pass() && dimension_bounds &&
         alpha_admissible && growth_envelope;
}

std::string ValidationSummary::to_text() const {
  std::ostringstream out;
  out << model_report.to_text();
  out << hypothesis_report.to_text();
  out << "dimension trace-constant bounds : "
      << (dimension_bounds ? "pass" : "FAIL") << "\n";
  out << "alpha admissibility            : "
      << (alpha_admissible ? "pass" : "FAIL") << "\n";
  out << "growth envelope feasibility    : "
      << (growth_envelope ? "pass" : "FAIL") << "\n";
  out << "overall                        : " << (pass() ? "PASS" : "FAIL")
      << "\n";
  return out.str();
}

ValidationSummary validate_scenario(const Scenario& sc) {
  ValidationSummary v;
  const int dim = sc.params.dim;
  v.model_report = validate_model(sc.model, dim, default_rho_samples());
  v.hypothesis_report = validate_hypotheses(sc.profile, sc.model, dim);
  v.dimension_bounds = check_dimension_bounds(sc.model.nu1, sc.model.nu2, dim);
  v.alpha_admissible = admissible_alpha(sc.params.alpha, sc.model, dim);
  v.growth_envelope = check_growth_envelope(sc.model, dim);
  return v;
}

// --- residual test specifications -----------------------------------------------

std::vector<ResidualTestSpec> default_residual_tests(double t_end) {
  // Three interior bumps carry the grid-decay and envelope checks; the wall
  // probe has nonzero inner-wall trace and tracks the boundary-term decay.
  return {
      {"interior_a", 0.35, 0.95, 0.25, 0.25, 0.0, t_end},
      {"interior_b", 0.90, 1.60, 0.25, 0.25, 0.0, t_end},
      {"interior_c", 0.45, 1.55, 0.35, 0.35, 0.0, t_end},
      {"wall_probe", 1e-4, 1.20, 0.55, 0.30, 0.0, t_end},
  };
}

std::vector<ResidualTestSpec> residual_tests_from_config(const Config& cfg) {
  const int count = cfg.get_int("tests.count");
  if (count < 1 || count > 64)
    throw ConfigError("tests.count must lie in [1, 64]");
  std::vector<std::string> allowed = {"tests.count"};
  for (int i = 0; i < count; ++i) {
    const std::string base = "tests." + std::to_string(i) + ".";
    for (const char* suffix : {"id", "a", "b", "flank", "flank_out", "t1",
                               "t2"})
      allowed.push_back(base + suffix);
  }
  cfg.require_known(allowed, {});

  std::vector<ResidualTestSpec> specs;
  for (int i = 0; i < count; ++i) {
    const std::string base = "tests." + std::to_string(i) + ".";
    ResidualTestSpec s;
    s.id = cfg.get_string(base + "id");
    s.a = cfg.get_double(base + "a");
    s.b = cfg.get_double(base + "b");
    s.flank_in = cfg.get_double(base + "flank");
    s.flank_out = cfg.get_double(base + "flank_out", s.flank_in);
    s.t1 = cfg.get_double(base + "t1", 0.0);
    s.t2 = cfg.get_double(base + "t2", 0.0);  // 0 = full horizon
    specs.push_back(std::move(s));
  }
  return specs;
}

// --- snapshot files -------------------------------------------------------------

void write_snapshot(const std::string& path, const RadialState& s,
                    double gamma, const RegularizationParams& p) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open snapshot file for write: " + path);
  out << "sphflow-snapshot 1\n";
  out << "N " << s.dim << "\n";
  out << "gamma " << format_full(gamma) << "\n";
  out << "epsilon " << format_full(p.epsilon) << "\n";
  out << "R " << format_full(p.R) << "\n";
  out << "delta " << format_full(p.delta) << "\n";
  out << "K " << s.cells() << "\n";
  out << "t " << format_full(s.time) << "\n";
  out << "nodes r u\n";
  for (std::size_t i = 0; i < s.node_r.size(); ++i)
    out << format_full(s.node_r[i]) << " " << format_full(s.node_u[i]) << "\n";
  out << "cells r rho\n";
  for (int j = 0; j < s.cells(); ++j)
    out << format_full(s.cell_center(j)) << " " << format_full(s.cell_rho[j])
        << "\n";
  if (!out) throw SolverError("snapshot write failed: " + path);
}

namespace {

std::string expect_label(std::istream& in, const std::string& label,
                         const std::string& path) {
  std::string word;
  if (!(in >> word) || word != label)
    throw SolverError("snapshot " + path + ": expected field '" + label + "'");
  std::string value;
  if (!(in >> value))
    throw SolverError("snapshot " + path + ": missing value for " + label);
  return value;
}

}  // namespace

RadialState read_snapshot(const std::string& path, SnapshotHeader* header) {
  std::ifstream in(path);
  if (!in) throw SolverError("cannot open snapshot file: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "sphflow-snapshot" || version != "1")
    throw SolverError("snapshot " + path + ": bad magic line");

  SnapshotHeader hd;
  hd.dim = std::stoi(expect_label(in, "N", path));
  hd.gamma = std::stod(expect_label(in, "gamma", path));
  hd.epsilon = std::stod(expect_label(in, "epsilon", path));
  hd.R = std::stod(expect_label(in, "R", path));
  hd.delta = std::stod(expect_label(in, "delta", path));
  hd.K = std::stoi(expect_label(in, "K", path));
  hd.t = std::stod(expect_label(in, "t", path));
  if (hd.K < 1) throw SolverError("snapshot " + path + ": bad cell count");

  std::string w0, w1, w2;
  in >> w0 >> w1 >> w2;
  if (w0 != "nodes" || w1 != "r" || w2 != "u")
    throw SolverError("snapshot " + path + ": expected node section");
  RadialState s;
  s.dim = hd.dim;
  s.time = hd.t;
  s.node_r.resize(hd.K + 1);
  s.node_u.resize(hd.K + 1);
  for (int i = 0; i <= hd.K; ++i)
    if (!(in >> s.node_r[i] >> s.node_u[i]))
      throw SolverError("snapshot " + path + ": truncated node section");

  in >> w0 >> w1 >> w2;
  if (w0 != "cells" || w1 != "r" || w2 != "rho")
    throw SolverError("snapshot " + path + ": expected cell section");
  s.cell_rho.resize(hd.K);
  s.cell_mass.resize(hd.K);
  for (int j = 0; j < hd.K; ++j) {
    double center = 0.0;
    if (!(in >> center >> s.cell_rho[j]))
      throw SolverError("snapshot " + path + ": truncated cell section");
  }
  for (int j = 0; j < hd.K; ++j) s.cell_mass[j] = s.cell_rho[j] * s.cell_volume(j);
  s.require_valid();
  if (header) *header = hd;
  return s;
}

// --- run directories --------------------------------------------------------------

namespace {

std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.txt", index);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open file for write: " + path);
  out << text;
  if (!out) throw SolverError("write failed: " + path);
}

RadialState build_initial_state(const Scenario& sc) {
  const TruncatedProfile cut = truncate_and_floor(sc.profile, sc.params);
  const Mollifier mol = Mollifier::make(sc.params.delta);
  const SampledProfile sampled = mollify(cut, mol, sc.params, sc.K);
  return init_state(sampled, sc.params, sc.K);
}

}  // namespace

RadialState initial_state_for(const Scenario& sc) {
  return build_initial_state(sc);
}

SimulateResult simulate_to_dir(const Scenario& sc, const std::string& out_dir) {
  fs::create_directories(fs::path(out_dir) / "snapshots");
  write_text_file((fs::path(out_dir) / "scenario.cfg").string(),
                  sc.config_text);

  RadialState initial = build_initial_state(sc);
  SimulateResult result;
  result.dir = out_dir;
  result.run = run(std::move(initial), sc.model, sc.params, sc.control,
                   sc.t_end, sc.observer_dt, sc.diag);

  write_diagnostics_csv((fs::path(out_dir) / "diagnostics.csv").string(),
                        result.run.records);
  const double gamma = sc.model.gamma;
  for (std::size_t i = 0; i < result.run.snapshots.size(); ++i)
    write_snapshot(
        (fs::path(out_dir) / "snapshots" / snapshot_name(i)).string(),
        result.run.snapshots[i], gamma, sc.params);
  if (result.run.aborted) {
    write_snapshot((fs::path(out_dir) / "snapshots" / "abort_state.txt").string(),
                   result.run.final_state, gamma, sc.params);
    write_text_file((fs::path(out_dir) / "abort.txt").string(),
                    result.run.abort_reason + "\n");
  }
  return result;
}

LoadedRun load_run_dir(const std::string& dir) {
  const fs::path root(dir);
  Config cfg = Config::parse_file((root / "scenario.cfg").string());
  LoadedRun lr;
  lr.scenario = scenario_from_config(cfg);

  const fs::path level_path = root / "level.cfg";
  if (fs::exists(level_path)) {
    Config lvl = Config::parse_file(level_path.string());
    lvl.require_known({"level", "epsilon", "R", "delta", "K"}, {});
    lr.scenario.params = RegularizationParams::make(
        lvl.get_double("epsilon"), lvl.get_double("R"),
        lvl.get_double("delta"), lr.scenario.params.alpha,
        lr.scenario.params.dim, lr.scenario.params.exterior);
    lr.scenario.K = lvl.get_int("K");
    lr.level = lvl.get_int("level", 0);
  }

  std::vector<fs::path> files;
  const fs::path snap_dir = root / "snapshots";
  if (!fs::exists(snap_dir))
    throw SolverError("run directory has no snapshots/: " + dir);
  for (const auto& entry : fs::directory_iterator(snap_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snap_", 0) == 0) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw SolverError("run directory has no snapshots: " + dir);
  for (const auto& f : files) lr.snapshots.push_back(read_snapshot(f.string()));
  return lr;
}

// --- residual evaluation -------------------------------------------------------------

const char kResidualsCsvHeader[] =
    "level,test_id,t1,t2,mass_residual,momentum_residual,boundary_term,"
    "epsilon_terms_bound";

void write_residuals_csv(const std::string& path,
                         const std::vector<ResidualRow>& rows) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open file for write: " + path);
  out << kResidualsCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.level << "," << r.test_id << "," << format_full(r.t1) << ","
        << format_full(r.t2) << "," << format_full(r.mass_residual) << ","
        << format_full(r.momentum_residual) << "," << format_full(r.boundary)
        << "," << format_full(r.epsilon_terms_bound) << "\n";
  }
  if (!out) throw SolverError("write failed: " + path);
}

std::vector<ResidualRow> evaluate_residuals(
    const ExtendedSolution& sol, const std::vector<ResidualTestSpec>& tests,
    int level, const QuadratureSpec& q) {
  std::vector<ResidualRow> rows;
  const double horizon = sol.t_end();
  for (const auto& spec : tests) {
    const TestFunction tf =
        TestFunction::bump(spec.id, spec.a, spec.b, spec.flank_in,
                           spec.flank_out, horizon);
    const double t1 = spec.t1;
    const double t2 = spec.t2 > 0.0 ? spec.t2 : horizon;

    ResidualRow row;
    row.level = level;
    row.test_id = spec.id;
    row.t1 = t1;
    row.t2 = t2;
    row.mass_residual = mass_weak_residual(sol, tf, t1, t2, q);
    const MomentumParts parts = momentum_weak_residual(sol, tf, t1, t2, q);
    const double wall_phi = tf.phi(sol.params().inner_radius());
    const double bterm =
        wall_phi == 0.0 ? 0.0 : boundary_term(sol, tf, t1, t2, q);
    row.boundary = bterm;
    row.epsilon_terms = parts.epsilon_terms;
    // Defect of the regularized weak form, the quantity that contracts under
    // grid refinement at fixed regularization.
    row.momentum_residual = parts.residual - parts.epsilon_terms - bterm;
    row.epsilon_terms_bound = std::abs(row.epsilon_terms);
    rows.push_back(std::move(row));
  }
  return rows;
}

void apply_envelope_bounds(std::vector<ResidualRow>& rows,
                           const std::map<int, double>& level_epsilon,
                           double theta, int dim,
                           const std::vector<ResidualTestSpec>& tests) {
  std::map<std::string, double> support;
  for (const auto& t : tests) support[t.id] = t.b;
  std::map<std::string, const ResidualRow*> anchor;
  for (const auto& r : rows) {
    auto it = anchor.find(r.test_id);
    if (it == anchor.end() || r.level < it->second->level)
      anchor[r.test_id] = &r;
  }
  std::map<std::string, double> c_fit;
  for (const auto& [id, row] : anchor) {
    const auto eps_it = level_epsilon.find(row->level);
    if (eps_it == level_epsilon.end()) continue;
    const double env =
        epsilon_envelope(eps_it->second, theta, dim, support.at(id));
    c_fit[id] = env > 0.0 ? std::abs(row->epsilon_terms) / env : 0.0;
  }
  for (auto& r : rows) {
    const auto c_it = c_fit.find(r.test_id);
    const auto eps_it = level_epsilon.find(r.level);
    if (c_it == c_fit.end() || eps_it == level_epsilon.end()) continue;
    r.epsilon_terms_bound =
        c_it->second *
        epsilon_envelope(eps_it->second, theta, dim, support.at(r.test_id));
  }
}

// --- inter-level distances ------------------------------------------------------------

DistanceRow solution_distances(const ExtendedSolution& coarse,
                               const ExtendedSolution& fine, double ball_n,
                               double beta, double observer_dt, double t_end,
                               int quad_panels) {
  const int dim = coarse.params().dim;
  std::vector<double> ticks;
  if (observer_dt > 0.0) {
    for (int k = 0;; ++k) {
      const double t = k * observer_dt;
      if (t > t_end * (1.0 + 1e-12)) break;
      ticks.push_back(std::min(t, t_end));
      if (t >= t_end) break;
    }
  } else {
    ticks.push_back(0.0);
  }
  if (ticks.empty() || ticks.back() < t_end) ticks.push_back(t_end);

  const double lo =
      std::min(coarse.params().inner_radius(), fine.params().inner_radius());
  const double mid =
      std::max(coarse.params().inner_radius(), fine.params().inner_radius());
  std::vector<double> breaks = {lo};
  if (mid > lo && mid < ball_n) breaks.push_back(mid);
  if (ball_n > breaks.back()) breaks.push_back(ball_n);
  if (breaks.size() < 2) breaks.push_back(lo + 1.0);

  auto space_integral = [&](double t, auto&& pointwise) {
    return gauss_composite(
        [&](double r) {
          const auto a = coarse.eval(r, t);
          const auto b = fine.eval(r, t);
          return pointwise(a, b) * std::pow(r, dim - 1);
        },
        breaks, quad_panels, 3, 4);
  };

  std::vector<double> rho_l1(ticks.size()), mom_sq(ticks.size()),
      su_sq(ticks.size());
  for (std::size_t k = 0; k < ticks.size(); ++k) {
    const double t = ticks[k];
    rho_l1[k] = space_integral(t, [](const ExtendedSolution::Fields& a,
                                     const ExtendedSolution::Fields& b) {
      return std::abs(a.rho - b.rho);
    });
    const double mom = space_integral(
        t, [&](const ExtendedSolution::Fields& a,
               const ExtendedSolution::Fields& b) {
          return std::pow(std::abs(a.rho * a.u - b.rho * b.u), beta);
        });
    const double mom_lbeta = std::pow(mom, 1.0 / beta);
    mom_sq[k] = mom_lbeta * mom_lbeta;
    su_sq[k] = space_integral(t, [](const ExtendedSolution::Fields& a,
                                    const ExtendedSolution::Fields& b) {
      const double d = std::sqrt(a.rho) * a.u - std::sqrt(b.rho) * b.u;
      return d * d;
    });
  }

  auto trapezoid = [&](const std::vector<double>& y) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < ticks.size(); ++k)
      total += 0.5 * (y[k] + y[k + 1]) * (ticks[k + 1] - ticks[k]);
    return total;
  };

  DistanceRow d;
  d.rho_l1_max = *std::max_element(rho_l1.begin(), rho_l1.end());
  d.momentum_l2_lbeta = std::sqrt(trapezoid(mom_sq));
  d.sqrt_rho_u_l2 = std::sqrt(trapezoid(su_sq));
  return d;
}

// --- refinement orchestration ------------------------------------------------------------

bool RefinementReport::pass() const {
  for (const auto& f : flags)
    if (!f.pass) return false;
  return true;
}

namespace {

double records_max(const std::vector<DiagnosticsRecord>& records,
                   double DiagnosticsRecord::* field) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) worst = std::max(worst, r.*field);
  return worst;
}

const std::vector<std::pair<std::string, double DiagnosticsRecord::*>>&
maxima_fields() {
  static const std::vector<std::pair<std::string, double DiagnosticsRecord::*>>
      fields = {
          {"mass", &DiagnosticsRecord::mass},
          {"energy", &DiagnosticsRecord::energy},
          {"diss_exact", &DiagnosticsRecord::diss_exact},
          {"diss_lower", &DiagnosticsRecord::diss_lower},
          {"bd_entropy", &DiagnosticsRecord::bd_entropy},
          {"bd_cross_rate", &DiagnosticsRecord::bd_cross_rate},
          {"sqrt_rho_h1", &DiagnosticsRecord::sqrt_rho_h1},
          {"log_moment", &DiagnosticsRecord::log_moment},
          {"u_Lm", &DiagnosticsRecord::u_Lm},
          {"hbar_grad_l2", &DiagnosticsRecord::hbar_grad_l2},
          {"dissipation_time_integral",
           &DiagnosticsRecord::dissipation_time_integral},
          {"bd_cross_time_integral",
           &DiagnosticsRecord::bd_cross_time_integral},
          {"pressure_partial_norm", &DiagnosticsRecord::pressure_partial_norm},
          {"velocity_moment", &DiagnosticsRecord::velocity_moment},
      };
  return fields;
}

std::string level_config_text(int level, const Scenario& sc) {
  std::ostringstream out;
  out << "# refinement level parameters derived from the schedule\n";
  out << "level = " << level << "\n";
  out << "epsilon = " << format_full(sc.params.epsilon) << "\n";
  out << "R = " << format_full(sc.params.R) << "\n";
  out << "delta = " << format_full(sc.params.delta) << "\n";
  out << "K = " << sc.K << "\n";
  return out.str();
}

}  // namespace

RefinementReport run_refinement(const Config& cfg, const std::string& out_dir,
                                std::vector<ResidualTestSpec> tests) {
  const Scenario base = scenario_from_config(cfg);
  base.schedule.validate();
  const int levels = base.schedule.levels;

  // Resolve and validate every level before any compute.
  std::vector<Scenario> per_level;
  for (int j = 0; j < levels; ++j) per_level.push_back(scenario_for_level(cfg, j));
  if (tests.empty()) tests = default_residual_tests(base.t_end);

  fs::create_directories(out_dir);
  std::vector<std::string> dirs;
  for (int j = 0; j < levels; ++j) {
    const std::string dir =
        (fs::path(out_dir) / ("level" + std::to_string(j))).string();
    fs::create_directories(dir);
    write_text_file((fs::path(dir) / "level.cfg").string(),
                    level_config_text(j, per_level[j]));
    dirs.push_back(dir);
  }

  std::vector<std::future<SimulateResult>> futures;
  for (int j = 0; j < levels; ++j) {
    futures.push_back(std::async(std::launch::async,
                                 [&per_level, &dirs, j]() {
                                   return simulate_to_dir(per_level[j],
                                                          dirs[j]);
                                 }));
  }
  std::vector<SimulateResult> results;
  for (auto& f : futures) results.push_back(f.get());

  RefinementReport rep;
  for (int j = 0; j < levels; ++j) {
    const RunResult& rr = results[j].run;
    LevelSummary ls;
    ls.level = j;
    ls.epsilon = per_level[j].params.epsilon;
    ls.R = per_level[j].params.R;
    ls.delta = per_level[j].params.delta;
    ls.K = per_level[j].K;
    ls.steps = rr.steps;
    ls.aborted = rr.aborted;
    ls.abort_reason = rr.abort_reason;
    for (const auto& [name, field] : maxima_fields())
      ls.maxima[name] = records_max(rr.records, field);
    rep.per_level.push_back(std::move(ls));
  }

  std::vector<std::optional<ExtendedSolution>> sols(levels);
  for (int j = 0; j < levels; ++j)
    if (!results[j].run.aborted)
      sols[j].emplace(results[j].run.snapshots, base.model,
                      per_level[j].params);

  QuadratureSpec quad;
  quad.panels = base.quad_panels;
  std::map<int, double> level_eps;
  for (int j = 0; j < levels; ++j)
    level_eps[j] = per_level[j].params.epsilon;
  for (int j = 0; j < levels; ++j) {
    if (!sols[j]) continue;
    auto rows = evaluate_residuals(*sols[j], tests, j, quad);
    rep.residuals.insert(rep.residuals.end(), rows.begin(), rows.end());
  }
  apply_envelope_bounds(rep.residuals, level_eps, base.params.theta,
                        base.params.dim, tests);

  for (int j = 0; j + 1 < levels; ++j) {
    if (!sols[j] || !sols[j + 1]) continue;
    DistanceRow d = solution_distances(*sols[j], *sols[j + 1], base.ball_n,
                                       base.diag.beta, base.observer_dt,
                                       base.t_end, base.quad_panels);
    d.coarse = j;
    d.fine = j + 1;
    rep.distances.push_back(d);
  }

  // --- flags ---
  auto flag = [&](std::string name, bool pass, std::string detail) {
    rep.flags.push_back({std::move(name), pass, std::move(detail)});
  };

  {
    std::string detail = "all levels finished";
    bool ok = true;
    for (const auto& ls : rep.per_level)
      if (ls.aborted) {
        ok = false;
        detail = "level " + std::to_string(ls.level) +
                 " aborted: " + ls.abort_reason;
        break;
      }
    flag("levels_completed", ok, detail);
  }

  {
    // Uniform bound on the a-priori controlled functionals.
    static const char* keys[] = {"energy", "sqrt_rho_h1", "log_moment",
                                 "pressure_partial_norm"};
    bool ok = true;
    double worst_ratio = 0.0;
    std::string worst = "no comparison available";
    for (const char* key : keys) {
      if (rep.per_level.empty()) break;
      const double base_max = rep.per_level.front().maxima.at(key);
      for (std::size_t j = 1; j < rep.per_level.size(); ++j) {
        if (rep.per_level[j].aborted) continue;
        const double value = rep.per_level[j].maxima.at(key);
        const double ratio =
            value / std::max(base_max, std::numeric_limits<double>::min());
        if (ratio > worst_ratio) {
          worst_ratio = ratio;
          worst = std::string(key) + " level " + std::to_string(j) +
                  " ratio " + format_full(ratio);
        }
        if (value > 2.0 * base_max + 1e-12) ok = false;
      }
    }
    flag("uniform_bound_2x", ok, "worst " + worst + " (limit 2)");
  }

  {
    bool ok = true;
    std::string detail = "entropy + cross integral within 2x of start";
    for (int j = 0; j < levels; ++j) {
      const auto& rr = results[j].run;
      if (rr.records.empty()) continue;
      const double limit = 2.0 * rr.records.front().bd_entropy + 1e-12;
      for (const auto& rec : rr.records) {
        if (rec.bd_entropy + rec.bd_cross_time_integral > limit) {
          ok = false;
          detail = "level " + std::to_string(j) + " at t = " +
                   format_full(rec.t) + ": value " +
                   format_full(rec.bd_entropy + rec.bd_cross_time_integral) +
                   " exceeds " + format_full(limit);
        }
        if (rec.bd_cross_rate < -1e-10) {
          ok = false;
          detail = "level " + std::to_string(j) +
                   ": negative cross rate at t = " + format_full(rec.t);
        }
      }
    }
    flag("bd_entropy_bounded", ok, detail);
  }

  {
    bool ok = true;
    std::string detail;
    if (rep.distances.size() < 2) {
      ok = rep.distances.size() >= 1 && levels == 2;
      detail = ok ? "single level pair, nothing to compare"
                  : "insufficient completed levels";
    } else {
      double worst_ratio = 0.0;
      auto check = [&](const char* name, double DistanceRow::* field) {
        for (std::size_t k = 0; k + 1 < rep.distances.size(); ++k) {
          const double prev = rep.distances[k].*field;
          const double next = rep.distances[k + 1].*field;
          const double ratio =
              next / std::max(prev, std::numeric_limits<double>::min());
          if (ratio > worst_ratio) {
            worst_ratio = ratio;
            detail = std::string(name) + " pair " + std::to_string(k + 1) +
                     " ratio " + format_full(ratio);
          }
          if (!(next < prev)) ok = false;
        }
      };
      check("rho_l1_max", &DistanceRow::rho_l1_max);
      check("momentum_l2_lbeta", &DistanceRow::momentum_l2_lbeta);
      check("sqrt_rho_u_l2", &DistanceRow::sqrt_rho_u_l2);
      detail = "worst " + detail;
    }
    flag("distance_monotone_decrease", ok, detail);
  }

  {
    bool ok = true;
    double worst_ratio = 0.0;
    std::string detail = "all epsilon terms within the fitted envelope";
    for (const auto& r : rep.residuals) {
      const double bound = r.epsilon_terms_bound;
      const double measured = std::abs(r.epsilon_terms);
      if (measured > bound * (1.0 + 1e-9) + 1e-300) ok = false;
      const double ratio =
          measured / std::max(bound, std::numeric_limits<double>::min());
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        detail = r.test_id + " level " + std::to_string(r.level) + " ratio " +
                 format_full(ratio);
      }
    }
    flag("epsilon_envelope", ok, detail);
  }

  {
    bool ok = true;
    bool any = false;
    std::string detail = "no test touches the inner wall";
    std::map<std::string, std::map<int, double>> by_test;
    for (const auto& r : rep.residuals)
      by_test[r.test_id][r.level] = std::abs(r.boundary);
    for (const auto& [id, series] : by_test) {
      double peak = 0.0;
      for (const auto& [lvl, v] : series) peak = std::max(peak, v);
      if (peak <= 1e-13) continue;
      any = true;
      double prev = std::numeric_limits<double>::infinity();
      for (const auto& [lvl, v] : series) {
        if (!(v < prev)) {
          ok = false;
          detail = id + ": |boundary| not decreasing at level " +
                   std::to_string(lvl);
        }
        prev = v;
      }
      if (ok && detail == "no test touches the inner wall")
        detail = id + ": boundary term strictly decreasing";
    }
    if (!any) ok = true;
    flag("boundary_term_monotone", ok, detail);
  }

  write_residuals_csv((fs::path(out_dir) / "residuals.csv").string(),
                      rep.residuals);
  write_report_json((fs::path(out_dir) / "report.json").string(), rep);
  write_plot_script(out_dir);
  return rep;
}

void write_report_json(const std::string& path, const RefinementReport& rep) {
  ordered_json j;
  j["per_level"] = ordered_json::array();
  for (const auto& ls : rep.per_level) {
    ordered_json lvl;
    lvl["level"] = ls.level;
    lvl["epsilon"] = ls.epsilon;
    lvl["R"] = ls.R;
    lvl["delta"] = ls.delta;
    lvl["K"] = ls.K;
    lvl["steps"] = ls.steps;
    lvl["aborted"] = ls.aborted;
    lvl["abort_reason"] = ls.abort_reason;
    ordered_json maxima;
    for (const auto& [name, value] : ls.maxima) maxima[name] = value;
    lvl["maxima"] = std::move(maxima);
    ordered_json rows = ordered_json::array();
    for (const auto& r : rep.residuals) {
      if (r.level != ls.level) continue;
      ordered_json row;
      row["test_id"] = r.test_id;
      row["t1"] = r.t1;
      row["t2"] = r.t2;
      row["mass_residual"] = r.mass_residual;
      row["momentum_residual"] = r.momentum_residual;
      row["boundary_term"] = r.boundary;
      row["epsilon_terms"] = r.epsilon_terms;
      row["epsilon_terms_bound"] = r.epsilon_terms_bound;
      rows.push_back(std::move(row));
    }
    lvl["residuals"] = std::move(rows);
    j["per_level"].push_back(std::move(lvl));
  }
  j["distances"] = ordered_json::array();
  for (const auto& d : rep.distances) {
    ordered_json row;
    row["coarse"] = d.coarse;
    row["fine"] = d.fine;
    row["rho_l1_max"] = d.rho_l1_max;
    row["momentum_l2_lbeta"] = d.momentum_l2_lbeta;
    row["sqrt_rho_u_l2"] = d.sqrt_rho_u_l2;
    j["distances"].push_back(std::move(row));
  }
  j["flags"] = ordered_json::array();
  for (const auto& f : rep.flags) {
    ordered_json row;
    row["name"] = f.name;
    row["pass"] = f.pass;
    row["detail"] = f.detail;
    j["flags"].push_back(std::move(row));
  }
  write_text_file(path, j.dump(2) + "\n");
}

// --- plotting script ---------------------------------------------------------------------

void write_plot_script(const std::string& dir) {
  static const char script[] = R"PY(#!/usr/bin/env python3
"""Render the CSV/JSON artifacts of a run or refinement directory.

Reads diagnostics.csv, residuals.csv and report.json next to this script
(refinement directories keep per-level diagnostics under level*/), and
writes PNG figures alongside them.  The CSV files are the contract; this
script is a convenience viewer.
"""
import csv
import glob
import json
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def plot_diagnostics(path, out):
    rows = read_csv(path)
    if not rows:
        return
    cols = [c for c in rows[0] if c != "t"]
    t = [float(r["t"]) for r in rows]
    fig, axes = plt.subplots(4, 3, figsize=(13, 11), sharex=True)
    for ax, col in zip(axes.flat, cols):
        ax.plot(t, [float(r[col]) for r in rows])
        ax.set_title(col)
        ax.grid(True, alpha=0.3)
    for ax in axes.flat[len(cols):]:
        ax.axis("off")
    fig.suptitle(os.path.relpath(path, HERE))
    fig.supxlabel("t")
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    plt.close(fig)


def plot_residuals(path, out):
    rows = read_csv(path)
    if not rows:
        return
    tests = sorted({r["test_id"] for r in rows})
    fig, ax = plt.subplots(figsize=(7, 5))
    for tid in tests:
        pts = sorted((int(r["level"]), abs(float(r["momentum_residual"])))
                     for r in rows if r["test_id"] == tid)
        ax.semilogy([p[0] for p in pts], [max(p[1], 1e-300) for p in pts],
                    "o-", label=tid)
    ax.set_xlabel("level")
    ax.set_ylabel("|momentum residual|")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    plt.close(fig)


def plot_report(path, out):
    with open(path) as f:
        rep = json.load(f)
    dist = rep.get("distances", [])
    if not dist:
        return
    fig, ax = plt.subplots(figsize=(7, 5))
    for key in ("rho_l1_max", "momentum_l2_lbeta", "sqrt_rho_u_l2"):
        ax.semilogy(range(len(dist)), [max(d[key], 1e-300) for d in dist],
                    "o-", label=key)
    ax.set_xticks(range(len(dist)))
    ax.set_xticklabels(["%d-%d" % (d["coarse"], d["fine"]) for d in dist])
    ax.set_xlabel("level pair")
    ax.set_ylabel("distance")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    plt.close(fig)


def main():
    made = []
    candidates = [os.path.join(HERE, "diagnostics.csv")]
    candidates += sorted(glob.glob(os.path.join(HERE, "level*",
                                                "diagnostics.csv")))
    for path in candidates:
        if os.path.exists(path):
            out = os.path.join(os.path.dirname(path), "diagnostics.png")
            plot_diagnostics(path, out)
            made.append(out)
    rpath = os.path.join(HERE, "residuals.csv")
    if os.path.exists(rpath):
        out = os.path.join(HERE, "residuals.png")
        plot_residuals(rpath, out)
        made.append(out)
    jpath = os.path.join(HERE, "report.json")
    if os.path.exists(jpath):
        out = os.path.join(HERE, "distances.png")
        plot_report(jpath, out)
        made.append(out)
    for m in made:
        print("wrote", m)
    if not made:
        print("no artifacts found next to this script")


if __name__ == "__main__":
    main()
)PY";
  write_text_file((fs::path(dir) / "plot.py").string(), script);
}

}  // namespace sphflow
