#include "sphflow/solver.hpp"

#include <algorithm>
#include <cmath>

#include "sphflow/numerics.hpp"

namespace sphflow {

// --- RadialState -------------------------------------------------------------

double RadialState::shell_volume(double r0, double r1, int dim) {
  return (std::pow(r1, dim) - std::pow(r0, dim)) / dim;
}

double RadialState::cell_volume(int j) const {
  return shell_volume(node_r[j], node_r[j + 1], dim);
}

double RadialState::total_mass() const {
  double sum = 0.0;
  for (double m : cell_mass) sum += m;
  return sum;
}

void RadialState::density_from_geometry() {
  cell_rho.resize(cell_mass.size());
  for (int j = 0; j < cells(); ++j) cell_rho[j] = cell_mass[j] / cell_volume(j);
}

void RadialState::require_valid() const {
  const int K = cells();
  if (K < 1 || node_r.size() != static_cast<std::size_t>(K + 1) ||
      node_u.size() != node_r.size() || cell_rho.size() != cell_mass.size())
    throw SolverError("state: inconsistent array sizes");
  if (dim < 2) throw SolverError("state: dim must be >= 2");
  if (!(node_r.front() > 0.0))
    throw SolverError("state: inner radius must be positive");
  for (int i = 0; i < K; ++i)
    if (!(node_r[i + 1] > node_r[i]))
      throw SolverError("state: node radii must strictly increase");
  for (int j = 0; j < K; ++j) {
    if (!(cell_mass[j] > 0.0) || !std::isfinite(cell_mass[j]))
      throw SolverError("state: cell masses must be positive and finite");
    const double rho = cell_mass[j] / cell_volume(j);
    if (!(cell_rho[j] > 0.0) || !std::isfinite(cell_rho[j]) ||
        std::abs(cell_rho[j] - rho) > 1e-12 * rho)
      throw SolverError("state: density/volume invariant violated");
  }
  for (double u : node_u)
    if (!std::isfinite(u)) throw SolverError("state: non-finite velocity");
}

// --- step control -------------------------------------------------------------

void StepControl::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0))
    throw SolverError("step control: cfl must lie in (0, 1]");
  if (!(dt_max > 0.0)) throw SolverError("step control: dt_max must be > 0");
  if (!(newton_tol > 0.0))
    throw SolverError("step control: newton_tol must be > 0");
  if (newton_max_iter < 1)
    throw SolverError("step control: newton_max_iter must be >= 1");
}

double acoustic_limit(const RadialState& s, const CoefficientModel& m) {
  double limit = std::numeric_limits<double>::infinity();
  for (int j = 0; j < s.cells(); ++j) {
    const double c =
        std::sqrt(m.gamma * std::pow(s.cell_rho[j], m.gamma - 1.0));
    limit = std::min(limit, (s.node_r[j + 1] - s.node_r[j]) / c);
  }
  return limit;
}

double explicit_viscous_limit(const RadialState& s, const CoefficientModel& m,
                              const RegularizationParams& p) {
  const int K = s.cells();
  const int dm1 = s.dim - 1;
  double limit = std::numeric_limits<double>::infinity();
  for (int i = 1; i < K; ++i) {
    const double ci = 0.5 * (s.cell_mass[i - 1] + s.cell_mass[i]) /
                      std::pow(s.node_r[i], 2 * dm1);
    const double a_r = flux_coefficient(m, p, s.cell_rho[i]) / s.cell_mass[i];
    const double a_l =
        flux_coefficient(m, p, s.cell_rho[i - 1]) / s.cell_mass[i - 1];
    limit = std::min(limit, 0.5 * ci / (a_r + a_l));
  }
  return limit;
}

// --- time step ----------------------------------------------------------------

namespace {

// One attempt at the given dt; returns false if the resulting geometry or
// density is inadmissible.
bool attempt_step(const RadialState& s, const CoefficientModel& m,
                  const RegularizationParams& p, const StepControl& ctl,
                  double dt, RadialState& out) {
  const int K = s.cells();
  const int dim = s.dim;
  const int dm1 = dim - 1;

  std::vector<double> v(K + 1);
  for (int i = 0; i <= K; ++i)
    v[i] = std::pow(s.node_r[i], dm1) * s.node_u[i];

  std::vector<double> A(K), B(K), pr(K);
  for (int j = 0; j < K; ++j) {
    A[j] = flux_coefficient(m, p, s.cell_rho[j]);
    B[j] = shear_total(m, p, s.cell_rho[j]);
    pr[j] = std::pow(s.cell_rho[j], m.gamma);
  }

  std::vector<double> vnew(K + 1, 0.0);  // walls stay at rest
  if (K >= 2) {
    const int n = K - 1;
    std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
    for (int i = 1; i <= K - 1; ++i) {
      const double ci = 0.5 * (s.cell_mass[i - 1] + s.cell_mass[i]) /
                        std::pow(s.node_r[i], 2 * dm1);
      const double fr = A[i] / s.cell_mass[i];
      const double fl = A[i - 1] / s.cell_mass[i - 1];
      const double source = -(pr[i] - pr[i - 1]) -
                            dm1 * (B[i] - B[i - 1]) * s.node_u[i] /
                                s.node_r[i];
      const int k = i - 1;
      if (ctl.visc_theta_implicit) {
        diag[k] = ci + dt * (fr + fl);
        if (i >= 2) sub[k] = -dt * fl;
        if (i <= K - 2) sup[k] = -dt * fr;
        rhs[k] = ci * v[i] + dt * source;
      } else {
        diag[k] = ci;
        rhs[k] = ci * v[i] +
                 dt * (fr * (v[i + 1] - v[i]) - fl * (v[i] - v[i - 1])) +
                 dt * source;
      }
    }
    try {
      solve_tridiagonal(sub, diag, sup, rhs);
    } catch (const std::runtime_error&) {
      return false;
    }
    for (int i = 1; i <= K - 1; ++i) vnew[i] = rhs[i - 1];
  }

  out = s;
  out.time = s.time + dt;
  for (int i = 1; i <= K - 1; ++i) {
    out.node_u[i] = vnew[i] / std::pow(s.node_r[i], dm1);
    if (!std::isfinite(out.node_u[i])) return false;
    out.node_r[i] = s.node_r[i] + dt * out.node_u[i];
  }
  out.node_u.front() = 0.0;
  out.node_u.back() = 0.0;
  for (int i = 0; i < K; ++i)
    if (!(out.node_r[i + 1] > out.node_r[i])) return false;
  out.density_from_geometry();
  for (int j = 0; j < K; ++j)
    if (!(out.cell_rho[j] > 0.0) || !std::isfinite(out.cell_rho[j]))
      return false;
  return true;
}

}  // namespace

StepOutcome step(const RadialState& s, const CoefficientModel& m,
                 const RegularizationParams& p, const StepControl& ctl,
                 double dt) {
  ctl.validate();
  if (!(dt > 0.0)) throw SolverError("step: dt must be positive");
  StepOutcome out;
  double attempt = dt;
  for (int halving = 0; halving <= 20; ++halving) {
    if (attempt_step(s, m, p, ctl, attempt, out.state)) {
      out.dt_used = attempt;
      out.halvings = halving;
      return out;
    }
    attempt *= 0.5;
  }
  throw SolverAbort(
      "step: no admissible state after 20 time-step halvings at t = " +
          format_full(s.time),
      s);
}

// --- run loop -------------------------------------------------------------------

RunResult run(RadialState initial, const CoefficientModel& m,
              const RegularizationParams& p, const StepControl& ctl,
              double t_end, double observer_dt,
              const DiagnosticsOptions& opts) {
  ctl.validate();
  initial.require_valid();
  if (!(t_end >= initial.time))
    throw SolverError("run: t_end precedes the initial time");

  RunResult res;
  double diss_int = 0.0, cross_int = 0.0, pressure_int = 0.0;

  auto emit = [&](const RadialState& st) {
    res.records.push_back(
        make_record(st, m, p, opts, diss_int, cross_int, pressure_int));
    res.snapshots.push_back(st);
  };

  RadialState state = std::move(initial);
  emit(state);
  double next_tick =
      observer_dt > 0.0 ? state.time + observer_dt
                        : std::numeric_limits<double>::infinity();

  const double span = std::max(1.0, std::abs(t_end));
  try {
    while (t_end - state.time > 1e-14 * span) {
      double dt = std::min(ctl.cfl * acoustic_limit(state, m), ctl.dt_max);
      if (!ctl.visc_theta_implicit)
        dt = std::min(dt, explicit_viscous_limit(state, m, p));
      const bool final_step = state.time + dt >= t_end;
      if (final_step) dt = t_end - state.time;
      if (!(dt > 0.0)) throw SolverError("run: time step collapsed to zero");

      StepOutcome out = step(state, m, p, ctl, dt);
      state = std::move(out.state);
      if (final_step && out.halvings == 0) state.time = t_end;
      ++res.steps;

      const double used = out.dt_used;
      diss_int += used * dissipation_exact(state, m, p);
      cross_int += used * bd_cross_rate(state, m, p);
      pressure_int += used * pressure_space_integral(state, m, opts.beta);

      if (state.time >= next_tick * (1.0 - 1e-14)) {
        emit(state);
        while (next_tick <= state.time * (1.0 + 1e-14))
          next_tick += observer_dt;
      }
    }
  } catch (const SolverAbort& abort) {
    res.aborted = true;
    res.abort_reason = abort.what();
    res.final_state = abort.state;
    return res;
  }

  if (res.records.empty() || res.records.back().t != state.time) emit(state);
  res.final_state = std::move(state);
  return res;
}

}  // namespace sphflow
