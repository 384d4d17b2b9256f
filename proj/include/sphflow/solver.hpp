#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sphflow/coefficients.hpp"
#include "sphflow/diagnostics.hpp"
#include "sphflow/state.hpp"

namespace sphflow {

struct StepControl {
  double cfl = 0.4;
  double dt_max = std::numeric_limits<double>::infinity();
  // Viscous fluxes are treated implicitly by default (linearly implicit:
  // coefficients frozen at the step start, so the update is one symmetric
  // positive definite tridiagonal solve).  The explicit variant exists for
  // scheme comparisons and carries its own stability limit.
  bool visc_theta_implicit = true;
  // Bounds for an iterated nonlinear variant; the linearly implicit scheme
  // completes in a single pass, so these only undergo range validation.
  double newton_tol = 1e-10;
  int newton_max_iter = 20;

  void validate() const;  // throws SolverError on out-of-range settings
};

// Smallest cell acoustic transit time: min over cells of
// (r_{j+1} - r_j) / sqrt(gamma rho^(gamma-1)).
double acoustic_limit(const RadialState& s, const CoefficientModel& m);

// Stability bound for the explicit viscous update (used when
// visc_theta_implicit is false).
double explicit_viscous_limit(const RadialState& s, const CoefficientModel& m,
                              const RegularizationParams& p);

// Thrown when a step cannot produce an admissible state even after the
// maximum number of time-step halvings; carries the pre-step state.
struct SolverAbort : SolverError {
  SolverAbort(const std::string& why, RadialState s)
      : SolverError(why), state(std::move(s)) {}
  RadialState state;
};

struct StepOutcome {
  RadialState state;
  double dt_used = 0.0;
  int halvings = 0;
};

// One Lagrangian step of at most dt:
//   1. implicit momentum update in v = r^(dim-1) u (explicit pressure
//      gradient and geometric source),
//   2. node transport r += dt u,
//   3. density refresh from the new shell volumes.
// If the new geometry or density is inadmissible the step retries with dt/2,
// up to 20 halvings, then throws SolverAbort.
StepOutcome step(const RadialState& s, const CoefficientModel& m,
                 const RegularizationParams& p, const StepControl& ctl,
                 double dt);

struct RunResult {
  RadialState final_state;
  std::vector<DiagnosticsRecord> records;
  std::vector<RadialState> snapshots;  // same times as records
  long steps = 0;
  bool aborted = false;
  std::string abort_reason;
};

// Advance to t_end, emitting a diagnostics record and snapshot at t = 0, at
// every observer tick crossing (records land on step times), and at t_end.
// observer_dt <= 0 records only the endpoints.  Time integrals accumulate
// right-endpoint rates: after each step, dt * rate(new state).
RunResult run(RadialState initial, const CoefficientModel& m,
              const RegularizationParams& p, const StepControl& ctl,
              double t_end, double observer_dt,
              const DiagnosticsOptions& opts = {});

}  // namespace sphflow
