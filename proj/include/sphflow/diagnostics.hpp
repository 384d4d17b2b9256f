#pragma once

#include <string>
#include <vector>

#include "sphflow/coefficients.hpp"
#include "sphflow/state.hpp"

namespace sphflow {

// Regularized coefficient evaluations used across the solver and the
// diagnostics (base model plus the artificial-viscosity contribution):
//   shear_total = 2 h(s) + eps s^theta
//   bulk_total  = g(s) + (theta - 1) eps s^theta
//   flux_coefficient = s * (shear_total + bulk_total)
//                    = s (2 h + g) + eps theta s^(theta + 1).
double shear_total(const CoefficientModel& m, const RegularizationParams& p,
                   double s);
double bulk_total(const CoefficientModel& m, const RegularizationParams& p,
                  double s);
double flux_coefficient(const CoefficientModel& m,
                        const RegularizationParams& p, double s);

struct DiagnosticsOptions {
  double beta = 1.5;  // space-time pressure exponent (forced to (dim+2)/dim
                      // by the scenario layer when dim >= 3)
  double eta = 0.2;   // extra velocity-moment exponent: rho |u|^(2+eta)
};

// One observer sample.  The first eleven fields are the CSV columns; the
// trailing fields are running accumulators and extras carried alongside.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double diss_exact = 0.0;
  double diss_lower = 0.0;
  double bd_entropy = 0.0;
  double bd_cross_rate = 0.0;
  double sqrt_rho_h1 = 0.0;
  double log_moment = 0.0;
  double u_Lm = 0.0;
  double hbar_grad_l2 = 0.0;

  double dissipation_time_integral = 0.0;  // sum of dt * diss_exact
  double bd_cross_time_integral = 0.0;     // sum of dt * bd_cross_rate
  double pressure_partial_norm = 0.0;      // (integral of dt * P_beta)^(1/beta)
  double velocity_moment = 0.0;

  bool all_finite() const;
};

// --- spatial functionals ----------------------------------------------------

// Total mass (exact cell-mass sum).
double mass_functional(const RadialState& s);

// Kinetic energy (node mass weights) plus internal energy.  For gamma > 1 the
// internal part is sum rho^gamma/(gamma-1) * V; for gamma = 1 it is the
// relative entropy against the reference density rbar(r) = exp(-r) evaluated
// at cell centers.
double energy_functional(const RadialState& s, const CoefficientModel& m);

// Viscous dissipation rate with the regularized coefficients, cell-by-cell:
//   shear_total * (u_r^2 + (dim-1)(u/r)^2) + bulk_total * (div u)^2.
double dissipation_exact(const RadialState& s, const CoefficientModel& m,
                         const RegularizationParams& p);

// Coercive minorant (nu1 h + alpha eps rho^theta) * (u_r^2 + (dim-1)(u/r)^2).
double dissipation_lower(const RadialState& s, const CoefficientModel& m,
                         const RegularizationParams& p);

// Effective-velocity (density-weighted) functional over interior nodes:
//   1/2 * rhohat * (u + psi * rho_r / rhohat)^2,
// with psi = 2 h'(rhohat) + eps theta rhohat^(theta-1) and rho_r the chord
// slope of cell densities across the node.
double bd_entropy(const RadialState& s, const CoefficientModel& m,
                  const RegularizationParams& p);

// Nonnegative pressure/density cross rate:
//   gamma * psi * rhohat^(gamma-2) * rho_r^2  summed over interior nodes.
double bd_cross_rate(const RadialState& s, const CoefficientModel& m,
                     const RegularizationParams& p);

// sqrt( integral rho + integral |d/dr sqrt(rho)|^2 ) with chord gradients.
double sqrt_rho_h1_norm(const RadialState& s);
// The squared gradient part alone (for decomposition checks).
double sqrt_rho_grad_l2_sq(const RadialState& s);

// Kinetic log-moment: sum (u^2/2) ln(1 + u^2) with node mass weights.
double log_moment(const RadialState& s);

// Velocity m-norm with m = dim/(1 - alpha):  (sum |u|^m dm)^(1/m).
double u_Lm_norm(const RadialState& s, const RegularizationParams& p);

// Chord-gradient L2 norm of hbar(rho) (base-model hbar).
double hbar_grad_l2(const RadialState& s, const CoefficientModel& m);

// Spatial integral of (rho^gamma)^beta (the space part of the space-time
// pressure norm).
double pressure_space_integral(const RadialState& s, const CoefficientModel& m,
                               double beta);

// Integral of rho |u|^(2+eta) (node mass weights).
double velocity_moment(const RadialState& s, double eta);

// --- structural sign check ----------------------------------------------------

// Smallest eigenvalue ratio lambda_min(M)/q over the cells of the state,
// where M is the 2x2 quadratic form coupling the weighted velocity gradient
// and the weighted velocity trace in the m-th power estimate
// (m = dim/(1-alpha)) and q = rho h + eps rho^(theta+1).
double sign_structure_min_ratio(const RadialState& s, const CoefficientModel& m,
                                const RegularizationParams& p);

// Reference constant: half the minimum of the same ratio over a density
// log-grid in [1e-3, 1e3].
double sign_structure_reference_c(const CoefficientModel& m,
                                  const RegularizationParams& p);

// --- records ------------------------------------------------------------------

DiagnosticsRecord make_record(const RadialState& s, const CoefficientModel& m,
                              const RegularizationParams& p,
                              const DiagnosticsOptions& opts,
                              double dissipation_time_integral,
                              double bd_cross_time_integral,
                              double pressure_time_integral);

// Pinned CSV layout (11 columns, full-precision values).
extern const char kDiagnosticsCsvHeader[];
void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path);

}  // namespace sphflow
