#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphflow {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Density-dependent shear/bulk viscosity pair (h, g) together with the
// adiabatic exponent and the structural constants the admissibility checks
// are performed against:
//   nu  : lower bound asserted for h'(s),
//   nu1 : lower bound asserted for (2 h + dim * g) / h,
//   nu2 : upper bound asserted for (2 h + dim * g) / h.
struct CoefficientModel {
  std::string name;
  double gamma = 2.0;
  double nu = 0.5;
  double nu1 = 2.0;
  double nu2 = 2.0;
  std::function<double(double)> h;
  std::function<double(double)> h_prime;
  std::function<double(double)> g;
  std::function<double(double)> g_prime;
  // hbar(s) = integral of h'(sigma)/sqrt(sigma) over (0, s]; used by the
  // gradient diagnostic.  Always provided by the factory functions.
  std::function<double(double)> hbar;
};

// h(s) = c * s^p, g derived as 2 s h'(s) - 2 h(s) = 2 c (p - 1) s^p.
CoefficientModel power_law_model(double c, double p, double nu, double nu1,
                                 double nu2, double gamma);

// Shallow-water model: h(s) = s, g = 0, gamma = 2, nu = 1/2, nu1 = nu2 = 2.
CoefficientModel saint_venant_model();

// h tabulated on strictly increasing density knots; a natural cubic spline
// interpolates h, and g comes from the compatibility identity
// g = 2 s h'(s) - 2 h(s).  Outside the knot range h extends linearly.
CoefficientModel table_model(const std::vector<double>& rho_knots,
                             const std::vector<double>& h_values, double nu,
                             double nu1, double nu2, double gamma);

// Caller supplies h, h'; g again comes from the compatibility identity.
CoefficientModel custom_model(const std::string& name,
                              std::function<double(double)> h,
                              std::function<double(double)> h_prime, double nu,
                              double nu1, double nu2, double gamma);

// As custom_model but with an explicit (g, g') pair; the compatibility
// identity then becomes a checked condition rather than a construction.
CoefficientModel custom_model_full(const std::string& name,
                                   std::function<double(double)> h,
                                   std::function<double(double)> h_prime,
                                   std::function<double(double)> g,
                                   std::function<double(double)> g_prime,
                                   double nu, double nu1, double nu2,
                                   double gamma);

// ---------------------------------------------------------------------------

struct ConditionResult {
  std::string name;
  bool applicable = true;
  bool pass = false;
  double worst_margin = 0.0;  // most negative margin seen (>= 0 when passing)
  double worst_rho = 0.0;     // sample where the worst margin occurred
  std::string note;
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  bool pass() const;
  std::string to_text() const;
};

// Pointwise structural checks on a density sample set:
//   lame_identity     : g = 2 s h' - 2 h,
//   shear_slope_floor : h' >= nu and h(0+) >= 0,
//   bulk_slope_bound  : |g'| <= h' / nu,
//   trace_bounds      : nu1 <= (2 h + dim g)/h <= nu2,
//   vacuum_growth     : liminf surrogate
//                       h(s)/s^((dim-2) gamma/dim + 1e-3) bounded below on
//                       s in [1e3, 1e6]  (applies for dim >= 3 and
//                       gamma >= dim/(dim-2) only).
ValidationReport validate_model(const CoefficientModel& m, int dim,
                                const std::vector<double>& rho_samples);

// 1000 log-spaced samples in [1e-6, 1e6].
std::vector<double> default_rho_samples();

// For dim >= 3 the trace constants must avoid the window
//   ( (4 dim - 4 sqrt(2 dim^2 - 4 dim + 4)) / (dim - 2)^2,
//     (4 dim + 4 sqrt(2 dim^2 - 4 dim + 4)) / (dim - 2)^2 )
// in the sense  (nu1 - 2)/dim <= lower  or  (nu2 - 2)/dim >= upper  being
// violated fails the check; dim = 2 is unconstrained (the check passes).
bool check_dimension_bounds(double nu1, double nu2, int dim);

// Quadratic-form eigen-direction constants for exponent m > 2.  Written in
// a cancellation-free arrangement; v1 < 0 < v2 on the whole domain.
double v1(double m, int dim);
double v2(double m, int dim);

// Power alpha in (0, 1) is admissible for the given trace constants when
//   v1(m, dim) < min{ (nu1 - 2)/dim, (alpha - 1)/dim }  and
//   v2(m, dim) > (nu2 - 2)/dim,                  with m = dim/(1 - alpha).
bool admissible_alpha(double alpha, double nu1, double nu2, int dim);
bool admissible_alpha(double alpha, const CoefficientModel& m, int dim);

// ---------------------------------------------------------------------------

struct RegularizationParams {
  double epsilon = 0.1;  // artificial pressure/viscosity strength; inner radius
  double R = 0.0;        // outer radius
  double delta = 0.05;   // mollification radius
  double alpha = 0.5;    // regularization power, in (0, 1)
  int dim = 2;           // space dimension N >= 2
  bool exterior = false; // exterior problem: inner wall fixed at radius 1
  double theta = 0.0;    // (dim - 1 + alpha)/dim, set by make()

  static RegularizationParams make(double epsilon, double R, double delta,
                                   double alpha, int dim,
                                   bool exterior = false);

  // Default outer-radius rule R = epsilon^(-1/(2 dim)).
  static double default_radius(double epsilon, int dim);

  double inner_radius() const { return exterior ? 1.0 : epsilon; }
  void validate() const;  // throws ModelError on violated constraints
};

// Regularized pair: 2 h_eps = 2 h + eps s^theta and
// g_eps = g + (theta - 1) eps s^theta, with trace constants widened to
// min(nu1, 2 alpha) / max(nu2, 2 alpha).
CoefficientModel regularized_pair(const CoefficientModel& m,
                                  const RegularizationParams& p);

// Feasibility of a single two-sided growth-envelope constant C in
//   C * min(s^p1, s^p2) <= h(s) <= C * max(s^p1, s^p2)
// on the grid s = 2^k, k = -10..10, where the exponents
//   p_i = (nu_i + 2 (dim - 1)) / (2 dim)
// come from the trace bounds via the compatibility identity.  The feasible
// set of C is an interval, intersected here with [c_lo, c_hi].
bool check_growth_envelope(const CoefficientModel& m, int dim,
                           double c_lo = 1e-6, double c_hi = 1e6);
// The feasible interval itself ([lo, hi] with lo > hi when infeasible).
std::pair<double, double> growth_envelope_interval(const CoefficientModel& m,
                                                   int dim, double c_lo = 1e-6,
                                                   double c_hi = 1e6);

}  // namespace sphflow
