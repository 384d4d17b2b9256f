#pragma once

#include <string>
#include <vector>

#include "sphflow/coefficients.hpp"
#include "sphflow/state.hpp"

namespace sphflow {

struct ResidualError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Radial C^2 bump test function with quintic-smoothstep flanks
//   S(s) = 6 s^5 - 15 s^4 + 10 s^3
// rising on [a, a + flank_in], plateau value 1, falling on [b - flank_out, b],
// times the C^1 temporal profile psi(t) = (1 - t/T)^2 which vanishes at T.
class TestFunction {
 public:
  static TestFunction bump(std::string id, double a, double b, double flank_in,
                           double flank_out, double t_final);

  double phi(double r) const;
  double phi_r(double r) const;
  double phi_rr(double r) const;
  double psi(double t) const;
  double psi_t(double t) const;

  // {a, a + flank_in, b - flank_out, b}
  std::vector<double> radial_breakpoints() const;

  const std::string& id() const { return id_; }
  double support_lo() const { return a_; }
  double support_hi() const { return b_; }
  double t_final() const { return t_final_; }

 private:
  std::string id_;
  double a_ = 0.0, b_ = 0.0, flank_in_ = 0.0, flank_out_ = 0.0,
         t_final_ = 0.0;
};

// Space-time extension of a snapshot sequence: fields are piecewise linear in
// r within the annulus (density through cell centers with constant end
// segments, velocity through nodes), linear in t between snapshots, and
// identically zero outside the annulus.
class ExtendedSolution {
 public:
  ExtendedSolution(std::vector<RadialState> snapshots, CoefficientModel model,
                   RegularizationParams params);

  struct Fields {
    double rho = 0.0, rho_r = 0.0, u = 0.0, u_r = 0.0;
    bool inside = false;
  };
  Fields eval(double r, double t) const;
  double rho(double r, double t) const { return eval(r, t).rho; }
  double u(double r, double t) const { return eval(r, t).u; }

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const std::vector<double>& time_knots() const { return times_; }

  // Inner-wall traces: one-sided velocity slope and first-cell density.
  double inner_wall_u_r(double t) const;
  double inner_wall_rho(double t) const;

  const RegularizationParams& params() const { return params_; }
  const CoefficientModel& model() const { return model_; }
  const std::vector<RadialState>& snapshots() const { return snaps_; }

 private:
  struct SpaceFields {
    double rho, rho_r, u, u_r;
  };
  SpaceFields eval_space(int k, double r) const;
  int locate_time(double t, double* lambda) const;

  std::vector<RadialState> snaps_;
  std::vector<double> times_;
  std::vector<std::vector<double>> centers_;  // per-snapshot cell centers
  CoefficientModel model_;
  RegularizationParams params_;
};

struct QuadratureSpec {
  int panels = 1024;        // target radial panel count across the support
  int min_per_segment = 4;  // per breakpoint segment
  int space_order = 3;      // Gauss-Legendre order in r
  int time_order = 4;       // Gauss-Legendre order per snapshot interval
};

// Mass-identity defect over the window [t1, t2]:
//   [int rho phi psi r^(dim-1) dr]_{t1}^{t2}
//   - int int (rho phi psi' + rho u phi' psi) r^(dim-1) dr dt.
double mass_weak_residual(const ExtendedSolution& sol, const TestFunction& tf,
                          double t1, double t2, const QuadratureSpec& q = {});

struct MomentumParts {
  double residual = 0.0;      // bracket + transport + pressure - shear - bulk
  double bracket = 0.0;       // -[int rho u phi psi r^(dim-1) dr]_{t1}^{t2}
  double transport = 0.0;     // int int rho u (phi psi)' advective terms
  double pressure = 0.0;      // int int rho^gamma (div of radial test field)
  double shear_ibp = 0.0;     // viscous bracket, integrated-by-parts form
  double bulk_ibp = 0.0;
  double shear_direct = 0.0;  // same brackets in direct quadratic form
  double bulk_direct = 0.0;
  double epsilon_terms = 0.0; // artificial-viscosity contribution
};

// Momentum-identity defect against the limit (epsilon-free) weak form; the
// epsilon-terms of the regularized system are reported alongside so the
// static identity  residual = epsilon_terms + boundary_term  can be checked.
MomentumParts momentum_weak_residual(const ExtendedSolution& sol,
                                     const TestFunction& tf, double t1,
                                     double t2, const QuadratureSpec& q = {});

// Inner-wall flux term over [t1, t2]:
//   int { (2h + g + theta eps rho^theta)(rho_w) u_r,w - rho_w^gamma }
//       * inner^(dim-1) phi(inner) psi(t) dt
// with one-sided wall traces.  Not defined for the exterior problem.
double boundary_term(const ExtendedSolution& sol, const TestFunction& tf,
                     double t1, double t2, const QuadratureSpec& q = {});

// Refinement envelope sqrt(eps) * n^(dim (1-theta) / 2) for a test function
// supported in a ball of radius n.
double epsilon_envelope(double epsilon, double theta, int dim,
                        double support_outer);

}  // namespace sphflow
