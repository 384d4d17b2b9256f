#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sphflow/coefficients.hpp"
#include "sphflow/state.hpp"

namespace sphflow {

struct ProfileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raw radial initial data on [0, infinity): density rho0 and radial momentum
// density m0.  Closures must accept any real argument (negative arguments may
// be produced transiently by mollification and should extend continuously).
struct RadialProfile {
  std::string description;
  std::function<double(double)> rho0;
  std::function<double(double)> m0;
};

// rho0 = base + amp * exp(-((r - center)/width)^2)
// m0   = m_amp * rho0(r) * r * exp(-(r/m_width)^2)
RadialProfile gaussian_profile(double base, double amp, double width,
                               double center, double m_amp, double m_width);

// Compactly supported density bump on (a, b) over a constant base:
// rho0 = base + amp * exp(1 - 1/(1 - s^2)), s = (2r - a - b)/(b - a);
// m0 as in gaussian_profile.
RadialProfile bump_profile(double base, double amp, double a, double b,
                           double m_amp, double m_width);

// Piecewise-linear tables from text files with "r value" rows (strictly
// increasing r, constant extension outside).  Empty momentum path means
// m0 = 0.
RadialProfile table_profile(const std::string& rho_path,
                            const std::string& m_path);

// Closed-form expressions in the radius variable r.
// Empty momentum expression means m0 = 0.
RadialProfile expression_profile(const std::string& rho_expr,
                                 const std::string& m_expr);

// ---------------------------------------------------------------------------

// Annulus restriction with a vacuum-free floor:
//   rho(r) = rho0(clamp(r, inner, R)) + epsilon,
//   u(r)   = m0(r) / (rho0(r) + epsilon), cut to exactly zero on
//            [0, inner + 2 delta] and [R - 2 delta, infinity).
// Rejects profiles that are negative on the annulus and configurations whose
// velocity support is empty.
struct TruncatedProfile {
  std::function<double(double)> rho;
  std::function<double(double)> u;
};
TruncatedProfile truncate_and_floor(const RadialProfile& profile,
                                    const RegularizationParams& p);

// Classical compactly supported smooth kernel on [-delta, delta], normalized
// to unit integral (normalization computed numerically at construction).
struct Mollifier {
  double delta = 0.0;
  double normalization = 0.0;  // integral of exp(-1/(1-s^2)) over [-1, 1]

  static Mollifier make(double delta);
  double kernel(double s) const;  // zero outside (-delta, delta)
};

// Fields sampled on a uniform fine grid over [inner, R] (4x oversampled
// relative to the target resolution K) with piecewise-linear evaluation.
struct SampledProfile {
  std::vector<double> r, rho, u;
  double rho_at(double x) const;
  double u_at(double x) const;
};

// Discrete mollification: at every fine-grid point, a Gauss-Legendre
// discretization of the kernel average with weights normalized to unit sum,
// so constants are reproduced to rounding and the floor rho >= epsilon is
// preserved (guarded).  Velocity zeros within distance delta of the cut
// margins remain exact zeros.  delta = 0 passes samples through.
SampledProfile mollify(const TruncatedProfile& f, const Mollifier& mol,
                       const RegularizationParams& p, int K);

// Lagrangian initial state on K uniform cells over [inner, R]: node
// velocities sampled from the profile, cell masses by per-cell quadrature of
// rho r^(dim-1), densities from the shell-volume invariant.  Requires K >= 8.
RadialState init_state(const SampledProfile& f, const RegularizationParams& p,
                       int K);

// ---------------------------------------------------------------------------

struct HypothesisCheck {
  std::string name;
  bool applicable = true;
  bool pass = false;
  double value = 0.0;
  std::string note;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  bool pass() const;
  std::string to_text() const;
};

// Integrability and compatibility checks on the raw profile over [0, inf)
// with weight r^(dim-1):
//   nonnegative_density        sampled rho0 >= 0
//   finite_mass                integral of rho0
//   finite_pressure_energy     integral of rho0^gamma (gamma > 1)
//   finite_viscosity_gradient  integral of (h'(rho0) rho0')^2 / rho0
//   finite_velocity_log_moment integral of (m0^2/rho0)(1 + ln(1 + (m0/rho0)^2))
//   vacuum_momentum            m0 = 0 wherever rho0 = 0 (sampled)
// Tail handling: dyadic windows until the contribution falls below 1e-14 of
// the running total; a tail still active at r = 2^20 fails the check, as does
// non-converged adaptive quadrature (the note names the location).
HypothesisReport validate_hypotheses(const RadialProfile& profile,
                                     const CoefficientModel& m, int dim);

}  // namespace sphflow
