#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphflow {

// Gauss-Legendre rule on [-1, 1]. Supported orders: 2, 3, 4, 5.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_rule(int order);

// Integral of f over [a, b] with a single Gauss-Legendre panel.
double gauss_panel(const std::function<double(double)>& f, double a, double b,
                   int order);

// Composite rule: [a, b] split into `panels` equal panels.
double gauss_composite(const std::function<double(double)>& f, double a,
                       double b, int panels, int order);

// Composite rule over an explicit strictly increasing breakpoint list.  Each
// consecutive pair gets a share of `total_panels` proportional to its length
// (at least `min_per_segment` panels).
double gauss_composite(const std::function<double(double)>& f,
                       const std::vector<double>& breakpoints, int total_panels,
                       int order, int min_per_segment = 4);

struct AdaptiveResult {
  double value = 0.0;
  bool converged = true;
  double worst_point = 0.0;  // midpoint of the deepest non-converged interval
};

// Adaptive Simpson quadrature with a recursion-depth cap.  A depth-capped
// subinterval marks the result non-converged instead of throwing.
AdaptiveResult adaptive_simpson(const std::function<double(double)>& f,
                                double a, double b, double rel_tol,
                                double abs_tol, int max_depth = 32);

// Thomas algorithm for a tridiagonal system with `n` unknowns.
//   sub[i]   multiplies x[i-1] in row i (sub[0] unused),
//   diag[i]  multiplies x[i],
//   super[i] multiplies x[i+1] in row i (super[n-1] unused).
// Overwrites rhs with the solution.  Throws std::runtime_error on a
// non-positive pivot (callers assemble symmetric positive definite systems).
void solve_tridiagonal(const std::vector<double>& sub, std::vector<double> diag,
                       const std::vector<double>& super,
                       std::vector<double>& rhs);

// Natural cubic spline through strictly increasing abscissae.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double value(double x) const;
  double deriv(double x) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

 private:
  int locate(double x) const;
  std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
};

// Full-precision decimal text for a double; round-trips exactly.
std::string format_full(double v);

// Uniformly log-spaced samples in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int count);

// Uniformly spaced samples in [lo, hi] including both endpoints.
std::vector<double> lin_spaced(double lo, double hi, int count);

}  // namespace sphflow
