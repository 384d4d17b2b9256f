#include "sphflow/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "sphflow/numerics.hpp"

namespace sphflow {

namespace {

void check_constants(double nu, double nu1, double nu2, double gamma) {
  if (!(nu > 0.0)) throw ModelError("coefficient model: nu must be positive");
  if (!(nu1 <= nu2)) throw ModelError("coefficient model: nu1 > nu2");
  if (!(gamma >= 1.0)) throw ModelError("coefficient model: gamma < 1");
}

// hbar via the substitution sigma = q^2, which removes the 1/sqrt(sigma)
// singularity:  hbar(s) = 2 * integral_0^sqrt(s) h'(q^2) dq.
std::function<double(double)> numeric_hbar(std::function<double(double)> hp) {
  return [hp = std::move(hp)](double s) {
    if (!(s > 0.0)) return 0.0;
    const auto res = adaptive_simpson(
        [&](double q) { return hp(q * q); }, 0.0, std::sqrt(s), 1e-12, 1e-300);
    return 2.0 * res.value;
  };
}

}  // namespace

CoefficientModel power_law_model(double c, double p, double nu, double nu1,
                                 double nu2, double gamma) {
  if (!(c > 0.0) || !(p > 0.0))
    throw ModelError("power_law_model: need c > 0 and p > 0");
  check_constants(nu, nu1, nu2, gamma);
  CoefficientModel m;
  std::ostringstream name;
  name << "power(c=" << c << ",p=" << p << ")";
  m.name = name.str();
  m.gamma = gamma;
  m.nu = nu;
  m.nu1 = nu1;
  m.nu2 = nu2;
  m.h = [c, p](double s) { return c * std::pow(s, p); };
  m.h_prime = [c, p](double s) { return c * p * std::pow(s, p - 1.0); };
  m.g = [c, p](double s) { return 2.0 * c * (p - 1.0) * std::pow(s, p); };
  m.g_prime = [c, p](double s) {
    return 2.0 * c * p * (p - 1.0) * std::pow(s, p - 1.0);
  };
  if (p > 0.5) {
    m.hbar = [c, p](double s) {
      return s > 0.0 ? c * p * std::pow(s, p - 0.5) / (p - 0.5) : 0.0;
    };
  } else {
    m.hbar = [](double) -> double {
      throw ModelError("hbar diverges near vacuum for power p <= 1/2");
    };
  }
  return m;
}

CoefficientModel saint_venant_model() {
  CoefficientModel m = power_law_model(1.0, 1.0, 0.5, 2.0, 2.0, 2.0);
  m.name = "saint-venant";
  return m;
}

CoefficientModel table_model(const std::vector<double>& rho_knots,
                             const std::vector<double>& h_values, double nu,
                             double nu1, double nu2, double gamma) {
  check_constants(nu, nu1, nu2, gamma);
  if (rho_knots.size() < 2 || rho_knots.size() != h_values.size())
    throw ModelError("table_model: need >= 2 matching knots");
  if (!(rho_knots.front() > 0.0))
    throw ModelError("table_model: density knots must be positive");
  auto spline = std::make_shared<CubicSpline>(rho_knots, h_values);
  const double x0 = spline->x_min(), x1 = spline->x_max();
  const double y0 = spline->value(x0), y1 = spline->value(x1);
  const double d0 = spline->deriv(x0), d1 = spline->deriv(x1);

  auto h = [=](double s) {
    if (s <= x0) return y0 + d0 * (s - x0);
    if (s >= x1) return y1 + d1 * (s - x1);
    return spline->value(s);
  };
  auto hp = [=](double s) {
    if (s <= x0) return d0;
    if (s >= x1) return d1;
    return spline->deriv(s);
  };
  CoefficientModel m;
  m.name = "table(" + std::to_string(rho_knots.size()) + " knots)";
  m.gamma = gamma;
  m.nu = nu;
  m.nu1 = nu1;
  m.nu2 = nu2;
  m.h = h;
  m.h_prime = hp;
  m.g = [h, hp](double s) { return 2.0 * s * hp(s) - 2.0 * h(s); };
  // g'(s) = 2 s h''(s); differentiate h' numerically to stay agnostic of the
  // spline internals.
  m.g_prime = [hp](double s) {
    const double step = std::max(1e-6 * std::max(std::abs(s), 1.0), 1e-9);
    const double lo = std::max(s - step, 1e-12);
    return 2.0 * s * (hp(s + step) - hp(lo)) / (s + step - lo);
  };
  m.hbar = numeric_hbar(hp);
  return m;
}

CoefficientModel custom_model(const std::string& name,
                              std::function<double(double)> h,
                              std::function<double(double)> h_prime, double nu,
                              double nu1, double nu2, double gamma) {
  check_constants(nu, nu1, nu2, gamma);
  CoefficientModel m;
  m.name = name;
  m.gamma = gamma;
  m.nu = nu;
  m.nu1 = nu1;
  m.nu2 = nu2;
  m.h = h;
  m.h_prime = h_prime;
  m.g = [h, h_prime](double s) { return 2.0 * s * h_prime(s) - 2.0 * h(s); };
  auto g = m.g;
  m.g_prime = [g](double s) {
    const double step = std::max(1e-6 * std::max(std::abs(s), 1.0), 1e-9);
    const double lo = std::max(s - step, 1e-12);
    return (g(s + step) - g(lo)) / (s + step - lo);
  };
  m.hbar = numeric_hbar(h_prime);
  return m;
}

CoefficientModel custom_model_full(const std::string& name,
                                   std::function<double(double)> h,
                                   std::function<double(double)> h_prime,
                                   std::function<double(double)> g,
                                   std::function<double(double)> g_prime,
                                   double nu, double nu1, double nu2,
                                   double gamma) {
  CoefficientModel m = custom_model(name, std::move(h), std::move(h_prime), nu,
                                    nu1, nu2, gamma);
  m.g = std::move(g);
  m.g_prime = std::move(g_prime);
  return m;
}

// ---------------------------------------------------------------------------

bool ValidationReport::pass() const {
  for (const auto& c : conditions)
    if (c.applicable && !c.pass) return false;
  return true;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const auto& c : conditions) {
    out << c.name << ": ";
    if (!c.applicable)
      out << "not applicable";
    else
      out << (c.pass ? "pass" : "FAIL") << " (worst margin "
          << format_full(c.worst_margin) << " at rho "
          << format_full(c.worst_rho) << ")";
    if (!c.note.empty()) out << " — " << c.note;
    out << "\n";
  }
  return out.str();
}

std::vector<double> default_rho_samples() {
  return log_spaced(1e-6, 1e6, 1000);
}

ValidationReport validate_model(const CoefficientModel& m, int dim,
                                const std::vector<double>& rho_samples) {
  if (dim < 2) throw ModelError("validate_model: dim must be >= 2");
  if (rho_samples.empty())
    throw ModelError("validate_model: empty sample set");
  ValidationReport rep;

  auto track = [](ConditionResult& c, double margin, double rho) {
    if (margin < c.worst_margin) {
      c.worst_margin = margin;
      c.worst_rho = rho;
    }
  };

  {
    ConditionResult c;
    c.name = "lame_identity";
    c.worst_margin = std::numeric_limits<double>::infinity();
    const double tol = 1e-9;
    for (double s : rho_samples) {
      const double lhs = m.g(s);
      const double rhs = 2.0 * s * m.h_prime(s) - 2.0 * m.h(s);
      const double scale =
          std::max({1.0, std::abs(lhs), 2.0 * s * std::abs(m.h_prime(s)),
                    2.0 * std::abs(m.h(s))});
      track(c, tol - std::abs(lhs - rhs) / scale, s);
    }
    c.pass = c.worst_margin >= 0.0;
    rep.conditions.push_back(std::move(c));
  }

  {
    ConditionResult c;
    c.name = "shear_slope_floor";
    c.worst_margin = std::numeric_limits<double>::infinity();
    for (double s : rho_samples) track(c, (m.h_prime(s) - m.nu) / m.nu, s);
    const double h_origin = m.h(rho_samples.front());
    c.pass = c.worst_margin >= 0.0 && h_origin >= -1e-12;
    if (h_origin < -1e-12) c.note = "h negative near vacuum";
    rep.conditions.push_back(std::move(c));
  }

  {
    ConditionResult c;
    c.name = "bulk_slope_bound";
    c.worst_margin = std::numeric_limits<double>::infinity();
    for (double s : rho_samples) {
      const double cap = m.h_prime(s) / m.nu;
      const double scale = std::max(std::abs(cap), 1e-300);
      track(c, (cap - std::abs(m.g_prime(s))) / scale, s);
    }
    c.pass = c.worst_margin >= -1e-9;
    rep.conditions.push_back(std::move(c));
  }

  {
    ConditionResult c;
    c.name = "trace_bounds";
    c.worst_margin = std::numeric_limits<double>::infinity();
    for (double s : rho_samples) {
      const double hs = m.h(s);
      if (!(hs > 0.0)) {
        track(c, -std::numeric_limits<double>::infinity(), s);
        c.note = "h not positive";
        continue;
      }
      const double q = (2.0 * hs + dim * m.g(s)) / hs;
      const double lo_scale = std::max(1.0, std::abs(m.nu1));
      const double hi_scale = std::max(1.0, std::abs(m.nu2));
      track(c, (q - m.nu1) / lo_scale, s);
      track(c, (m.nu2 - q) / hi_scale, s);
    }
    c.pass = c.worst_margin >= -1e-9;
    rep.conditions.push_back(std::move(c));
  }

  {
    ConditionResult c;
    c.name = "vacuum_growth";
    c.applicable =
        dim >= 3 && m.gamma >= static_cast<double>(dim) / (dim - 2) - 1e-12;
    if (c.applicable) {
      const double expo = (dim - 2) * m.gamma / dim + 1e-3;
      const double floor = 1e-8;
      c.worst_margin = std::numeric_limits<double>::infinity();
      for (double s : log_spaced(1e3, 1e6, 200))
        track(c, m.h(s) / std::pow(s, expo) - floor, s);
      c.pass = c.worst_margin >= 0.0;
    } else {
      c.pass = true;
      c.note = "requires dim >= 3 and gamma >= dim/(dim-2)";
    }
    rep.conditions.push_back(std::move(c));
  }

  return rep;
}

bool check_dimension_bounds(double nu1, double nu2, int dim) {
  if (dim < 2) throw ModelError("check_dimension_bounds: dim must be >= 2");
  if (dim == 2) return true;  // the window degenerates: no constraint
  const double d = static_cast<double>(dim);
  const double root = 4.0 * std::sqrt(2.0 * d * d - 4.0 * d + 4.0);
  const double den = (d - 2.0) * (d - 2.0);
  const double lo = (4.0 * d - root) / den;
  const double hi = (4.0 * d + root) / den;
  return (nu1 - 2.0) / d >= lo && (nu2 - 2.0) / d <= hi;
}

namespace {

double discriminant_root(double m, double dim) {
  const double a = dim * (m - 1.0);
  const double b = (dim - 1.0) * (m - 1.0) * (m - 2.0) * (m - 2.0);
  return std::sqrt(a * a + b);
}

void check_exponent_domain(double m, int dim) {
  if (dim < 2) throw std::domain_error("v1/v2: dim must be >= 2");
  if (!(m > 2.0)) throw std::domain_error("v1/v2: exponent m must exceed 2");
}

}  // namespace

double v1(double m, int dim) {
  check_exponent_domain(m, dim);
  // Conjugate arrangement: no subtraction of nearly equal quantities near
  // m = 2, where the naive root formula cancels catastrophically.
  return -4.0 * (m - 1.0) / (dim * (m - 1.0) + discriminant_root(m, dim));
}

double v2(double m, int dim) {
  check_exponent_domain(m, dim);
  return 4.0 * (dim * (m - 1.0) + discriminant_root(m, dim)) /
         ((dim - 1.0) * (m - 2.0) * (m - 2.0));
}

bool admissible_alpha(double alpha, double nu1, double nu2, int dim) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("admissible_alpha: alpha must lie in (0, 1)");
  const double m = dim / (1.0 - alpha);
  const double t1 = (nu1 - 2.0) / dim;
  const double ta = (alpha - 1.0) / dim;
  const double t2 = (nu2 - 2.0) / dim;
  return v1(m, dim) < std::min(t1, ta) && v2(m, dim) > t2;
}

bool admissible_alpha(double alpha, const CoefficientModel& m, int dim) {
  return admissible_alpha(alpha, m.nu1, m.nu2, dim);
}

// ---------------------------------------------------------------------------

RegularizationParams RegularizationParams::make(double epsilon, double R,
                                                double delta, double alpha,
                                                int dim, bool exterior) {
  RegularizationParams p;
  p.epsilon = epsilon;
  p.R = R > 0.0 ? R : default_radius(epsilon, dim);
  p.delta = delta;
  p.alpha = alpha;
  p.dim = dim;
  p.exterior = exterior;
  p.theta = (dim - 1.0 + alpha) / dim;
  p.validate();
  return p;
}

double RegularizationParams::default_radius(double epsilon, int dim) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ModelError("default_radius: epsilon must lie in (0, 1)");
  return std::pow(epsilon, -1.0 / (2.0 * dim));
}

void RegularizationParams::validate() const {
  if (dim < 2) throw ModelError("regularization: dim must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ModelError("regularization: epsilon must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ModelError("regularization: alpha must lie in (0, 1)");
  if (!(delta >= 0.0)) throw ModelError("regularization: delta must be >= 0");
  if (!(R > inner_radius()))
    throw ModelError("regularization: outer radius must exceed inner radius");
  const double budget = std::sqrt(epsilon) * (1.0 + 1e-12);
  if (epsilon * std::pow(R, dim) > budget)
    throw ModelError(
        "regularization: outer radius too large: epsilon * R^dim exceeds "
        "sqrt(epsilon)");
  const double expect = (dim - 1.0 + alpha) / dim;
  if (theta != expect)
    throw ModelError("regularization: theta inconsistent with alpha and dim");
}

CoefficientModel regularized_pair(const CoefficientModel& m,
                                  const RegularizationParams& p) {
  const double eps = p.epsilon;
  const double th = p.theta;
  CoefficientModel out = m;
  out.name = m.name + "+reg";
  out.nu1 = std::min(m.nu1, 2.0 * p.alpha);
  out.nu2 = std::max(m.nu2, 2.0 * p.alpha);
  out.h = [h = m.h, eps, th](double s) {
    return h(s) + 0.5 * eps * std::pow(s, th);
  };
  out.h_prime = [hp = m.h_prime, eps, th](double s) {
    return hp(s) + 0.5 * eps * th * std::pow(s, th - 1.0);
  };
  out.g = [g = m.g, eps, th](double s) {
    return g(s) + (th - 1.0) * eps * std::pow(s, th);
  };
  out.g_prime = [gp = m.g_prime, eps, th](double s) {
    return gp(s) + th * (th - 1.0) * eps * std::pow(s, th - 1.0);
  };
  out.hbar = [hb = m.hbar, eps, th](double s) {
    return hb(s) + (s > 0.0
                        ? 0.5 * eps * th * std::pow(s, th - 0.5) / (th - 0.5)
                        : 0.0);
  };
  return out;
}

std::pair<double, double> growth_envelope_interval(const CoefficientModel& m,
                                                   int dim, double c_lo,
                                                   double c_hi) {
  if (dim < 2) throw ModelError("growth envelope: dim must be >= 2");
  const double p1 = (m.nu1 + 2.0 * (dim - 1.0)) / (2.0 * dim);
  const double p2 = (m.nu2 + 2.0 * (dim - 1.0)) / (2.0 * dim);
  double need_lo = -std::numeric_limits<double>::infinity();
  double allow_hi = std::numeric_limits<double>::infinity();
  for (int k = -10; k <= 10; ++k) {
    const double s = std::ldexp(1.0, k);
    const double ls = std::log(s);
    const double lh = std::log(m.h(s));
    const double la = std::min(p1 * ls, p2 * ls);
    const double lb = std::max(p1 * ls, p2 * ls);
    need_lo = std::max(need_lo, lh - lb);   // C >= h / s^(larger envelope)
    allow_hi = std::min(allow_hi, lh - la); // C <= h / s^(smaller envelope)
  }
  return {std::max(c_lo, std::exp(need_lo)),
          std::min(c_hi, std::exp(allow_hi))};
}

bool check_growth_envelope(const CoefficientModel& m, int dim, double c_lo,
                           double c_hi) {
  const auto [lo, hi] = growth_envelope_interval(m, dim, c_lo, c_hi);
  return lo <= hi * (1.0 + 1e-12);
}

}  // namespace sphflow
