#include "sphflow/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "sphflow/expression.hpp"
#include "sphflow/numerics.hpp"

namespace sphflow {

namespace {

std::function<double(double)> momentum_closure(
    std::function<double(double)> rho0, double m_amp, double m_width) {
  return [rho0 = std::move(rho0), m_amp, m_width](double r) {
    const double q = r / m_width;
    return m_amp * rho0(r) * r * std::exp(-q * q);
  };
}

std::vector<std::pair<double, double>> read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProfileError("cannot open table file: " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double r, v;
    if (!(ss >> r)) continue;  // blank line
    if (!(ss >> v))
      throw ProfileError(path + ":" + std::to_string(lineno) +
                         ": expected 'r value'");
    if (!rows.empty() && !(r > rows.back().first))
      throw ProfileError(path + ": radii must strictly increase");
    rows.emplace_back(r, v);
  }
  if (rows.size() < 2)
    throw ProfileError(path + ": need at least 2 table rows");
  return rows;
}

std::function<double(double)> table_closure(
    std::vector<std::pair<double, double>> rows) {
  return [rows = std::move(rows)](double r) {
    if (r <= rows.front().first) return rows.front().second;
    if (r >= rows.back().first) return rows.back().second;
    auto it = std::upper_bound(
        rows.begin(), rows.end(), r,
        [](double x, const std::pair<double, double>& row) {
          return x < row.first;
        });
    const auto& [r1, v1] = *it;
    const auto& [r0, v0] = *(it - 1);
    const double w = (r - r0) / (r1 - r0);
    return v0 + w * (v1 - v0);
  };
}

}  // namespace

RadialProfile gaussian_profile(double base, double amp, double width,
                               double center, double m_amp, double m_width) {
  if (!(width > 0.0) || !(m_width > 0.0))
    throw ProfileError("gaussian_profile: widths must be positive");
  RadialProfile p;
  std::ostringstream d;
  d << "gaussian(base=" << base << ",amp=" << amp << ",width=" << width
    << ",center=" << center << ")";
  p.description = d.str();
  p.rho0 = [base, amp, width, center](double r) {
    const double s = (r - center) / width;
    return base + amp * std::exp(-s * s);
  };
  p.m0 = momentum_closure(p.rho0, m_amp, m_width);
  return p;
}

RadialProfile bump_profile(double base, double amp, double a, double b,
                           double m_amp, double m_width) {
  if (!(b > a)) throw ProfileError("bump_profile: need b > a");
  if (!(m_width > 0.0))
    throw ProfileError("bump_profile: m_width must be positive");
  RadialProfile p;
  std::ostringstream d;
  d << "bump(base=" << base << ",amp=" << amp << ",on=(" << a << "," << b
    << "))";
  p.description = d.str();
  p.rho0 = [base, amp, a, b](double r) {
    const double s = (2.0 * r - a - b) / (b - a);
    if (!(std::abs(s) < 1.0)) return base;
    return base + amp * std::exp(1.0 - 1.0 / (1.0 - s * s));
  };
  p.m0 = momentum_closure(p.rho0, m_amp, m_width);
  return p;
}

RadialProfile table_profile(const std::string& rho_path,
                            const std::string& m_path) {
  RadialProfile p;
  p.description = "table(" + rho_path + ")";
  p.rho0 = table_closure(read_table(rho_path));
  if (m_path.empty())
    p.m0 = [](double) { return 0.0; };
  else
    p.m0 = table_closure(read_table(m_path));
  return p;
}

RadialProfile expression_profile(const std::string& rho_expr,
                                 const std::string& m_expr) {
  RadialProfile p;
  p.description = "expr(rho=" + rho_expr + ",m=" + m_expr + ")";
  Expression rho = Expression::parse(rho_expr);
  p.rho0 = [rho](double r) { return rho(r); };
  if (m_expr.empty()) {
    p.m0 = [](double) { return 0.0; };
  } else {
    Expression m = Expression::parse(m_expr);
    p.m0 = [m](double r) { return m(r); };
  }
  return p;
}

// ---------------------------------------------------------------------------

TruncatedProfile truncate_and_floor(const RadialProfile& profile,
                                    const RegularizationParams& p) {
  const double inner = p.inner_radius();
  const double R = p.R;
  const double eps = p.epsilon;
  const double delta = p.delta;
  if (!(R - 2.0 * delta > inner + 2.0 * delta))
    throw ProfileError("truncate_and_floor: velocity support empty");

  // Reject negative raw density on the annulus up front.
  for (double r : lin_spaced(inner, R, 4096))
    if (profile.rho0(r) < 0.0)
      throw ProfileError("truncate_and_floor: negative density at r = " +
                         format_full(r));

  TruncatedProfile out;
  out.rho = [rho0 = profile.rho0, inner, R, eps](double r) {
    return rho0(std::clamp(r, inner, R)) + eps;
  };
  out.u = [rho0 = profile.rho0, m0 = profile.m0, inner, R, eps,
           delta](double r) {
    if (r <= inner + 2.0 * delta || r >= R - 2.0 * delta) return 0.0;
    return m0(r) / (rho0(r) + eps);
  };
  return out;
}

Mollifier Mollifier::make(double delta) {
  if (!(delta >= 0.0)) throw ProfileError("Mollifier: delta must be >= 0");
  Mollifier m;
  m.delta = delta;
  const auto res = adaptive_simpson(
      [](double s) {
        const double q = 1.0 - s * s;
        return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
      },
      -1.0, 1.0, 1e-14, 1e-300);
  m.normalization = res.value;
  return m;
}

double Mollifier::kernel(double s) const {
  if (!(delta > 0.0)) return 0.0;
  const double q = 1.0 - (s / delta) * (s / delta);
  if (!(q > 0.0)) return 0.0;
  return std::exp(-1.0 / q) / (normalization * delta);
}

double SampledProfile::rho_at(double x) const {
  if (x <= r.front()) return rho.front();
  if (x >= r.back()) return rho.back();
  const auto it = std::upper_bound(r.begin(), r.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - r.begin());
  const double w = (x - r[i - 1]) / (r[i] - r[i - 1]);
  return rho[i - 1] + w * (rho[i] - rho[i - 1]);
}

double SampledProfile::u_at(double x) const {
  if (x <= r.front()) return u.front();
  if (x >= r.back()) return u.back();
  const auto it = std::upper_bound(r.begin(), r.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - r.begin());
  const double w = (x - r[i - 1]) / (r[i] - r[i - 1]);
  return u[i - 1] + w * (u[i] - u[i - 1]);
}

SampledProfile mollify(const TruncatedProfile& f, const Mollifier& mol,
                       const RegularizationParams& p, int K) {
  if (K < 8) throw ProfileError("mollify: K must be >= 8");
  const double inner = p.inner_radius();
  const int fine = 4 * K;
  SampledProfile out;
  out.r = lin_spaced(inner, p.R, fine + 1);
  out.rho.resize(out.r.size());
  out.u.resize(out.r.size());

  if (!(mol.delta > 0.0)) {
    for (std::size_t i = 0; i < out.r.size(); ++i) {
      out.rho[i] = f.rho(out.r[i]);
      out.u[i] = f.u(out.r[i]);
    }
    return out;
  }

  // Discrete kernel: composite Gauss-Legendre nodes over [-delta, delta],
  // weights renormalized to unit sum so constants are fixed points.
  const GaussRule& rule = gauss_rule(5);
  const int panels = 16;
  std::vector<double> offs, wts;
  for (int j = 0; j < panels; ++j) {
    const double a = -mol.delta + 2.0 * mol.delta * j / panels;
    const double b = -mol.delta + 2.0 * mol.delta * (j + 1) / panels;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = mid + half * rule.nodes[q];
      offs.push_back(s);
      wts.push_back(half * rule.weights[q] * mol.kernel(s));
    }
  }
  double wsum = 0.0;
  for (double w : wts) wsum += w;
  for (double& w : wts) w /= wsum;

  for (std::size_t i = 0; i < out.r.size(); ++i) {
    const double r = out.r[i];
    double rv = 0.0, uv = 0.0;
    for (std::size_t q = 0; q < offs.size(); ++q) {
      rv += wts[q] * f.rho(r - offs[q]);
      uv += wts[q] * f.u(r - offs[q]);
    }
    out.rho[i] = std::max(rv, p.epsilon);  // guard the floor against rounding
    out.u[i] = uv;
  }
  return out;
}

RadialState init_state(const SampledProfile& f, const RegularizationParams& p,
                       int K) {
  if (K < 8) throw ProfileError("init_state: K must be >= 8");
  RadialState s;
  s.time = 0.0;
  s.dim = p.dim;
  s.node_r = lin_spaced(p.inner_radius(), p.R, K + 1);
  s.node_u.resize(K + 1);
  for (int i = 0; i <= K; ++i) s.node_u[i] = f.u_at(s.node_r[i]);
  s.node_u.front() = 0.0;
  s.node_u.back() = 0.0;
  s.cell_mass.resize(K);
  s.cell_rho.resize(K);
  const int dim = p.dim;
  for (int j = 0; j < K; ++j) {
    s.cell_mass[j] = gauss_composite(
        [&](double r) { return f.rho_at(r) * std::pow(r, dim - 1); },
        s.node_r[j], s.node_r[j + 1], 4, 5);
  }
  s.density_from_geometry();
  s.require_valid();
  return s;
}

// ---------------------------------------------------------------------------

bool HypothesisReport::pass() const {
  for (const auto& c : checks)
    if (c.applicable && !c.pass) return false;
  return true;
}

std::string HypothesisReport::to_text() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << c.name << ": ";
    if (!c.applicable)
      out << "not applicable";
    else
      out << (c.pass ? "pass" : "FAIL") << " (value "
          << format_full(c.value) << ")";
    if (!c.note.empty()) out << " — " << c.note;
    out << "\n";
  }
  return out.str();
}

namespace {

struct TailIntegral {
  double value = 0.0;
  bool converged = false;
  std::string note;
};

// Integral over [0, infinity) by dyadic windows; stops when a window
// contributes below 1e-14 of the running total.
TailIntegral integrate_tail(const std::function<double(double)>& f) {
  TailIntegral out;
  double lo = 0.0, hi = 1.0;
  for (int w = 0; w < 22; ++w) {
    const auto res = adaptive_simpson(f, lo, hi, 1e-10, 1e-16, 28);
    if (!res.converged) {
      out.note = "quadrature not converged near r = " +
                 format_full(res.worst_point);
      return out;
    }
    out.value += res.value;
    if (std::abs(res.value) < 1e-14 * (1.0 + std::abs(out.value))) {
      out.converged = true;
      return out;
    }
    lo = hi;
    hi *= 2.0;
  }
  out.note = "tail not decayed by r = " + format_full(lo);
  return out;
}

double central_derivative(const std::function<double(double)>& f, double r) {
  const double step = std::max(1e-6 * std::max(std::abs(r), 1.0), 1e-9);
  const double lo = std::max(r - step, 0.0);
  return (f(r + step) - f(lo)) / (r + step - lo);
}

}  // namespace

HypothesisReport validate_hypotheses(const RadialProfile& profile,
                                     const CoefficientModel& m, int dim) {
  if (dim < 2) throw ProfileError("validate_hypotheses: dim must be >= 2");
  HypothesisReport rep;
  const auto& rho0 = profile.rho0;
  const auto& m0 = profile.m0;
  const double dm1 = dim - 1.0;

  {
    HypothesisCheck c;
    c.name = "nonnegative_density";
    double worst = std::numeric_limits<double>::infinity();
    double worst_r = 0.0;
    std::vector<double> samples = lin_spaced(0.0, 16.0, 4096);
    for (double r : log_spaced(16.0, 1e6, 512)) samples.push_back(r);
    for (double r : samples) {
      const double v = rho0(r);
      if (v < worst) {
        worst = v;
        worst_r = r;
      }
    }
    c.value = worst;
    c.pass = worst >= -1e-12;
    if (!c.pass) c.note = "negative density near r = " + format_full(worst_r);
    rep.checks.push_back(std::move(c));
  }

  auto tail_check = [&](const std::string& name,
                        const std::function<double(double)>& f,
                        bool applicable, const std::string& na_note) {
    HypothesisCheck c;
    c.name = name;
    c.applicable = applicable;
    if (!applicable) {
      c.pass = true;
      c.note = na_note;
      rep.checks.push_back(std::move(c));
      return;
    }
    const TailIntegral t = integrate_tail(f);
    c.value = t.value;
    c.pass = t.converged && std::isfinite(t.value);
    c.note = t.note;
    rep.checks.push_back(std::move(c));
  };

  tail_check(
      "finite_mass",
      [&](double r) { return rho0(r) * std::pow(r, dm1); }, true, "");

  tail_check(
      "finite_pressure_energy",
      [&](double r) {
        return std::pow(std::max(rho0(r), 0.0), m.gamma) * std::pow(r, dm1);
      },
      m.gamma > 1.0, "coincides with finite_mass for gamma = 1");

  tail_check(
      "finite_viscosity_gradient",
      [&](double r) {
        const double rho = rho0(r);
        if (!(rho > 0.0)) return 0.0;
        const double dr = central_derivative(rho0, r);
        const double grad_h = m.h_prime(rho) * dr;
        return grad_h * grad_h / rho * std::pow(r, dm1);
      },
      true, "");

  tail_check(
      "finite_velocity_log_moment",
      [&](double r) {
        const double rho = rho0(r);
        const double mom = m0(r);
        if (!(rho > 0.0))
          return mom == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        const double u = mom / rho;
        return 0.5 * rho * u * u * (1.0 + std::log(1.0 + u * u)) *
               std::pow(r, dm1);
      },
      true, "");

  {
    HypothesisCheck c;
    c.name = "vacuum_momentum";
    c.pass = true;
    std::vector<double> samples = lin_spaced(0.0, 16.0, 4096);
    for (double r : log_spaced(16.0, 1e6, 512)) samples.push_back(r);
    for (double r : samples) {
      if (rho0(r) < 1e-300 && std::abs(m0(r)) > 0.0) {
        c.pass = false;
        c.value = m0(r);
        c.note = "momentum without mass at r = " + format_full(r);
        break;
      }
    }
    rep.checks.push_back(std::move(c));
  }

  return rep;
}

}  // namespace sphflow
