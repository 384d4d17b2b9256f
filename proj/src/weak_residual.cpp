#include "sphflow/weak_residual.hpp"

#include <algorithm>
#include <cmath>

#include "sphflow/diagnostics.hpp"
#include "sphflow/numerics.hpp"

namespace sphflow {

namespace {

double smoothstep(double s) { return ((6.0 * s - 15.0) * s + 10.0) * s * s * s; }
double smoothstep_d(double s) {
  const double q = s * (s - 1.0);
  return 30.0 * q * q;
}
double smoothstep_dd(double s) {
  return 60.0 * s * (2.0 * s - 1.0) * (s - 1.0);
}

}  // namespace

TestFunction TestFunction::bump(std::string id, double a, double b,
                                double flank_in, double flank_out,
                                double t_final) {
  if (!(a > 0.0) || !(b > a))
    throw ResidualError("test function: need 0 < a < b");
  if (!(flank_in > 0.0) || !(flank_out > 0.0))
    throw ResidualError("test function: flank widths must be positive");
  if (flank_in + flank_out > (b - a) * (1.0 + 1e-12))
    throw ResidualError("test function: flanks overlap (no plateau fits)");
  if (!(t_final > 0.0))
    throw ResidualError("test function: final time must be positive");
  TestFunction tf;
  tf.id_ = std::move(id);
  tf.a_ = a;
  tf.b_ = b;
  tf.flank_in_ = flank_in;
  tf.flank_out_ = flank_out;
  tf.t_final_ = t_final;
  return tf;
}

double TestFunction::phi(double r) const {
  if (r <= a_ || r >= b_) return 0.0;
  if (r < a_ + flank_in_) return smoothstep((r - a_) / flank_in_);
  if (r > b_ - flank_out_) return smoothstep((b_ - r) / flank_out_);
  return 1.0;
}

double TestFunction::phi_r(double r) const {
  if (r <= a_ || r >= b_) return 0.0;
  if (r < a_ + flank_in_) return smoothstep_d((r - a_) / flank_in_) / flank_in_;
  if (r > b_ - flank_out_)
    return -smoothstep_d((b_ - r) / flank_out_) / flank_out_;
  return 0.0;
}

double TestFunction::phi_rr(double r) const {
  if (r <= a_ || r >= b_) return 0.0;
  if (r < a_ + flank_in_)
    return smoothstep_dd((r - a_) / flank_in_) / (flank_in_ * flank_in_);
  if (r > b_ - flank_out_)
    return smoothstep_dd((b_ - r) / flank_out_) / (flank_out_ * flank_out_);
  return 0.0;
}

double TestFunction::psi(double t) const {
  const double q = 1.0 - t / t_final_;
  return q * q;
}

double TestFunction::psi_t(double t) const {
  return -2.0 * (1.0 - t / t_final_) / t_final_;
}

std::vector<double> TestFunction::radial_breakpoints() const {
  return {a_, a_ + flank_in_, b_ - flank_out_, b_};
}

// --- ExtendedSolution ---------------------------------------------------------

ExtendedSolution::ExtendedSolution(std::vector<RadialState> snapshots,
                                   CoefficientModel model,
                                   RegularizationParams params)
    : snaps_(std::move(snapshots)),
      model_(std::move(model)),
      params_(params) {
  if (snaps_.empty())
    throw ResidualError("extended solution: no snapshots");
  times_.reserve(snaps_.size());
  centers_.reserve(snaps_.size());
  for (const auto& s : snaps_) {
    s.require_valid();
    if (!times_.empty() && !(s.time > times_.back()))
      throw ResidualError("extended solution: snapshot times must increase");
    times_.push_back(s.time);
    std::vector<double> c(s.cells());
    for (int j = 0; j < s.cells(); ++j) c[j] = s.cell_center(j);
    centers_.push_back(std::move(c));
  }
}

int ExtendedSolution::locate_time(double t, double* lambda) const {
  const double span = std::max(1.0, times_.back() - times_.front());
  if (t < times_.front() - 1e-12 * span || t > times_.back() + 1e-12 * span)
    throw ResidualError("extended solution: time " + format_full(t) +
                        " outside the stored range");
  if (times_.size() == 1) {
    *lambda = 0.0;
    return 0;
  }
  const double tc = std::clamp(t, times_.front(), times_.back());
  auto it = std::upper_bound(times_.begin(), times_.end(), tc);
  int k = static_cast<int>(it - times_.begin()) - 1;
  k = std::clamp(k, 0, static_cast<int>(times_.size()) - 2);
  *lambda = (tc - times_[k]) / (times_[k + 1] - times_[k]);
  return k;
}

ExtendedSolution::SpaceFields ExtendedSolution::eval_space(int k,
                                                           double r) const {
  const RadialState& s = snaps_[k];
  const std::vector<double>& rc = centers_[k];
  SpaceFields f{0.0, 0.0, 0.0, 0.0};

  // Velocity: piecewise linear through the nodes.
  {
    const auto it = std::upper_bound(s.node_r.begin(), s.node_r.end(), r);
    int i = static_cast<int>(it - s.node_r.begin()) - 1;
    i = std::clamp(i, 0, s.cells() - 1);
    const double w = (r - s.node_r[i]) / (s.node_r[i + 1] - s.node_r[i]);
    f.u = s.node_u[i] + w * (s.node_u[i + 1] - s.node_u[i]);
    f.u_r = (s.node_u[i + 1] - s.node_u[i]) /
            (s.node_r[i + 1] - s.node_r[i]);
  }

  // Density: piecewise linear through cell centers, constant end segments.
  if (r <= rc.front()) {
    f.rho = s.cell_rho.front();
    f.rho_r = 0.0;
  } else if (r >= rc.back()) {
    f.rho = s.cell_rho.back();
    f.rho_r = 0.0;
  } else {
    const auto it = std::upper_bound(rc.begin(), rc.end(), r);
    const int j = static_cast<int>(it - rc.begin());
    const double w = (r - rc[j - 1]) / (rc[j] - rc[j - 1]);
    f.rho = s.cell_rho[j - 1] + w * (s.cell_rho[j] - s.cell_rho[j - 1]);
    f.rho_r = (s.cell_rho[j] - s.cell_rho[j - 1]) / (rc[j] - rc[j - 1]);
  }
  return f;
}

ExtendedSolution::Fields ExtendedSolution::eval(double r, double t) const {
  Fields out;
  const RadialState& s0 = snaps_.front();
  if (r < s0.inner_radius() || r > s0.outer_radius()) return out;  // zero
  double lam = 0.0;
  const int k = locate_time(t, &lam);
  const SpaceFields a = eval_space(k, r);
  out.inside = true;
  if (lam == 0.0 || static_cast<std::size_t>(k + 1) >= snaps_.size()) {
    out.rho = a.rho;
    out.rho_r = a.rho_r;
    out.u = a.u;
    out.u_r = a.u_r;
    return out;
  }
  const SpaceFields b = eval_space(k + 1, r);
  out.rho = (1.0 - lam) * a.rho + lam * b.rho;
  out.rho_r = (1.0 - lam) * a.rho_r + lam * b.rho_r;
  out.u = (1.0 - lam) * a.u + lam * b.u;
  out.u_r = (1.0 - lam) * a.u_r + lam * b.u_r;
  return out;
}

double ExtendedSolution::inner_wall_u_r(double t) const {
  double lam = 0.0;
  const int k = locate_time(t, &lam);
  auto one_sided = [&](const RadialState& s) {
    return (s.node_u[1] - s.node_u[0]) / (s.node_r[1] - s.node_r[0]);
  };
  if (lam == 0.0 || static_cast<std::size_t>(k + 1) >= snaps_.size())
    return one_sided(snaps_[k]);
  return (1.0 - lam) * one_sided(snaps_[k]) + lam * one_sided(snaps_[k + 1]);
}

double ExtendedSolution::inner_wall_rho(double t) const {
  double lam = 0.0;
  const int k = locate_time(t, &lam);
  if (lam == 0.0 || static_cast<std::size_t>(k + 1) >= snaps_.size())
    return snaps_[k].cell_rho.front();
  return (1.0 - lam) * snaps_[k].cell_rho.front() +
         lam * snaps_[k + 1].cell_rho.front();
}

// --- residual quadratures -------------------------------------------------------

namespace {

// Radial breakpoints for integrating a test-function expression against the
// solution: the support clipped to the annulus, split at the flank joints.
std::vector<double> radial_breaks(const ExtendedSolution& sol,
                                  const TestFunction& tf) {
  const double lo = std::max(tf.support_lo(),
                             sol.snapshots().front().inner_radius());
  const double hi = std::min(tf.support_hi(),
                             sol.snapshots().front().outer_radius());
  std::vector<double> breaks;
  if (!(hi > lo)) return breaks;  // empty overlap
  breaks.push_back(lo);
  for (double p : tf.radial_breakpoints())
    if (p > lo && p < hi) breaks.push_back(p);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

// Time panels: [t1, t2] split at the snapshot knots.
std::vector<double> time_breaks(const ExtendedSolution& sol, double t1,
                                double t2) {
  std::vector<double> breaks{t1};
  for (double t : sol.time_knots())
    if (t > t1 && t < t2) breaks.push_back(t);
  breaks.push_back(t2);
  return breaks;
}

// Integrate F(t) = (radial integral of f(r, t)) over [t1, t2].
double space_time_integral(
    const ExtendedSolution& sol, const TestFunction& tf, double t1, double t2,
    const QuadratureSpec& q,
    const std::function<double(double, double)>& integrand) {
  const std::vector<double> rb = radial_breaks(sol, tf);
  if (rb.size() < 2) return 0.0;
  const std::vector<double> tb = time_breaks(sol, t1, t2);
  const GaussRule& rule = gauss_rule(q.time_order);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < tb.size(); ++s) {
    const double mid = 0.5 * (tb[s] + tb[s + 1]);
    const double half = 0.5 * (tb[s + 1] - tb[s]);
    if (!(half > 0.0)) continue;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double t = mid + half * rule.nodes[k];
      const double inner = gauss_composite(
          [&](double r) { return integrand(r, t); }, rb, q.panels,
          q.space_order, q.min_per_segment);
      total += half * rule.weights[k] * inner;
    }
  }
  return total;
}

// Radial integral of f(r) at a fixed time (for the time brackets).
double space_integral(const ExtendedSolution& sol, const TestFunction& tf,
                      const QuadratureSpec& q,
                      const std::function<double(double)>& f) {
  const std::vector<double> rb = radial_breaks(sol, tf);
  if (rb.size() < 2) return 0.0;
  return gauss_composite(f, rb, q.panels, q.space_order, q.min_per_segment);
}

void check_window(const ExtendedSolution& sol, const TestFunction& tf,
                  double t1, double t2) {
  if (!(t1 < t2))
    throw ResidualError("residual window: need t1 < t2");
  if (t2 > tf.t_final() * (1.0 + 1e-12))
    throw ResidualError("residual window: t2 exceeds the test horizon");
  const double span = std::max(1.0, sol.t_end() - sol.t_begin());
  if (t1 < sol.t_begin() - 1e-12 * span || t2 > sol.t_end() + 1e-12 * span)
    throw ResidualError("residual window outside the stored solution range");
}

}  // namespace

double mass_weak_residual(const ExtendedSolution& sol, const TestFunction& tf,
                          double t1, double t2, const QuadratureSpec& q) {
  check_window(sol, tf, t1, t2);
  const double dm1 = sol.snapshots().front().dim - 1.0;

  auto bracket_at = [&](double t) {
    return space_integral(sol, tf, q, [&](double r) {
      const auto f = sol.eval(r, t);
      return f.rho * tf.phi(r) * tf.psi(t) * std::pow(r, dm1);
    });
  };
  const double bracket = bracket_at(t2) - bracket_at(t1);

  const double interior = space_time_integral(
      sol, tf, t1, t2, q, [&](double r, double t) {
        const auto f = sol.eval(r, t);
        return (f.rho * tf.phi(r) * tf.psi_t(t) +
                f.rho * f.u * tf.phi_r(r) * tf.psi(t)) *
               std::pow(r, dm1);
      });
  return bracket - interior;
}

MomentumParts momentum_weak_residual(const ExtendedSolution& sol,
                                     const TestFunction& tf, double t1,
                                     double t2, const QuadratureSpec& q) {
  check_window(sol, tf, t1, t2);
  const CoefficientModel& m = sol.model();
  const RegularizationParams& p = sol.params();
  const double dm1 = sol.snapshots().front().dim - 1.0;
  const double eps = p.epsilon;
  const double th = p.theta;

  MomentumParts parts;

  auto bracket_at = [&](double t) {
    return space_integral(sol, tf, q, [&](double r) {
      const auto f = sol.eval(r, t);
      return f.rho * f.u * tf.phi(r) * tf.psi(t) * std::pow(r, dm1);
    });
  };
  parts.bracket = -(bracket_at(t2) - bracket_at(t1));

  // One space-time sweep accumulating every double integral.
  double transport = 0.0, pressure = 0.0, shear_i = 0.0, bulk_i = 0.0,
         shear_d = 0.0, bulk_d = 0.0, eps_terms = 0.0;
  {
    const std::vector<double> rb = radial_breaks(sol, tf);
    const std::vector<double> tb = time_breaks(sol, t1, t2);
    const GaussRule& trule = gauss_rule(q.time_order);
    if (rb.size() >= 2) {
      for (std::size_t s = 0; s + 1 < tb.size(); ++s) {
        const double mid = 0.5 * (tb[s] + tb[s + 1]);
        const double half = 0.5 * (tb[s + 1] - tb[s]);
        if (!(half > 0.0)) continue;
        for (std::size_t k = 0; k < trule.nodes.size(); ++k) {
          const double t = mid + half * trule.nodes[k];
          const double tw = half * trule.weights[k];
          const double ps = tf.psi(t), ps_t = tf.psi_t(t);

          double tr = 0.0, prs = 0.0, sh_i = 0.0, bu_i = 0.0, sh_d = 0.0,
                 bu_d = 0.0, ep = 0.0;
          const double total_len = rb.back() - rb.front();
          for (std::size_t seg = 0; seg + 1 < rb.size(); ++seg) {
            int n = static_cast<int>(
                std::ceil(q.panels * (rb[seg + 1] - rb[seg]) / total_len));
            n = std::max(n, q.min_per_segment);
            const GaussRule& rrule = gauss_rule(q.space_order);
            const double hseg = (rb[seg + 1] - rb[seg]) / n;
            for (int pan = 0; pan < n; ++pan) {
              const double ra = rb[seg] + pan * hseg;
              const double rmid = ra + 0.5 * hseg, rhalf = 0.5 * hseg;
              for (std::size_t kk = 0; kk < rrule.nodes.size(); ++kk) {
                const double r = rmid + rhalf * rrule.nodes[kk];
                const double rw = rhalf * rrule.weights[kk];
                const auto f = sol.eval(r, t);
                if (!f.inside) continue;
                const double geo = std::pow(r, dm1);
                const double ph = tf.phi(r), ph_r = tf.phi_r(r),
                             ph_rr = tf.phi_rr(r);
                const double sq = std::sqrt(f.rho);
                const double squ = sq * f.u;          // sqrt(rho) u
                const double sq_r = f.rho_r / (2.0 * sq);
                const double divu = f.u_r + dm1 * f.u / r;
                const double divphi = ph_r + dm1 * ph / r;
                const double lap = ph_rr + dm1 * (ph_r / r - ph / (r * r));
                const double h = m.h(f.rho), hp = m.h_prime(f.rho);
                const double g = m.g(f.rho), gp = m.g_prime(f.rho);
                const double w = tw * rw * geo;

                tr += w * (f.rho * f.u * ph * ps_t +
                           f.rho * f.u * f.u * ph_r * ps);
                prs += w * std::pow(f.rho, m.gamma) * divphi * ps;
                sh_d += w * 2.0 * h *
                        (f.u_r * ph_r + dm1 * f.u * ph / (r * r)) * ps;
                bu_d += w * g * divu * divphi * ps;
                sh_i += -w *
                        (2.0 * (h / sq) * squ * lap +
                         2.0 * squ * 2.0 * hp * sq_r * ph_r) *
                        ps;
                bu_i += -w *
                        ((g / sq) * squ * lap +
                         2.0 * gp * sq_r * squ * divphi) *
                        ps;
                ep += w * eps * std::pow(f.rho, th) *
                      ((th - 1.0) * divu * divphi +
                       (f.u_r * ph_r + dm1 * f.u * ph / (r * r))) *
                      ps;
              }
            }
          }
          transport += tr;
          pressure += prs;
          shear_i += sh_i;
          bulk_i += bu_i;
          shear_d += sh_d;
          bulk_d += bu_d;
          eps_terms += ep;
        }
      }
    }
  }

  parts.transport = transport;
  parts.pressure = pressure;
  parts.shear_ibp = shear_i;
  parts.bulk_ibp = bulk_i;
  parts.shear_direct = shear_d;
  parts.bulk_direct = bulk_d;
  parts.epsilon_terms = eps_terms;
  parts.residual = parts.bracket + parts.transport + parts.pressure -
                   parts.shear_ibp - parts.bulk_ibp;
  return parts;
}

double boundary_term(const ExtendedSolution& sol, const TestFunction& tf,
                     double t1, double t2, const QuadratureSpec& q) {
  check_window(sol, tf, t1, t2);
  const RegularizationParams& p = sol.params();
  if (p.exterior)
    throw ResidualError(
        "boundary term: not defined for the exterior problem (physical wall)");
  const CoefficientModel& m = sol.model();
  const double inner = sol.snapshots().front().inner_radius();
  const double geo = std::pow(inner, p.dim - 1.0);
  const double phi_w = tf.phi(inner);
  if (phi_w == 0.0) return 0.0;

  const std::vector<double> tb = time_breaks(sol, t1, t2);
  const GaussRule& rule = gauss_rule(q.time_order);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < tb.size(); ++s) {
    const double mid = 0.5 * (tb[s] + tb[s + 1]);
    const double half = 0.5 * (tb[s + 1] - tb[s]);
    if (!(half > 0.0)) continue;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double t = mid + half * rule.nodes[k];
      const double rho_w = sol.inner_wall_rho(t);
      const double u_r_w = sol.inner_wall_u_r(t);
      const double visc =
          (shear_total(m, p, rho_w) + bulk_total(m, p, rho_w)) * u_r_w;
      const double val =
          (visc - std::pow(rho_w, m.gamma)) * geo * phi_w * tf.psi(t);
      total += half * rule.weights[k] * val;
    }
  }
  return total;
}

double epsilon_envelope(double epsilon, double theta, int dim,
                        double support_outer) {
  return std::sqrt(epsilon) *
         std::pow(support_outer, dim * (1.0 - theta) / 2.0);
}

}  // namespace sphflow
