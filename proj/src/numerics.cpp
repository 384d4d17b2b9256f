#include "sphflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sphflow {

const GaussRule& gauss_rule(int order) {
  static const GaussRule g2{{-0.57735026918962576451, 0.57735026918962576451},
                            {1.0, 1.0}};
  static const GaussRule g3{
      {-0.77459666924148337704, 0.0, 0.77459666924148337704},
      {0.55555555555555555556, 0.88888888888888888889,
       0.55555555555555555556}};
  static const GaussRule g4{
      {-0.86113631159405257522, -0.33998104358485626480,
       0.33998104358485626480, 0.86113631159405257522},
      {0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
       0.34785484513745385737}};
  static const GaussRule g5{
      {-0.90617984593866399280, -0.53846931010568309104, 0.0,
       0.53846931010568309104, 0.90617984593866399280},
      {0.23692688505618908751, 0.47862867049936646804, 0.56888888888888888889,
       0.47862867049936646804, 0.23692688505618908751}};
  switch (order) {
    case 2: return g2;
    case 3: return g3;
    case 4: return g4;
    case 5: return g5;
    default:
      throw std::invalid_argument("gauss_rule: unsupported order " +
                                  std::to_string(order));
  }
}

double gauss_panel(const std::function<double(double)>& f, double a, double b,
                   int order) {
  const GaussRule& rule = gauss_rule(order);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return half * sum;
}

double gauss_composite(const std::function<double(double)>& f, double a,
                       double b, int panels, int order) {
  if (panels < 1) throw std::invalid_argument("gauss_composite: panels < 1");
  if (a == b) return 0.0;
  double sum = 0.0;
  const double h = (b - a) / panels;
  for (int j = 0; j < panels; ++j)
    sum += gauss_panel(f, a + j * h, a + (j + 1) * h, order);
  return sum;
}

double gauss_composite(const std::function<double(double)>& f,
                       const std::vector<double>& breakpoints,
                       int total_panels, int order, int min_per_segment) {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("gauss_composite: need at least 2 breakpoints");
  const double total = breakpoints.back() - breakpoints.front();
  if (total <= 0.0)
    throw std::invalid_argument("gauss_composite: breakpoints not increasing");
  double sum = 0.0;
  for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
    const double lo = breakpoints[s], hi = breakpoints[s + 1];
    if (hi <= lo)
      throw std::invalid_argument(
          "gauss_composite: breakpoints not strictly increasing");
    int n = static_cast<int>(std::ceil(total_panels * (hi - lo) / total));
    n = std::max(n, min_per_segment);
    sum += gauss_composite(f, lo, hi, n, order);
  }
  return sum;
}

namespace {

struct SimpsonWorker {
  const std::function<double(double)>& f;
  double rel_tol, abs_tol;
  int max_depth;
  bool converged = true;
  double worst_point = 0.0;

  double recurse(double a, double b, double fa, double fm, double fb,
                 double whole, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    const double scale = std::max(std::abs(left + right), std::abs(whole));
    if (std::abs(delta) <= 15.0 * std::max(abs_tol, rel_tol * scale))
      return left + right + delta / 15.0;
    if (depth >= max_depth) {
      converged = false;
      worst_point = m;
      return left + right;
    }
    return recurse(a, m, fa, flm, fm, left, depth + 1) +
           recurse(m, b, fm, frm, fb, right, depth + 1);
  }
};

}  // namespace

AdaptiveResult adaptive_simpson(const std::function<double(double)>& f,
                                double a, double b, double rel_tol,
                                double abs_tol, int max_depth) {
  if (a == b) return {0.0, true, a};
  SimpsonWorker w{f, rel_tol, abs_tol, max_depth};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double value = w.recurse(a, b, fa, fm, fb, whole, 0);
  return {value, w.converged, w.worst_point};
}

void solve_tridiagonal(const std::vector<double>& sub, std::vector<double> diag,
                       const std::vector<double>& super,
                       std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  if (sub.size() != n || super.size() != n || rhs.size() != n)
    throw std::invalid_argument("solve_tridiagonal: size mismatch");
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) {
    if (!(diag[i - 1] > 0.0))
      throw std::runtime_error("solve_tridiagonal: non-positive pivot");
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * super[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (!(diag[n - 1] > 0.0))
    throw std::runtime_error("solve_tridiagonal: non-positive pivot");
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    rhs[i] = (rhs[i] - super[i] * rhs[i + 1]) / diag[i];
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    throw std::invalid_argument("CubicSpline: need >= 2 matching knots");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw std::invalid_argument("CubicSpline: abscissae must increase");
  m_.assign(n, 0.0);
  if (n == 2) return;
  // Natural spline: interior second derivatives from a tridiagonal system.
  const std::size_t k = n - 2;
  std::vector<double> sub(k, 0.0), diag(k, 0.0), super(k, 0.0), rhs(k, 0.0);
  for (std::size_t i = 1; i + 1 <= k; ++i) sub[i] = x_[i + 1] - x_[i];
  for (std::size_t i = 0; i < k; ++i) {
    const double hl = x_[i + 1] - x_[i], hr = x_[i + 2] - x_[i + 1];
    diag[i] = 2.0 * (hl + hr);
    if (i + 1 < k) super[i] = hr;
    rhs[i] = 6.0 * ((y_[i + 2] - y_[i + 1]) / hr - (y_[i + 1] - y_[i]) / hl);
  }
  solve_tridiagonal(sub, diag, super, rhs);
  for (std::size_t i = 0; i < k; ++i) m_[i + 1] = rhs[i];
}

int CubicSpline::locate(double x) const {
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  int i = static_cast<int>(it - x_.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
  return i;
}

double CubicSpline::value(double x) const {
  const int i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::deriv(double x) const {
  const int i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h /
             6.0;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("log_spaced: bad arguments");
  std::vector<double> out(count);
  const double la = std::log(lo), lb = std::log(hi);
  for (int i = 0; i < count; ++i)
    out[i] = std::exp(la + (lb - la) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lin_spaced(double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("lin_spaced: count < 2");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * i / (count - 1);
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace sphflow
