#include "sphflow/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sphflow/numerics.hpp"

namespace sphflow {

double shear_total(const CoefficientModel& m, const RegularizationParams& p,
                   double s) {
  return 2.0 * m.h(s) + p.epsilon * std::pow(s, p.theta);
}

double bulk_total(const CoefficientModel& m, const RegularizationParams& p,
                  double s) {
  return m.g(s) + (p.theta - 1.0) * p.epsilon * std::pow(s, p.theta);
}

double flux_coefficient(const CoefficientModel& m,
                        const RegularizationParams& p, double s) {
  return s * (shear_total(m, p, s) + bulk_total(m, p, s));
}

namespace {

// Node mass weights: w_0 = dm_0/2, w_i = (dm_{i-1}+dm_i)/2, w_K = dm_{K-1}/2.
// Their sum equals the total mass exactly.
double node_mass_weight(const RadialState& s, int i) {
  const int K = s.cells();
  if (i == 0) return 0.5 * s.cell_mass[0];
  if (i == K) return 0.5 * s.cell_mass[K - 1];
  return 0.5 * (s.cell_mass[i - 1] + s.cell_mass[i]);
}

// Radial volume weight attached to interior node i.
double node_volume_weight(const RadialState& s, int i) {
  return 0.5 * (s.cell_volume(i - 1) + s.cell_volume(i));
}

}  // namespace

double mass_functional(const RadialState& s) { return s.total_mass(); }

double energy_functional(const RadialState& s, const CoefficientModel& m) {
  const int K = s.cells();
  double kinetic = 0.0;
  for (int i = 0; i <= K; ++i)
    kinetic += 0.5 * node_mass_weight(s, i) * s.node_u[i] * s.node_u[i];

  double internal = 0.0;
  if (m.gamma > 1.0) {
    for (int j = 0; j < K; ++j)
      internal +=
          std::pow(s.cell_rho[j], m.gamma) / (m.gamma - 1.0) * s.cell_volume(j);
  } else {
    // Relative entropy against rbar(r) = exp(-r): finite for data that decay
    // like the reference state.
    for (int j = 0; j < K; ++j) {
      const double rho = s.cell_rho[j];
      const double rbar = std::exp(-s.cell_center(j));
      internal += (rho * std::log(rho) - rbar * std::log(rbar) -
                   (std::log(rbar) + 1.0) * (rho - rbar)) *
                  s.cell_volume(j);
    }
  }
  return kinetic + internal;
}

namespace {

struct CellKinematics {
  double u_r;    // velocity chord slope across the cell
  double trace;  // (dim-1) * ubar / rbar
};

CellKinematics cell_kinematics(const RadialState& s, int j) {
  const double u_r = (s.node_u[j + 1] - s.node_u[j]) /
                     (s.node_r[j + 1] - s.node_r[j]);
  const double ubar = 0.5 * (s.node_u[j] + s.node_u[j + 1]);
  const double rbar = s.cell_center(j);
  return {u_r, (s.dim - 1.0) * ubar / rbar};
}

}  // namespace

double dissipation_exact(const RadialState& s, const CoefficientModel& m,
                         const RegularizationParams& p) {
  double sum = 0.0;
  for (int j = 0; j < s.cells(); ++j) {
    const auto [u_r, trace] = cell_kinematics(s, j);
    // trace = (dim-1) ubar/rbar, so (dim-1)(ubar/rbar)^2 = trace^2/(dim-1).
    const double q1 = u_r * u_r + trace * trace / (s.dim - 1.0);
    const double div = u_r + trace;
    const double rho = s.cell_rho[j];
    sum += (shear_total(m, p, rho) * q1 + bulk_total(m, p, rho) * div * div) *
           s.cell_volume(j);
  }
  return sum;
}

double dissipation_lower(const RadialState& s, const CoefficientModel& m,
                         const RegularizationParams& p) {
  double sum = 0.0;
  for (int j = 0; j < s.cells(); ++j) {
    const auto [u_r, trace] = cell_kinematics(s, j);
    const double q1 = u_r * u_r + trace * trace / (s.dim - 1.0);
    const double rho = s.cell_rho[j];
    const double coeff =
        m.nu1 * m.h(rho) + p.alpha * p.epsilon * std::pow(rho, p.theta);
    sum += coeff * q1 * s.cell_volume(j);
  }
  return sum;
}

namespace {

// Chord slope of the cell densities across interior node i.
double density_chord(const RadialState& s, int i) {
  return (s.cell_rho[i] - s.cell_rho[i - 1]) /
         (s.cell_center(i) - s.cell_center(i - 1));
}

double node_psi(const RadialState& s, const CoefficientModel& m,
                const RegularizationParams& p, int i, double* rhohat_out) {
  const double rhohat = 0.5 * (s.cell_rho[i - 1] + s.cell_rho[i]);
  *rhohat_out = rhohat;
  return 2.0 * m.h_prime(rhohat) +
         p.epsilon * p.theta * std::pow(rhohat, p.theta - 1.0);
}

}  // namespace

double bd_entropy(const RadialState& s, const CoefficientModel& m,
                  const RegularizationParams& p) {
  double sum = 0.0;
  for (int i = 1; i < s.cells(); ++i) {
    double rhohat = 0.0;
    const double psi = node_psi(s, m, p, i, &rhohat);
    const double shifted = s.node_u[i] + psi * density_chord(s, i) / rhohat;
    sum += 0.5 * rhohat * shifted * shifted * node_volume_weight(s, i);
  }
  return sum;
}

double bd_cross_rate(const RadialState& s, const CoefficientModel& m,
                     const RegularizationParams& p) {
  double sum = 0.0;
  for (int i = 1; i < s.cells(); ++i) {
    double rhohat = 0.0;
    const double psi = node_psi(s, m, p, i, &rhohat);
    const double slope = density_chord(s, i);
    sum += m.gamma * psi * std::pow(rhohat, m.gamma - 2.0) * slope * slope *
           node_volume_weight(s, i);
  }
  return sum;
}

double sqrt_rho_grad_l2_sq(const RadialState& s) {
  double sum = 0.0;
  for (int i = 1; i < s.cells(); ++i) {
    const double slope =
        (std::sqrt(s.cell_rho[i]) - std::sqrt(s.cell_rho[i - 1])) /
        (s.cell_center(i) - s.cell_center(i - 1));
    sum += slope * slope * node_volume_weight(s, i);
  }
  return sum;
}

double sqrt_rho_h1_norm(const RadialState& s) {
  return std::sqrt(s.total_mass() + sqrt_rho_grad_l2_sq(s));
}

double log_moment(const RadialState& s) {
  double sum = 0.0;
  for (int i = 0; i <= s.cells(); ++i) {
    const double u2 = s.node_u[i] * s.node_u[i];
    sum += 0.5 * u2 * std::log1p(u2) * node_mass_weight(s, i);
  }
  return sum;
}

double u_Lm_norm(const RadialState& s, const RegularizationParams& p) {
  const double mexp = s.dim / (1.0 - p.alpha);
  double sum = 0.0;
  for (int i = 0; i <= s.cells(); ++i)
    sum += std::pow(std::abs(s.node_u[i]), mexp) * node_mass_weight(s, i);
  return std::pow(sum, 1.0 / mexp);
}

double hbar_grad_l2(const RadialState& s, const CoefficientModel& m) {
  double sum = 0.0;
  for (int i = 1; i < s.cells(); ++i) {
    const double slope = (m.hbar(s.cell_rho[i]) - m.hbar(s.cell_rho[i - 1])) /
                         (s.cell_center(i) - s.cell_center(i - 1));
    sum += slope * slope * node_volume_weight(s, i);
  }
  return std::sqrt(sum);
}

double pressure_space_integral(const RadialState& s, const CoefficientModel& m,
                               double beta) {
  double sum = 0.0;
  for (int j = 0; j < s.cells(); ++j)
    sum += std::pow(std::pow(s.cell_rho[j], m.gamma), beta) * s.cell_volume(j);
  return sum;
}

double velocity_moment(const RadialState& s, double eta) {
  double sum = 0.0;
  for (int i = 0; i <= s.cells(); ++i)
    sum += std::pow(std::abs(s.node_u[i]), 2.0 + eta) * node_mass_weight(s, i);
  return sum;
}

// --- structural sign check -----------------------------------------------------

namespace {

double sign_ratio_at(const CoefficientModel& m, const RegularizationParams& p,
                     double rho) {
  const double dim = p.dim;
  const double mexp = dim / (1.0 - p.alpha);
  const double th = p.theta;
  const double eps = p.epsilon;
  const double h = m.h(rho);
  const double g = m.g(rho);
  const double rth1 = std::pow(rho, 1.0 + th);

  const double a1 =
      (mexp - 1.0) * (2.0 * h * rho + g * rho + eps * th * rth1);
  const double a2 = 2.0 * (dim - 1.0) * rho * h +
                    (dim - 1.0) * (dim - 1.0) * rho * g +
                    eps * (dim - 1.0) * (th * (dim - 1.0) - dim + 2.0) * rth1;
  const double a3 = rho * g * mexp * (dim - 1.0) +
                    eps * mexp * (dim - 1.0) * (th - 1.0) * rth1;

  const double mean = 0.5 * (a1 + a2);
  const double radius =
      0.5 * std::sqrt((a1 - a2) * (a1 - a2) + a3 * a3);
  const double lambda_min = mean - radius;
  const double q = rho * h + eps * rth1;
  return lambda_min / q;
}

}  // namespace

double sign_structure_min_ratio(const RadialState& s, const CoefficientModel& m,
                                const RegularizationParams& p) {
  double worst = std::numeric_limits<double>::infinity();
  for (int j = 0; j < s.cells(); ++j)
    worst = std::min(worst, sign_ratio_at(m, p, s.cell_rho[j]));
  return worst;
}

double sign_structure_reference_c(const CoefficientModel& m,
                                  const RegularizationParams& p) {
  double worst = std::numeric_limits<double>::infinity();
  for (double rho : log_spaced(1e-3, 1e3, 241))
    worst = std::min(worst, sign_ratio_at(m, p, rho));
  return 0.5 * worst;
}

// --- records ---------------------------------------------------------------------

bool DiagnosticsRecord::all_finite() const {
  for (double v :
       {t, mass, energy, diss_exact, diss_lower, bd_entropy, bd_cross_rate,
        sqrt_rho_h1, log_moment, u_Lm, hbar_grad_l2, dissipation_time_integral,
        bd_cross_time_integral, pressure_partial_norm, velocity_moment})
    if (!std::isfinite(v)) return false;
  return true;
}

DiagnosticsRecord make_record(const RadialState& s, const CoefficientModel& m,
                              const RegularizationParams& p,
                              const DiagnosticsOptions& opts,
                              double dissipation_time_integral,
                              double bd_cross_time_integral,
                              double pressure_time_integral) {
  DiagnosticsRecord r;
  r.t = s.time;
  r.mass = mass_functional(s);
  r.energy = energy_functional(s, m);
  r.diss_exact = dissipation_exact(s, m, p);
  r.diss_lower = dissipation_lower(s, m, p);
  r.bd_entropy = bd_entropy(s, m, p);
  r.bd_cross_rate = bd_cross_rate(s, m, p);
  r.sqrt_rho_h1 = sqrt_rho_h1_norm(s);
  r.log_moment = log_moment(s);
  r.u_Lm = u_Lm_norm(s, p);
  r.hbar_grad_l2 = hbar_grad_l2(s, m);
  r.dissipation_time_integral = dissipation_time_integral;
  r.bd_cross_time_integral = bd_cross_time_integral;
  r.pressure_partial_norm =
      pressure_time_integral > 0.0
          ? std::pow(pressure_time_integral, 1.0 / opts.beta)
          : 0.0;
  r.velocity_moment = velocity_moment(s, opts.eta);
  return r;
}

const char kDiagnosticsCsvHeader[] =
    "t,mass,energy,diss_exact,diss_lower,bd_entropy,bd_cross_rate,"
    "sqrt_rho_h1,log_moment,u_Lm,hbar_grad_l2";

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRecord>& records) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot write diagnostics file: " + path);
  out << kDiagnosticsCsvHeader << "\n";
  for (const auto& r : records) {
    out << format_full(r.t) << ',' << format_full(r.mass) << ','
        << format_full(r.energy) << ',' << format_full(r.diss_exact) << ','
        << format_full(r.diss_lower) << ',' << format_full(r.bd_entropy) << ','
        << format_full(r.bd_cross_rate) << ',' << format_full(r.sqrt_rho_h1)
        << ',' << format_full(r.log_moment) << ',' << format_full(r.u_Lm)
        << ',' << format_full(r.hbar_grad_l2) << "\n";
  }
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SolverError("cannot read diagnostics file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kDiagnosticsCsvHeader)
    throw SolverError("diagnostics file has unexpected header: " + path);
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    DiagnosticsRecord r;
    char comma;
    if (!(ss >> r.t >> comma >> r.mass >> comma >> r.energy >> comma >>
          r.diss_exact >> comma >> r.diss_lower >> comma >> r.bd_entropy >>
          comma >> r.bd_cross_rate >> comma >> r.sqrt_rho_h1 >> comma >>
          r.log_moment >> comma >> r.u_Lm >> comma >> r.hbar_grad_l2))
      throw SolverError("bad diagnostics row in " + path);
    out.push_back(r);
  }
  return out;
}

}  // namespace sphflow
