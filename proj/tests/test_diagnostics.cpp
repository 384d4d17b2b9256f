#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>

#include "sphflow/coefficients.hpp"
#include "sphflow/diagnostics.hpp"
#include "sphflow/state.hpp"

using namespace sphflow;

namespace {

// eps = 1e-30 makes every artificial contribution vanish to rounding while
// remaining a legal parameter set, so closed-form values come out exact.
RegularizationParams tiny_eps() {
  return RegularizationParams::make(1e-30, 1.0, 0.05, 0.5, 2);
}

RadialState uniform_state(double rho, double inner, double outer, int K) {
  RadialState s;
  s.dim = 2;
  s.node_r.resize(K + 1);
  s.node_u.assign(K + 1, 0.0);
  for (int i = 0; i <= K; ++i)
    s.node_r[i] = inner + (outer - inner) * i / K;
  s.cell_mass.resize(K);
  s.cell_rho.assign(K, rho);
  for (int j = 0; j < K; ++j) s.cell_mass[j] = rho * s.cell_volume(j);
  return s;
}

}  // namespace

TEST_CASE("regularized coefficient combinations") {
  auto sv = saint_venant_model();
  auto reg = RegularizationParams::make(0.1, 1.0, 0.05, 0.5, 2);
  // theta = 0.75: shear = 2 s + eps s^0.75, bulk = (theta-1) eps s^0.75,
  // flux = s (shear + bulk) = 2 s^2 + eps theta s^1.75
  CHECK(shear_total(sv, reg, 1.0) == doctest::Approx(2.1).epsilon(1e-15));
  CHECK(bulk_total(sv, reg, 1.0) == doctest::Approx(-0.025).epsilon(1e-14));
  CHECK(flux_coefficient(sv, reg, 1.0) ==
        doctest::Approx(2.0 + 0.1 * 0.75).epsilon(1e-15));
  CHECK(flux_coefficient(sv, reg, 4.0) ==
        doctest::Approx(2.0 * 16.0 + 0.1 * 0.75 * std::pow(4.0, 1.75))
            .epsilon(1e-15));
}

TEST_CASE("mass and energy on uniform states") {
  auto s = uniform_state(1.0, 0.1, 1.0, 16);
  CHECK(mass_functional(s) == doctest::Approx(0.495).epsilon(1e-14));

  // gamma = 2, u = 0: energy = integral of rho^2 = 0.495
  CHECK(energy_functional(s, saint_venant_model()) ==
        doctest::Approx(0.495).epsilon(1e-13));

  // kinetic part: u = 1 everywhere adds M/2
  auto sk = s;
  sk.node_u.assign(sk.node_u.size(), 1.0);
  CHECK(energy_functional(sk, saint_venant_model()) ==
        doctest::Approx(0.495 + 0.5 * 0.495).epsilon(1e-13));
}

TEST_CASE("isothermal energy is a Bregman divergence") {
  auto iso = power_law_model(1.0, 1.0, 0.5, 2.0, 2.0, 1.0);
  RadialState s;
  s.dim = 2;
  const int K = 8;
  s.node_r.resize(K + 1);
  s.node_u.assign(K + 1, 0.0);
  for (int i = 0; i <= K; ++i) s.node_r[i] = 0.5 + i / static_cast<double>(K);
  s.cell_mass.resize(K);
  s.cell_rho.resize(K);
  for (int j = 0; j < K; ++j) {
    s.cell_rho[j] = std::exp(-s.cell_center(j));  // match the reference
    s.cell_mass[j] = s.cell_rho[j] * s.cell_volume(j);
  }
  CHECK(energy_functional(s, iso) == 0.0);  // exact: rho == rbar cell-by-cell

  auto s2 = s;
  for (int j = 0; j < K; ++j) {
    s2.cell_rho[j] *= 2.0;
    s2.cell_mass[j] *= 2.0;
  }
  CHECK(energy_functional(s2, iso) > 0.0);  // strict convexity
}

TEST_CASE("dissipation rates on a single shearing cell") {
  // nodes {1, 2}, u = {0, 1}: u_r = 1, trace = 0.5/1.5 = 1/3,
  // q1 = 1 + 1/9, div = 4/3, V = 3/2
  RadialState s;
  s.dim = 2;
  s.node_r = {1.0, 2.0};
  s.node_u = {0.0, 1.0};
  s.cell_rho = {1.0};
  s.cell_mass = {1.5};
  auto sv = saint_venant_model();
  auto reg = tiny_eps();
  CHECK(dissipation_exact(s, sv, reg) ==
        doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  // nu1 h = 2 h: the minorant coincides for the shallow-water pair (g = 0)
  CHECK(dissipation_lower(s, sv, reg) ==
        doctest::Approx(10.0 / 3.0).epsilon(1e-14));
  CHECK(dissipation_exact(s, sv, reg) >=
        dissipation_lower(s, sv, reg) - 1e-10);
}

TEST_CASE("effective velocity entropy against a closed form") {
  // flat density kills the chord term; the node weight is (V0 + V1)/2 = 1/2,
  // so bd = (1/2) u1^2 (1/2) = 2 (1 - ln 2) for u1 = sqrt(8 (1 - ln 2))
  RadialState s;
  s.dim = 2;
  s.node_r = {1.0, std::sqrt(2.0), std::sqrt(3.0)};
  s.node_u = {0.0, std::sqrt(8.0 * (1.0 - std::log(2.0))), 0.0};
  s.cell_rho = {1.0, 1.0};
  s.cell_mass = {0.5, 0.5};
  CHECK(bd_entropy(s, saint_venant_model(), tiny_eps()) ==
        doctest::Approx(0.61370563888010938117).epsilon(1e-14));
}

TEST_CASE("pressure-density cross rate against a closed form") {
  // nodes {1/2, 1, 3/2}, cells rho = {1, 3}: chord = 4, rhohat = 2, psi = 2,
  // gamma = 2: rate = 2 * 2 * 1 * 16 * (1/2) = 32 in exact dyadic arithmetic
  RadialState s;
  s.dim = 2;
  s.node_r = {0.5, 1.0, 1.5};
  s.node_u = {0.0, 0.0, 0.0};
  s.cell_rho = {1.0, 3.0};
  s.cell_mass = {0.375, 1.875};
  CHECK(bd_cross_rate(s, saint_venant_model(), tiny_eps()) == 32.0);
  CHECK(bd_cross_rate(s, saint_venant_model(), tiny_eps()) >= 0.0);
}

TEST_CASE("density norms on uniform and graded states") {
  auto s = uniform_state(1.0, 0.1, 1.0, 16);
  CHECK(sqrt_rho_grad_l2_sq(s) == 0.0);
  CHECK(sqrt_rho_h1_norm(s) ==
        doctest::Approx(std::sqrt(0.495)).epsilon(1e-13));
  CHECK(hbar_grad_l2(s, saint_venant_model()) == 0.0);

  auto graded = s;
  for (int j = 0; j < graded.cells(); ++j) {
    graded.cell_rho[j] = 1.0 + 0.1 * j;
    graded.cell_mass[j] = graded.cell_rho[j] * graded.cell_volume(j);
  }
  CHECK(sqrt_rho_grad_l2_sq(graded) > 0.0);
  CHECK(hbar_grad_l2(graded, saint_venant_model()) > 0.0);
}

TEST_CASE("velocity moments with exact mass weights") {
  // node weights sum to the exact total mass; u = 1 turns the sums into
  // closed forms: log moment = M ln(2)/2, L4 norm = M^(1/4)
  RadialState s;
  s.dim = 2;
  const int K = 16;
  s.node_r.resize(K + 1);
  s.node_u.assign(K + 1, 1.0);
  for (int i = 0; i <= K; ++i) s.node_r[i] = 0.5 + i / static_cast<double>(K);
  s.cell_mass.assign(K, 1.0 / 32.0);  // M = 1/2 exactly
  s.cell_rho.resize(K);
  for (int j = 0; j < K; ++j)
    s.cell_rho[j] = s.cell_mass[j] / s.cell_volume(j);

  CHECK(log_moment(s) ==
        doctest::Approx(0.17328679513998632735).epsilon(1e-14));
  auto reg = tiny_eps();  // alpha = 1/2, dim = 2: m = 4
  CHECK(u_Lm_norm(s, reg) ==
        doctest::Approx(std::pow(0.5, 0.25)).epsilon(1e-14));
  CHECK(velocity_moment(s, 0.2) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("quadratic form sign structure") {
  auto sv = saint_venant_model();
  auto reg = RegularizationParams::make(0.1, 1.0, 0.05, 0.5, 2);
  const double c_ref = sign_structure_reference_c(sv, reg);
  CHECK(c_ref > 0.0);

  auto s = uniform_state(1.0, 0.1, 1.0, 16);
  // rho = 1 sits on the reference grid, so the state ratio is at least 2 c
  CHECK(sign_structure_min_ratio(s, sv, reg) >= 2.0 * c_ref * (1.0 - 1e-12));
}

TEST_CASE("records and CSV round trip") {
  CHECK(std::string(kDiagnosticsCsvHeader) ==
        "t,mass,energy,diss_exact,diss_lower,bd_entropy,bd_cross_rate,"
        "sqrt_rho_h1,log_moment,u_Lm,hbar_grad_l2");

  auto s = uniform_state(1.0, 0.1, 1.0, 16);
  auto sv = saint_venant_model();
  auto reg = RegularizationParams::make(0.1, 1.0, 0.05, 0.5, 2);
  DiagnosticsOptions opts;
  auto rec = make_record(s, sv, reg, opts, 0.25, 0.125, 0.5);
  CHECK(rec.all_finite());
  CHECK(rec.dissipation_time_integral == 0.25);
  CHECK(rec.bd_cross_time_integral == 0.125);
  // (integral of dt * P_beta)^(1/beta) with beta = 3/2
  CHECK(rec.pressure_partial_norm ==
        doctest::Approx(0.62996052494743658238).epsilon(1e-14));
  CHECK(rec.mass == doctest::Approx(0.495).epsilon(1e-14));

  auto rec2 = make_record(s, sv, reg, opts, 0.0, 0.0, 0.0);
  CHECK(rec2.pressure_partial_norm == 0.0);

  const char* path = "tmp_diag_roundtrip.csv";
  write_diagnostics_csv(path, {rec, rec2});
  auto back = read_diagnostics_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].t == rec.t);
  CHECK(back[0].mass == rec.mass);
  CHECK(back[0].energy == rec.energy);
  CHECK(back[0].diss_exact == rec.diss_exact);
  CHECK(back[0].diss_lower == rec.diss_lower);
  CHECK(back[0].bd_entropy == rec.bd_entropy);
  CHECK(back[0].bd_cross_rate == rec.bd_cross_rate);
  CHECK(back[0].sqrt_rho_h1 == rec.sqrt_rho_h1);
  CHECK(back[0].log_moment == rec.log_moment);
  CHECK(back[0].u_Lm == rec.u_Lm);
  CHECK(back[0].hbar_grad_l2 == rec.hbar_grad_l2);
  std::remove(path);
}
