#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "sphflow/coefficients.hpp"
#include "sphflow/initial_data.hpp"
#include "sphflow/numerics.hpp"

using namespace sphflow;

namespace {

const HypothesisCheck& check_named(const HypothesisReport& rep,
                                   const char* name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return c;
  throw std::logic_error(std::string("no check named ") + name);
}

}  // namespace

TEST_CASE("analytic profiles") {
  auto g = gaussian_profile(0.5, 0.4, 0.5, 1.0, 0.1, 1.0);
  CHECK(g.rho0(1.0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(g.rho0(0.0) == doctest::Approx(0.5 + 0.4 * std::exp(-4.0)).epsilon(1e-15));
  CHECK(g.m0(1.0) ==
        doctest::Approx(0.1 * 0.9 * std::exp(-1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(gaussian_profile(0.5, 0.4, 0.0, 1.0, 0.1, 1.0),
                  ProfileError);

  auto b = bump_profile(0.1, 1.0, 1.0, 2.0, 0.0, 1.0);
  CHECK(b.rho0(0.5) == doctest::Approx(0.1).epsilon(1e-15));  // outside bump
  CHECK(b.rho0(1.5) == doctest::Approx(1.1).epsilon(1e-14));  // peak: exp(0)
  CHECK(b.rho0(1.0) == doctest::Approx(0.1).epsilon(1e-14));  // edge
  CHECK(b.m0(1.5) == 0.0);
  CHECK_THROWS_AS(bump_profile(0.1, 1.0, 2.0, 1.0, 0.0, 1.0), ProfileError);

  auto e = expression_profile("exp(-r)", "");
  CHECK(e.rho0(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(e.m0(2.0) == 0.0);
}

TEST_CASE("table profiles interpolate and extend") {
  const char* rho_path = "tmp_rho_table.txt";
  const char* m_path = "tmp_m_table.txt";
  {
    std::ofstream out(rho_path);
    out << "0 1\n1 2\n2 0.5\n";
    std::ofstream mo(m_path);
    mo << "0 0\n2 0.2\n";
  }
  auto p = table_profile(rho_path, m_path);
  CHECK(p.rho0(0.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(p.rho0(3.0) == doctest::Approx(0.5).epsilon(1e-15));   // constant tail
  CHECK(p.rho0(-1.0) == doctest::Approx(1.0).epsilon(1e-15));  // constant head
  CHECK(p.m0(1.0) == doctest::Approx(0.1).epsilon(1e-15));

  auto nom = table_profile(rho_path, "");
  CHECK(nom.m0(1.0) == 0.0);
  std::remove(rho_path);
  std::remove(m_path);
}

TEST_CASE("truncation clamps, floors, and cuts velocity") {
  auto prof = gaussian_profile(0.0, 1.0, 1.0, 0.0, 0.1, 1.0);  // rho0=exp(-r^2)
  auto reg = RegularizationParams::make(0.1, 1.0, 0.05, 0.5, 2);
  auto cut = truncate_and_floor(prof, reg);

  // inside the wall the density clamps to its value at r = inner
  CHECK(cut.rho(0.05) ==
        doctest::Approx(1.0900498337491680536).epsilon(1e-15));
  CHECK(cut.rho(0.1) == doctest::Approx(std::exp(-0.01) + 0.1).epsilon(1e-15));
  CHECK(cut.rho(2.0) == doctest::Approx(std::exp(-1.0) + 0.1).epsilon(1e-15));
  // velocity is exactly zero within 2 delta of both margins
  CHECK(cut.u(0.15) == 0.0);
  CHECK(cut.u(0.95) == 0.0);
  CHECK(cut.u(0.5) != 0.0);
  CHECK(cut.u(0.5) ==
        doctest::Approx(prof.m0(0.5) / (prof.rho0(0.5) + 0.1)).epsilon(1e-14));

  // velocity support empties out when 4 delta >= R - inner
  auto tight = RegularizationParams::make(0.1, 0.3, 0.06, 0.5, 2);
  CHECK_THROWS_WITH_AS(truncate_and_floor(prof, tight),
                       doctest::Contains("velocity support empty"),
                       ProfileError);

  // negative density on the annulus is rejected
  auto neg = expression_profile("1 - 2*r", "");
  CHECK_THROWS_WITH_AS(truncate_and_floor(neg, reg),
                       doctest::Contains("negative density"), ProfileError);
}

TEST_CASE("mollifier kernel") {
  CHECK(Mollifier::make(0.5).normalization ==
        doctest::Approx(0.44399381616807943782).epsilon(1e-13));
  auto mol = Mollifier::make(0.5);
  CHECK(mol.kernel(0.5) == 0.0);
  CHECK(mol.kernel(-0.5) == 0.0);
  CHECK(mol.kernel(0.7) == 0.0);
  CHECK(mol.kernel(0.0) ==
        doctest::Approx(std::exp(-1.0) / (0.44399381616807943782 * 0.5))
            .epsilon(1e-13));
  // unit mass
  const double mass = gauss_composite(
      [&](double s) { return mol.kernel(s); }, -0.5, 0.5, 64, 5);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(Mollifier::make(-0.1), ProfileError);
}

TEST_CASE("mollification reproduces constants and preserves zeros") {
  auto prof = expression_profile("1.0", "");
  auto reg = RegularizationParams::make(0.1, 1.0, 0.05, 0.5, 2);
  auto cut = truncate_and_floor(prof, reg);
  auto mol = Mollifier::make(0.05);
  auto smooth = mollify(cut, mol, reg, 64);

  REQUIRE(smooth.r.size() >= 2);
  for (double v : smooth.rho) CHECK(v == doctest::Approx(1.1).epsilon(1e-14));
  for (double v : smooth.u) CHECK(v == 0.0);
  CHECK(smooth.rho_at(0.55) == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(smooth.u_at(0.55) == 0.0);
  CHECK(smooth.r.front() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(smooth.r.back() == doctest::Approx(1.0).epsilon(1e-15));

  // delta = 0 passes samples through
  auto reg0 = RegularizationParams::make(0.1, 1.0, 0.0, 0.5, 2);
  auto cut0 = truncate_and_floor(prof, reg0);
  auto raw = mollify(cut0, Mollifier::make(0.0), reg0, 64);
  for (double v : raw.rho) CHECK(v == 1.1);

  CHECK_THROWS_WITH_AS(mollify(cut, mol, reg, 4),
                       doctest::Contains("K must be >= 8"), ProfileError);
}

TEST_CASE("initial state from a constant profile") {
  auto prof = expression_profile("1.0", "");
  auto reg = RegularizationParams::make(0.1, 1.0, 0.05, 0.5, 2);
  auto cut = truncate_and_floor(prof, reg);
  auto smooth = mollify(cut, Mollifier::make(0.05), reg, 64);
  auto st = init_state(smooth, reg, 64);

  CHECK(st.dim == 2);
  CHECK(st.node_r.size() == 65);
  CHECK(st.cell_mass.size() == 64);
  CHECK(st.node_r.front() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(st.node_r.back() == doctest::Approx(1.0).epsilon(1e-15));

  // floored constant density 1.1 over the annulus [0.1, 1] in the plane:
  // total mass = 1.1 * (1 - 0.01)/2 = 0.5445
  const double total =
      std::accumulate(st.cell_mass.begin(), st.cell_mass.end(), 0.0);
  CHECK(total == doctest::Approx(0.5445).epsilon(1e-12));
  CHECK(st.total_mass() == doctest::Approx(0.5445).epsilon(1e-12));
  for (double rho : st.cell_rho)
    CHECK(rho == doctest::Approx(1.1).epsilon(1e-12));
  for (double u : st.node_u) CHECK(u == 0.0);

  CHECK_THROWS_WITH_AS(init_state(smooth, reg, 4),
                       doctest::Contains("K must be >= 8"), ProfileError);
}

TEST_CASE("hypothesis validation on an integrable profile") {
  auto prof = gaussian_profile(0.0, 1.0, 1.0, 0.0, 0.1, 1.0);
  auto rep = validate_hypotheses(prof, saint_venant_model(), 2);
  CHECK(rep.pass());
  // planar-weight integrals of exp(-r^2): mass 1/2, viscosity gradient 2
  CHECK(check_named(rep, "finite_mass").value ==
        doctest::Approx(0.5).epsilon(1e-9));
  CHECK(check_named(rep, "finite_viscosity_gradient").value ==
        doctest::Approx(2.0).epsilon(1e-9));
  CHECK(check_named(rep, "nonnegative_density").pass);
  CHECK(check_named(rep, "finite_pressure_energy").value ==
        doctest::Approx(0.25).epsilon(1e-9));
  CHECK(check_named(rep, "vacuum_momentum").pass);
  CHECK_FALSE(rep.to_text().empty());
  CHECK_THROWS_AS(validate_hypotheses(prof, saint_venant_model(), 1),
                  ProfileError);
}

TEST_CASE("hypothesis validation flags defects honestly") {
  // non-decaying base density: mass diverges
  auto fat = gaussian_profile(0.5, 0.4, 0.5, 1.0, 0.1, 1.0);
  auto rep = validate_hypotheses(fat, saint_venant_model(), 2);
  CHECK_FALSE(rep.pass());
  CHECK_FALSE(check_named(rep, "finite_mass").pass);

  // momentum alive on the vacuum set
  RadialProfile bad;
  bad.description = "vacuum with momentum";
  bad.rho0 = [](double r) { return std::max(0.0, 1.0 - r); };
  bad.m0 = [](double r) { return 0.1 * std::exp(-std::abs(r)); };
  auto rep2 = validate_hypotheses(bad, saint_venant_model(), 2);
  CHECK_FALSE(rep2.pass());
  CHECK_FALSE(check_named(rep2, "vacuum_momentum").pass);
}
