#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "sphflow/coefficients.hpp"

using namespace sphflow;

namespace {

const ConditionResult& cond(const ValidationReport& rep, const char* name) {
  for (const auto& c : rep.conditions)
    if (c.name == name) return c;
  throw std::logic_error(std::string("no condition named ") + name);
}

}  // namespace

TEST_CASE("exponent roots against frozen references") {
  // dim = 2, m = 4
  CHECK(v1(4.0, 2) == doctest::Approx(-0.92820323027550917411).epsilon(1e-14));
  CHECK(v2(4.0, 2) == doctest::Approx(12.928203230275509174).epsilon(1e-14));
  // dim = 3, m = 10/3
  CHECK(v1(10.0 / 3.0, 3) ==
        doctest::Approx(-0.64061066512554929171).epsilon(1e-13));
  CHECK(v2(10.0 / 3.0, 3) ==
        doctest::Approx(16.390610665125549292).epsilon(1e-13));
  // near the m = 2 boundary the cancellation-free form stays accurate
  CHECK(v1(2.0 + 1e-6, 2) ==
        doctest::Approx(-0.99999999999993750006).epsilon(1e-12));
  // large-m tail
  CHECK(v1(2000.0, 2) ==
        doctest::Approx(-0.085593456944865414363).epsilon(1e-13));
  CHECK(v2(2000.0, 2) ==
        doctest::Approx(0.093605472964889442395).epsilon(1e-13));
  CHECK(v1(4.0, 2) < 0.0);
  CHECK(v2(4.0, 2) > 0.0);
  CHECK_THROWS_AS(v1(2.0, 2), std::domain_error);
  CHECK_THROWS_AS(v2(1.5, 3), std::domain_error);
  CHECK_THROWS_AS(v1(4.0, 1), std::domain_error);
}

TEST_CASE("alpha admissibility") {
  CHECK(admissible_alpha(0.5, 2.0, 2.0, 2));
  CHECK(admissible_alpha(0.1, 2.0, 2.0, 3));
  CHECK(admissible_alpha(0.999, 2.0, 2.0, 2));
  CHECK_FALSE(admissible_alpha(0.5, 0.1, 2.0, 2));
  CHECK_THROWS_AS(admissible_alpha(0.0, 2.0, 2.0, 2), std::domain_error);
  CHECK_THROWS_AS(admissible_alpha(1.0, 2.0, 2.0, 2), std::domain_error);
  CHECK(admissible_alpha(0.5, saint_venant_model(), 2));
}

TEST_CASE("dimension bounds window") {
  CHECK(check_dimension_bounds(2.0, 2.0, 3));
  CHECK_FALSE(check_dimension_bounds(0.01, 2.0, 3));  // (0.01-2)/3 < lower edge
  CHECK_FALSE(check_dimension_bounds(2.0, 80.0, 3));  // 78/3 > upper edge
  CHECK(check_dimension_bounds(2.0, 2.0, 2));         // unconstrained in 2D
  CHECK_THROWS_AS(check_dimension_bounds(2.0, 2.0, 1), ModelError);
}

TEST_CASE("shallow water pair") {
  auto mdl = saint_venant_model();
  CHECK(mdl.h(3.0) == 3.0);
  CHECK(mdl.g(3.0) == 0.0);
  CHECK(mdl.h_prime(7.0) == 1.0);
  CHECK(mdl.hbar(4.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(mdl.gamma == 2.0);
  CHECK(mdl.nu == 0.5);
  CHECK(mdl.nu1 == 2.0);
  CHECK(mdl.nu2 == 2.0);
}

TEST_CASE("power law pair and compatibility identity") {
  auto mdl = power_law_model(3.0, 2.0, 0.5, 2.0, 6.0, 2.0);
  // h = 3 s^2  =>  g = 2 s h' - 2 h = 2 h
  CHECK(mdl.h(2.0) == 12.0);
  CHECK(mdl.g(2.0) == doctest::Approx(24.0).epsilon(1e-15));
  CHECK(mdl.h_prime(2.0) == doctest::Approx(12.0).epsilon(1e-15));
  // hbar(s) = c p s^(p-1/2)/(p-1/2) = 4 s^(3/2); hbar(4) = 32
  CHECK(mdl.hbar(4.0) == doctest::Approx(32.0).epsilon(1e-14));

  // p <= 1/2 makes hbar divergent near vacuum: construction succeeds,
  // evaluating hbar reports the defect
  auto frac = power_law_model(1.0, 0.5, 0.25, 1.0, 4.0, 2.0);
  CHECK(frac.h(4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(frac.hbar(4.0), ModelError);

  CHECK_THROWS_AS(power_law_model(0.0, 1.0, 0.5, 2.0, 2.0, 2.0), ModelError);
  CHECK_THROWS_AS(power_law_model(1.0, 1.0, 0.5, 3.0, 2.0, 2.0), ModelError);
}

TEST_CASE("structural validation of coefficient pairs") {
  const auto samples = default_rho_samples();
  CHECK(validate_model(saint_venant_model(), 2, samples).pass());

  // identity-consistent pair whose bulk slope exceeds h'/nu at large density:
  // h = s + s^2, g = 2 s^2, g' = 4 s vs cap (1 + 2 s)/0.6
  auto bad_bulk = custom_model_full(
      "quad-bulk", [](double s) { return s + s * s; },
      [](double s) { return 1.0 + 2.0 * s; },
      [](double s) { return 2.0 * s * s; }, [](double s) { return 4.0 * s; },
      0.6, 2.0, 6.0, 2.0);
  auto rep1 = validate_model(bad_bulk, 2, samples);
  CHECK_FALSE(rep1.pass());
  CHECK_FALSE(cond(rep1, "bulk_slope_bound").pass);
  CHECK(cond(rep1, "lame_identity").pass);
  CHECK(cond(rep1, "shear_slope_floor").pass);
  CHECK(cond(rep1, "trace_bounds").pass);

  // trace combination sits at 2 identically, below the claimed nu1 = 3
  auto bad_trace = power_law_model(1.0, 1.0, 0.5, 3.0, 3.0, 2.0);
  auto rep2 = validate_model(bad_trace, 2, samples);
  CHECK_FALSE(rep2.pass());
  CHECK_FALSE(cond(rep2, "trace_bounds").pass);
  CHECK(cond(rep2, "lame_identity").pass);

  // vacuum growth floor applies for dim >= 3 with gamma >= dim/(dim-2);
  // h = 1e-6 s^0.6 sinks below the floor on [1e3, 1e6]
  auto thin = power_law_model(1e-6, 0.6, 1e-9, 2.0, 2.0, 3.0);
  auto rep3 = validate_model(thin, 3, samples);
  CHECK(cond(rep3, "vacuum_growth").applicable);
  CHECK_FALSE(cond(rep3, "vacuum_growth").pass);

  // inapplicable in 2D: passes vacuously
  auto rep4 = validate_model(saint_venant_model(), 2, samples);
  CHECK_FALSE(cond(rep4, "vacuum_growth").applicable);
  CHECK(cond(rep4, "vacuum_growth").pass);

  CHECK_FALSE(validate_model(saint_venant_model(), 2, samples).to_text().empty());
  CHECK_THROWS_AS(validate_model(saint_venant_model(), 1, samples), ModelError);
}

TEST_CASE("regularization parameters") {
  auto reg = RegularizationParams::make(
      0.01, RegularizationParams::default_radius(0.01, 2), 0.05, 0.5, 2);
  CHECK(reg.epsilon == 0.01);
  CHECK(reg.alpha == 0.5);
  // theta = (dim - 1 + alpha)/dim and (1 + dim (theta - 1)) eps = alpha eps
  CHECK(reg.theta == (2.0 - 1.0 + 0.5) / 2.0);
  CHECK((1.0 + 2.0 * (reg.theta - 1.0)) * reg.epsilon ==
        doctest::Approx(reg.alpha * reg.epsilon).epsilon(1e-15));
  CHECK(RegularizationParams::default_radius(0.01, 2) ==
        doctest::Approx(std::pow(0.01, -0.25)).epsilon(1e-15));
  CHECK(reg.inner_radius() == 0.01);

  auto ext = RegularizationParams::make(0.01, 3.0, 0.05, 0.5, 2, true);
  CHECK(ext.inner_radius() == 1.0);

  CHECK_THROWS_WITH_AS(RegularizationParams::make(0.01, 100.0, 0.05, 0.5, 2),
                       doctest::Contains("outer radius too large"), ModelError);
  CHECK_THROWS_AS(RegularizationParams::make(1.5, 1.0, 0.05, 0.5, 2),
                  ModelError);
  CHECK_THROWS_AS(RegularizationParams::make(0.01, 1.0, 0.05, 1.5, 2),
                  ModelError);
  CHECK_THROWS_AS(RegularizationParams::make(0.01, 1.0, -0.1, 0.5, 2),
                  ModelError);
}

TEST_CASE("regularized pair widens viscosity window") {
  auto base = saint_venant_model();
  auto reg = RegularizationParams::make(0.1, 1.0, 0.05, 0.5, 2);
  auto mdl = regularized_pair(base, reg);
  // 2 h_eps = 2 h + eps s^theta with theta = 3/4
  CHECK(mdl.h(1.0) == doctest::Approx(1.05).epsilon(1e-15));
  CHECK(mdl.g(1.0) == doctest::Approx(-0.025).epsilon(1e-14));
  CHECK(mdl.h_prime(1.0) ==
        doctest::Approx(1.0 + 0.5 * 0.1 * 0.75).epsilon(1e-15));
  // window widened to [min(nu1, 2 alpha), max(nu2, 2 alpha)]
  CHECK(mdl.nu1 == 1.0);
  CHECK(mdl.nu2 == 2.0);
  // the regularized pair still satisfies every structural condition
  CHECK(validate_model(mdl, 2, default_rho_samples()).pass());
}

TEST_CASE("growth envelope of the combined pair") {
  auto sv = saint_venant_model();
  auto iv = growth_envelope_interval(sv, 2);
  CHECK(iv.first == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(iv.second == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(check_growth_envelope(sv, 2));

  // h = s + s^2 with trace window [2, 6]: the feasible constant pins at 2
  auto mix = custom_model_full(
      "mix", [](double s) { return s + s * s; },
      [](double s) { return 1.0 + 2.0 * s; },
      [](double s) { return 2.0 * s * s; }, [](double s) { return 4.0 * s; },
      0.25, 2.0, 6.0, 2.0);
  auto iv2 = growth_envelope_interval(mix, 2);
  CHECK(iv2.first == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(iv2.second == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(check_growth_envelope(mix, 2));

  // exponential growth cannot be enveloped by any single power pair
  auto expm = custom_model(
      "exp-pair", [](double s) { return std::exp(s); },
      [](double s) { return std::exp(s); }, 0.5, 2.0, 2.0, 2.0);
  CHECK_FALSE(check_growth_envelope(expm, 2));
  auto iv3 = growth_envelope_interval(expm, 2);
  CHECK(iv3.first > iv3.second);
}

TEST_CASE("tabulated pair interpolates provided data") {
  std::vector<double> s = {0.5, 1.0, 2.0, 3.0, 4.0};
  std::vector<double> h = {0.5, 1.0, 2.0, 3.0, 4.0};  // h = s on the knots
  auto mdl = table_model(s, h, 0.5, 2.0, 2.0, 2.0);
  CHECK(mdl.h(1.5) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(mdl.h_prime(2.5) == doctest::Approx(1.0).epsilon(1e-10));
  // compatibility identity: g = 2 s h' - 2 h = 0 for h = s
  CHECK(std::abs(mdl.g(2.5)) < 1e-10);
  // linear extension outside the knots
  CHECK(mdl.h(8.0) == doctest::Approx(8.0).epsilon(1e-10));
  CHECK_THROWS_AS(table_model({1.0}, {1.0}, 0.5, 2.0, 2.0, 2.0), ModelError);
}
