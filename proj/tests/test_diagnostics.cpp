#include "cpqbm/diagnostics.hpp"

#include <doctest.h>

#include <cmath>

#include "cpqbm/linalg.hpp"
#include "test_helpers.hpp"

using namespace cpqbm;

namespace {

GeneratorSpec small_spec(GeneratorForm form, int dim, double d_pp, double beta,
                         double omega = 1.0) {
  const CoefficientSet cs = test::saturated_coefficients(d_pp, beta, 1.0);
  return GeneratorSpec::qbm(
      form, cs, HamiltonianSpec{HamiltonianSpec::Kind::Harmonic, omega, 0.0},
      BasisConfig{dim, 1.0, 1.0, 1.0});
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("coefficient inequality verdicts") {
  // A set built from one microscopic D_pp saturates the bound identically.
  const CoefficientSet sat = test::saturated_coefficients(0.7, 1.3, 2.0);
  const CPReport r_sat = cp_condition(sat);
  CHECK(r_sat.verdict == CPVerdict::Saturated);
  CHECK(std::abs(r_sat.slack) <= 1e-10 * r_sat.rhs);

  // Extra position diffusion moves it strictly inside the allowed region.
  CoefficientSet wide = sat;
  wide.d_qq *= 2.0;
  CHECK(cp_condition(wide).verdict == CPVerdict::StrictlySatisfied);
  CHECK(cp_condition(wide).slack > 0.0);

  // Dropping D_qq with friction present violates it.
  const CPReport r_cl = cp_condition(sat.d_pp, 0.0, sat.gamma, sat.hbar);
  CHECK(r_cl.verdict == CPVerdict::Violated);
  CHECK(r_cl.slack < 0.0);

  // The trivial generator (all coefficients zero) sits exactly on the edge.
  CHECK(cp_condition(0.0, 0.0, 0.0, 1.0).verdict == CPVerdict::Saturated);

  CHECK(to_string(CPVerdict::Violated) == "Violated");
  const std::string text = r_sat.to_text("coefficient check");
  CHECK(text.find("coefficient check") != std::string::npos);
  CHECK(text.find("Saturated") != std::string::npos);
}

TEST_CASE("choi matrix of the instantaneous channel is the maximally "
          "entangled projector") {
  const GeneratorSpec spec = small_spec(GeneratorForm::Qbm4, 6, 0.4, 1.0);
  const Eigen::MatrixXcd c0 = choi_matrix(spec, 0.0);
  REQUIRE(c0.rows() == 36);
  CHECK(std::abs(c0.trace() - Complex(6.0, 0.0)) < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(c0));
  CHECK(es.eigenvalues()(35) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(std::abs(es.eigenvalues()(34)) < 1e-12);  // rank one
}

TEST_CASE("saturated generator yields a positive Choi matrix at all probed "
          "times") {
  for (const GeneratorForm form : {GeneratorForm::Qbm4, GeneratorForm::Qbm5}) {
    const GeneratorSpec spec = small_spec(form, 6, 0.5, 1.2);
    const double gamma = spec.coefficients().gamma;
    for (const double scale : {0.1, 0.5, 1.0, 2.0}) {
      const Eigen::MatrixXcd c = choi_matrix(spec, scale / gamma);
      CHECK(std::abs(c.trace() - Complex(6.0, 0.0)) < 1e-8);
      CHECK(choi_min_eigenvalue(c) > -1e-10);
    }
  }
}

TEST_CASE("removing position diffusion makes the channel non-positive") {
  // Low temperature exposes the violation: the missing D_qq term is the one
  // that keeps the generator in Lindblad form.
  const GeneratorSpec spec =
      small_spec(GeneratorForm::CaldeiraLeggett, 6, 0.5, 8.0);
  const double gamma = spec.coefficients().gamma;
  double most_negative = 0.0;
  for (const double scale : {0.1, 0.3, 1.0}) {
    const Eigen::MatrixXcd c = choi_matrix(spec, scale / gamma);
    most_negative = std::min(most_negative, choi_min_eigenvalue(c));
  }
  CHECK(most_negative < -1e-6);
}

TEST_CASE("closed evolution has a rank-one positive Choi matrix") {
  const GeneratorSpec spec = small_spec(GeneratorForm::Qbm4, 5, 0.0, 1.0, 1.7);
  const Eigen::MatrixXcd c = choi_matrix(spec, 0.9);
  CHECK(choi_min_eigenvalue(c) > -1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(c));
  CHECK(es.eigenvalues()(24) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(std::abs(es.eigenvalues()(23)) < 1e-10);
}

TEST_CASE("choi construction is guarded against large dimensions") {
  const GeneratorSpec spec = small_spec(GeneratorForm::Qbm4, 9, 0.4, 1.0);
  CHECK_THROWS_AS(choi_matrix(spec, 0.5), std::invalid_argument);
}

TEST_CASE("truncation health on closed-form states") {
  const BasisConfig basis{20, 1.0, 1.0, 1.0};
  // Thermal state: geometric level populations r^n (1-r)/(1-r^20).
  const double beta_eff = 0.8;
  const double r = std::exp(-beta_eff);
  const OperatorMatrix th = dm_thermal(basis, beta_eff).mat();
  const double want = (std::pow(r, 18) + std::pow(r, 19)) * (1.0 - r) /
                      (1.0 - std::pow(r, 20));
  CHECK(truncation_health(th) == doctest::Approx(want).epsilon(1e-12));

  CHECK(truncation_health(dm_fock(basis, 0).mat()) == 0.0);
  CHECK(truncation_health(dm_fock(basis, 19).mat()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Wider slice: fraction 0.25 covers the top five levels.
  CHECK(truncation_health(dm_fock(basis, 15).mat(), 0.25) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(truncation_health(dm_fock(basis, 14).mat(), 0.25) == 0.0);
}

}  // TEST_SUITE
