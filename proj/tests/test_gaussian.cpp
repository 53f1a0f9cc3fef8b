#include "cpqbm/gaussian.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

#include "cpqbm/integrator.hpp"
#include "test_helpers.hpp"

using namespace cpqbm;

namespace {

// Plain RK4 on the five-dimensional moment system, independent of the
// matrix-exponential solver under test.
GaussianState rk4_moments(GaussianState s, const CoefficientSet& c,
                          const HamiltonianSpec& ham, double mass, double t,
                          int steps) {
  const double h = t / steps;
  auto add = [](const GaussianState& a, const GaussianState& b, double w) {
    return GaussianState{a.mean_x + w * b.mean_x, a.mean_p + w * b.mean_p,
                         a.var_x + w * b.var_x, a.var_p + w * b.var_p,
                         a.cov_xp + w * b.cov_xp};
  };
  for (int k = 0; k < steps; ++k) {
    const GaussianState k1 = moment_rhs(s, c, ham, mass);
    const GaussianState k2 = moment_rhs(add(s, k1, 0.5 * h), c, ham, mass);
    const GaussianState k3 = moment_rhs(add(s, k2, 0.5 * h), c, ham, mass);
    const GaussianState k4 = moment_rhs(add(s, k3, h), c, ham, mass);
    s = add(add(add(add(s, k1, h / 6.0), k2, h / 3.0), k3, h / 3.0), k4,
            h / 6.0);
  }
  return s;
}

}  // namespace

TEST_SUITE("gaussian") {

TEST_CASE("moment derivatives against hand-computed values") {
  const double mass = 2.0;
  const CoefficientSet cs = test::saturated_coefficients(0.4, 1.0, mass);
  // gamma = 0.1, D_qq = 0.00625 for this set.
  REQUIRE(cs.gamma == doctest::Approx(0.1).epsilon(1e-14));
  REQUIRE(cs.d_qq == doctest::Approx(0.00625).epsilon(1e-14));
  const HamiltonianSpec ham{HamiltonianSpec::Kind::Harmonic, 1.5, 0.0};
  const GaussianState s{0.3, -0.2, 0.7, 1.1, 0.15};
  const GaussianState d = moment_rhs(s, cs, ham, mass);
  CHECK(d.mean_x == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK(d.mean_p == doctest::Approx(-1.31).epsilon(1e-14));
  CHECK(d.var_x == doctest::Approx(0.1625).epsilon(1e-14));
  CHECK(d.var_p == doctest::Approx(-0.99).epsilon(1e-12));
  CHECK(d.cov_xp == doctest::Approx(-2.63).epsilon(1e-13));
}

TEST_CASE("matrix-exponential propagation matches an independent stepper") {
  const double mass = 1.4;
  const CoefficientSet cs = test::saturated_coefficients(0.5, 0.8, mass);
  const HamiltonianSpec ham{HamiltonianSpec::Kind::Harmonic, 1.2, 0.0};
  const GaussianState s0{1.0, -0.5, 0.9, 0.6, -0.1};
  const std::array<double, 3> times = {0.5, 2.0, 6.0};
  const std::vector<GaussianState> got =
      propagate_moments(s0, cs, ham, mass, times);
  REQUIRE(got.size() == 3);
  for (size_t k = 0; k < times.size(); ++k) {
    const GaussianState want =
        rk4_moments(s0, cs, ham, mass, times[k], 20000);
    CHECK(got[k].mean_x == doctest::Approx(want.mean_x).epsilon(1e-9));
    CHECK(got[k].mean_p == doctest::Approx(want.mean_p).epsilon(1e-9));
    CHECK(got[k].var_x == doctest::Approx(want.var_x).epsilon(1e-9));
    CHECK(got[k].var_p == doctest::Approx(want.var_p).epsilon(1e-9));
    CHECK(got[k].cov_xp == doctest::Approx(want.cov_xp).epsilon(1e-8));
  }
}

TEST_CASE("free-particle means follow the closed form") {
  const double mass = 1.0;
  const CoefficientSet cs = test::saturated_coefficients(0.6, 1.0, mass);
  const double gamma = cs.gamma;
  const GaussianState s0{0.4, 1.3, 0.5, 0.5, 0.0};
  const std::array<double, 4> times = {0.3, 1.0, 2.5, 5.0};
  const std::vector<GaussianState> got =
      propagate_moments(s0, cs, HamiltonianSpec{}, mass, times);
  for (size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const double p_want = s0.mean_p * std::exp(-2.0 * gamma * t);
    const double x_want =
        s0.mean_x +
        s0.mean_p / (2.0 * gamma * mass) * (1.0 - std::exp(-2.0 * gamma * t));
    CHECK(got[k].mean_p == doctest::Approx(p_want).epsilon(1e-12));
    CHECK(got[k].mean_x == doctest::Approx(x_want).epsilon(1e-12));
  }
}

TEST_CASE("trap fixed point zeroes the derivatives and matches the closed "
          "form for var p") {
  for (const double beta : {0.5, 1.0, 3.0}) {
    for (const double omega : {0.7, 1.0, 2.2}) {
      const double mass = 1.3;
      const CoefficientSet cs = test::saturated_coefficients(0.45, beta, mass);
      const HamiltonianSpec ham{HamiltonianSpec::Kind::Harmonic, omega, 0.0};
      const StationaryResult st = stationary_moments(cs, ham, mass);
      REQUIRE(st.mean_x.has_value());
      REQUIRE(st.var_x.has_value());
      REQUIRE(st.cov_xp.has_value());
      CHECK(*st.mean_x == 0.0);
      CHECK(*st.mean_p == 0.0);

      // Saturated coefficients pin the stationary momentum variance to
      // (M/beta) (1 + (beta hbar omega / 4)^2).
      const double want_vp =
          mass / beta * (1.0 + std::pow(beta * omega / 4.0, 2));
      CHECK(*st.var_p == doctest::Approx(want_vp).epsilon(1e-12));
      CHECK(*st.cov_xp == doctest::Approx(-mass * cs.d_qq).epsilon(1e-12));

      // Fixed point: the moment derivatives vanish there.
      const GaussianState fixed{*st.mean_x, *st.mean_p, *st.var_x, *st.var_p,
                                *st.cov_xp};
      const GaussianState d = moment_rhs(fixed, cs, ham, mass);
      const double scale = std::max(1.0, *st.var_p);
      CHECK(std::abs(d.mean_x) < 1e-13 * scale);
      CHECK(std::abs(d.mean_p) < 1e-13 * scale);
      CHECK(std::abs(d.var_x) < 1e-13 * scale);
      CHECK(std::abs(d.var_p) < 1e-13 * scale);
      CHECK(std::abs(d.cov_xp) < 1e-13 * scale);

      // And propagation actually converges to it.
      const GaussianState far{2.0, -1.0, 3.0, 0.2, 0.5};
      const double t_relax = 20.0 / cs.gamma;
      const std::array<double, 1> times = {t_relax};
      const GaussianState late =
          propagate_moments(far, cs, ham, mass, times)[0];
      CHECK(late.var_p == doctest::Approx(*st.var_p).epsilon(1e-8));
      CHECK(late.var_x == doctest::Approx(*st.var_x).epsilon(1e-8));
    }
  }
}

TEST_CASE("free particle has stationary momentum moments only") {
  const double mass = 1.7;
  const CoefficientSet cs = test::saturated_coefficients(0.3, 1.1, mass);
  const StationaryResult st = stationary_moments(cs, HamiltonianSpec{}, mass);
  CHECK(!st.mean_x.has_value());
  CHECK(!st.var_x.has_value());  // plain diffusion, grows forever
  REQUIRE(st.var_p.has_value());
  // Saturated sets give exactly the equipartition value M/beta.
  CHECK(*st.var_p == doctest::Approx(mass / 1.1).epsilon(1e-12));
  CHECK(*st.mean_p == 0.0);
  REQUIRE(st.cov_xp.has_value());
  CHECK(*st.cov_xp ==
        doctest::Approx(*st.var_p / (2.0 * cs.gamma * mass)).epsilon(1e-12));
}

TEST_CASE("no friction means no fixed point") {
  const CoefficientSet cs = test::saturated_coefficients(0.0, 1.0, 1.0);
  const HamiltonianSpec ham{HamiltonianSpec::Kind::Harmonic, 1.0, 0.0};
  const StationaryResult st = stationary_moments(cs, ham, 1.0);
  CHECK(!st.mean_x.has_value());
  CHECK(!st.var_p.has_value());
  CHECK(!st.cov_xp.has_value());
}

TEST_CASE("oracle agrees with the matrix evolution it certifies") {
  // End-to-end consistency: evolve a coherent state in the truncated basis
  // and compare every recorded moment against the closed moment system.
  const CoefficientSet cs = test::saturated_coefficients(0.3, 1.0, 1.0);
  const HamiltonianSpec ham{HamiltonianSpec::Kind::Harmonic, 1.0, 0.0};
  const BasisConfig basis{40, 1.0, 1.0, 1.0};
  const GeneratorSpec spec =
      GeneratorSpec::qbm(GeneratorForm::Qbm4, cs, ham, basis);
  const DensityMatrix rho0 = dm_coherent(basis, Complex(1.2, 0.4));

  IntegratorConfig cfg;
  cfg.dt = 0.005;
  cfg.t_end = 8.0;
  cfg.record_every = 200;
  const TrajectoryRecord rec = integrate(spec, rho0, cfg);

  const GaussianState s0{rec.rows[0].mean_x, rec.rows[0].mean_p,
                         rec.rows[0].var_x, rec.rows[0].var_p,
                         rec.rows[0].cov_xp};
  const std::vector<GaussianState> want =
      propagate_moments(s0, cs, ham, 1.0, rec.times);
  for (size_t k = 0; k < rec.times.size(); ++k) {
    CHECK(rec.rows[k].mean_x == doctest::Approx(want[k].mean_x).epsilon(2e-6));
    CHECK(rec.rows[k].mean_p == doctest::Approx(want[k].mean_p).epsilon(2e-6));
    CHECK(rec.rows[k].var_x == doctest::Approx(want[k].var_x).epsilon(2e-6));
    CHECK(rec.rows[k].var_p == doctest::Approx(want[k].var_p).epsilon(2e-6));
  }
}

}  // TEST_SUITE
