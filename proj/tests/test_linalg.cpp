#include "cpqbm/linalg.hpp"

#include <doctest.h>

#include <cmath>

#include "cpqbm/basis.hpp"
#include "test_helpers.hpp"

using namespace cpqbm;

TEST_SUITE("linalg") {

TEST_CASE("column-stacking convention") {
  Eigen::MatrixXcd m(2, 2);
  m << Complex(1), Complex(2), Complex(3), Complex(4);
  const Eigen::VectorXcd v = vec(m);
  // vec(M)(i + j*dim) = M(i, j)
  CHECK(v(0) == Complex(1));
  CHECK(v(1) == Complex(3));
  CHECK(v(2) == Complex(2));
  CHECK(v(3) == Complex(4));
  CHECK(unvec(v, 2).isApprox(m));
  CHECK_THROWS_AS(unvec(v, 3), std::invalid_argument);
}

TEST_CASE("kron against the vectorisation identity") {
  // (B^T kron A) vec(X) = vec(A X B) pins down both conventions at once.
  auto& gen = test::rng();
  const Eigen::MatrixXcd a = test::random_complex(3, 3, gen);
  const Eigen::MatrixXcd b = test::random_complex(3, 3, gen);
  const Eigen::MatrixXcd x = test::random_complex(3, 3, gen);
  const Eigen::VectorXcd lhs = kron(b.transpose(), a) * vec(x);
  const Eigen::VectorXcd rhs = vec((a * x * b).eval());
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hermitize and its defect measure") {
  Eigen::MatrixXcd m(2, 2);
  m << Complex(1, 0), Complex(0, 2), Complex(0, 0), Complex(3, 0);
  CHECK(hermiticity_defect(m) == doctest::Approx(2.0));
  const Eigen::MatrixXcd h = hermitize(m);
  CHECK(hermiticity_defect(h) < 1e-15);
  CHECK(h(0, 1) == Complex(0, 1));
  CHECK(h(1, 0) == Complex(0, -1));
}

TEST_CASE("expm of simple closed forms") {
  // Zero matrix.
  CHECK(expm(Eigen::MatrixXcd::Zero(3, 3))
            .isApprox(Eigen::MatrixXcd::Identity(3, 3), 1e-14));
  // Diagonal.
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = Complex(0.3, -0.2);
  d(1, 1) = Complex(-1.5, 0.4);
  const Eigen::MatrixXcd ed = expm(d);
  CHECK(std::abs(ed(0, 0) - std::exp(d(0, 0))) < 1e-14);
  CHECK(std::abs(ed(1, 1) - std::exp(d(1, 1))) < 1e-14);
  CHECK(std::abs(ed(0, 1)) < 1e-15);
  // Nilpotent: exp([[0,1],[0,0]]) = [[1,1],[0,1]].
  Eigen::MatrixXcd nil = Eigen::MatrixXcd::Zero(2, 2);
  nil(0, 1) = 1.0;
  const Eigen::MatrixXcd en = expm(nil);
  CHECK(std::abs(en(0, 0) - Complex(1)) < 1e-14);
  CHECK(std::abs(en(0, 1) - Complex(1)) < 1e-14);
  CHECK(std::abs(en(1, 0)) < 1e-14);
}

TEST_CASE("expm rotation generator, including the scaling branch") {
  // exp(theta [[0,1],[-1,0]]) = [[cos, sin],[-sin, cos]]; theta = 100
  // forces several squarings.
  for (const double theta : {0.3, 100.0}) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
    a(0, 1) = theta;
    a(1, 0) = -theta;
    const Eigen::MatrixXcd e = expm(a);
    CHECK(std::abs(e(0, 0) - Complex(std::cos(theta))) < 1e-12);
    CHECK(std::abs(e(0, 1) - Complex(std::sin(theta))) < 1e-12);
    CHECK(std::abs(e(1, 0) + Complex(std::sin(theta))) < 1e-12);
  }
}

TEST_CASE("expm of -iH agrees with the spectral decomposition") {
  auto& gen = test::rng();
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::MatrixXcd h = 3.0 * test::random_hermitian(8, gen);
    const Eigen::MatrixXcd u = expm(Complex(0.0, -1.0) * h);
    // Unitarity.
    CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(8, 8))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    // Against exp from the eigendecomposition.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd ph(8);
    for (int k = 0; k < 8; ++k)
      ph(k) = std::exp(Complex(0.0, -es.eigenvalues()(k)));
    const Eigen::MatrixXcd uref =
        es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    CHECK((u - uref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("expm semigroup property") {
  auto& gen = test::rng();
  const Eigen::MatrixXcd a = test::random_complex(6, 6, gen);
  const Eigen::MatrixXcd e1 = expm(a);
  const Eigen::MatrixXcd e2 = expm((2.0 * a).eval());
  CHECK((e1 * e1 - e2).cwiseAbs().maxCoeff() <
        1e-11 * e2.cwiseAbs().maxCoeff());
}

}  // TEST_SUITE
