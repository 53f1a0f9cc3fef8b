#pragma once

// Shared fixtures and independent oracles for the test suites.  Everything
// here is deliberately written from first principles (spectral evolution,
// closed-form integrals) rather than through the code paths under test.

#include <cmath>
#include <numbers>
#include <random>

#include "cpqbm/basis.hpp"
#include "cpqbm/coefficients.hpp"

namespace cpqbm::test {

inline std::mt19937& rng(unsigned seed = 0) {
  static std::mt19937 gen(seed ? seed : 12345u);
  return gen;
}

inline Eigen::MatrixXcd random_complex(int rows, int cols, std::mt19937& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(dist(gen), dist(gen));
  return m;
}

inline Eigen::MatrixXcd random_hermitian(int dim, std::mt19937& gen) {
  const Eigen::MatrixXcd g = random_complex(dim, dim, gen);
  return 0.5 * (g + g.adjoint());
}

// Random full-rank density matrix G G^dag / Tr.
inline OperatorMatrix random_density(int dim, std::mt19937& gen) {
  const Eigen::MatrixXcd g = random_complex(dim, dim, gen);
  OperatorMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

// Random density matrix supported on levels [lo, dim - hi): zero rows and
// columns in the truncation margins, so commutation identities hold exactly.
inline OperatorMatrix random_interior_density(int dim, std::mt19937& gen,
                                              int lo = 2, int hi = 3) {
  const int core = dim - lo - hi;
  const Eigen::MatrixXcd g = random_complex(core, core, gen);
  Eigen::MatrixXcd block = g * g.adjoint();
  block /= block.trace().real();
  OperatorMatrix rho = OperatorMatrix::Zero(dim, dim);
  rho.block(lo, lo, core, core) = block;
  return rho;
}

// Exact unitary evolution rho(t) = U rho U^dag with U = exp(-i H t / hbar)
// from the spectral decomposition of H.  Independent of both the RK4
// stepper and the Pade matrix exponential.
inline OperatorMatrix evolve_unitary(const Eigen::MatrixXcd& h,
                                     const OperatorMatrix& rho, double t,
                                     double hbar = 1.0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXd ev = es.eigenvalues();
  Eigen::VectorXcd phases(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    phases(k) = std::exp(Complex(0.0, -ev(k) * t / hbar));
  const Eigen::MatrixXcd u =
      es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  return u * rho * u.adjoint();
}

// Ground state of a harmonic trap of frequency omega, expressed in a basis
// whose reference frequency differs: a position-squeezed Gaussian state.
inline OperatorMatrix squeezed_ground_state(const BasisConfig& basis,
                                            double omega) {
  const OperatorMatrix p = build_position(basis);  // names shortened below
  const OperatorMatrix mom = build_momentum(basis);
  const Eigen::MatrixXcd h =
      mom * mom / (2.0 * basis.mass) +
      0.5 * basis.mass * omega * omega * p * p;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd g = es.eigenvectors().col(0);
  return g * g.adjoint();
}

// Closed-form momentum diffusion for |t(q)|^2 = t0^2 exp(-s2 q^2):
//   D_pp = (2/3) (pi^2 m^2/(beta hbar)) n lambda^3 * 4 pi * t0^2 / (2 c^2)
// with c = beta/(8 m) + s2, using Int_0^inf q^3 e^{-c q^2} dq = 1/(2 c^2).
// Written without any calls into the library so it can serve as its oracle.
inline double closed_form_dpp(double m, double beta, double n, double hbar,
                              double t0, double s2 = 0.0) {
  const double pi = std::numbers::pi;
  const double lambda = std::sqrt(2.0 * pi * hbar * hbar * beta / m);
  const double c = beta / (8.0 * m) + s2;
  const double radial = 4.0 * pi * t0 * t0 / (2.0 * c * c);
  return (2.0 / 3.0) * pi * pi * m * m / (beta * hbar) * n *
         lambda * lambda * lambda * radial;
}

// Saturated coefficient set at a chosen temperature, bypassing quadrature.
inline CoefficientSet saturated_coefficients(double d_pp, double beta,
                                             double particle_mass,
                                             double hbar = 1.0) {
  CoefficientSet cs;
  cs.d_pp = d_pp;
  cs.d_qq = std::pow(beta * hbar / (4.0 * particle_mass), 2) * d_pp;
  cs.gamma = beta / (2.0 * particle_mass) * d_pp;
  cs.hbar = hbar;
  cs.provenance.gas = GasParameters{1.0, beta, 1.0, hbar};
  cs.provenance.particle_mass = particle_mass;
  cs.provenance.tmatrix = "hand-built (tests)";
  return cs;
}

}  // namespace cpqbm::test
