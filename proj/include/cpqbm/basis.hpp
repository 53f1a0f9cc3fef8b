#pragma once

// Truncated harmonic-oscillator number basis for a single one-dimensional
// degree of freedom, plus the standard operator and state constructions on it.
//
// Conventions:
//   x = sqrt(hbar / (2 M omega_ref)) (a + a^dag)
//   p = i sqrt(hbar M omega_ref / 2) (a^dag - a)
// so that [x, p] = i hbar exactly on the untruncated space.  After truncating
// to `dim` levels the commutator picks up a defect in the highest level:
//   [x, p] = i hbar (I - dim |dim-1><dim-1|)
// All tests that rely on canonical commutation therefore restrict themselves
// to an interior block away from the truncation edge (see project_interior).

#include <complex>
#include <Eigen/Dense>

namespace cpqbm {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;

// Parameters of the reference oscillator that defines the number basis.
// omega_ref is a representation choice, not a physical trap frequency; the
// trap (if any) is part of the Hamiltonian, see master_equation.hpp.
struct BasisConfig {
  int dim = 0;            // number of retained levels, >= 2
  double mass = 1.0;      // tracked particle mass M
  double omega_ref = 1.0; // reference oscillator frequency
  double hbar = 1.0;

  void validate() const;  // throws std::invalid_argument on bad parameters
};

struct LadderPair {
  OperatorMatrix lower;   // a
  OperatorMatrix raise;   // a^dag
};

LadderPair build_ladder(const BasisConfig& cfg);
OperatorMatrix build_position(const BasisConfig& cfg);
OperatorMatrix build_momentum(const BasisConfig& cfg);
OperatorMatrix build_number(const BasisConfig& cfg);

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b);

// Validated density matrix: Hermitian to 1e-12 (entrywise), unit trace to
// 1e-10, and no eigenvalue below -1e-10.  Constructions below satisfy these
// exactly up to roundoff; the constructor re-checks arbitrary input.
class DensityMatrix {
 public:
  explicit DensityMatrix(OperatorMatrix rho);

  const OperatorMatrix& mat() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }

  static constexpr double kHermTol = 1e-12;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kEigFloor = -1e-10;

 private:
  OperatorMatrix rho_;
};

// Number eigenstate |n><n|.
DensityMatrix dm_fock(const BasisConfig& cfg, int n);

// Truncated coherent state, renormalised after truncation.  Callers should
// keep |alpha|^2 well below dim (the CLI warns above dim/4), otherwise the
// discarded Poisson tail is no longer negligible.
DensityMatrix dm_coherent(const BasisConfig& cfg, Complex alpha);

// Gibbs state of the reference oscillator at inverse temperature beta_eff,
// renormalised over the retained levels.
DensityMatrix dm_thermal(const BasisConfig& cfg, double beta_eff);

Complex expectation(const OperatorMatrix& rho, const OperatorMatrix& op);
double purity(const OperatorMatrix& rho);                 // Tr rho^2
double min_eigenvalue(const OperatorMatrix& rho);         // of (rho+rho^dag)/2

// Zero out the lowest `margin_low` and highest `margin_high` levels (rows and
// columns).  Used to compare operator identities away from the truncation
// edge, where the finite basis is faithful to the infinite-dimensional
// algebra.
OperatorMatrix project_interior(const OperatorMatrix& m, int margin_low = 2,
                                int margin_high = 3);

}  // namespace cpqbm
