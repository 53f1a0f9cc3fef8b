#pragma once

// Right-hand sides of the Brownian-motion master equation in the truncated
// number basis, in two algebraically equivalent forms plus two reference
// generators:
//
//   double-commutator form
//     d rho/dt = -(i/hbar)[H, rho] - (D_pp/hbar^2)[x,[x,rho]]
//                - (D_qq/hbar^2)[p,[p,rho]] - (i gamma/hbar)[x, {p, rho}]
//
//   single-generator Lindblad form
//     d rho/dt = -(i/hbar)[H + (D_pp lambda^2/(4 hbar^2)) {x,p}, rho]
//                + (D_pp lambda^2/hbar^2) (A rho A^dag - (1/2){A^dag A, rho})
//     with A = (sqrt(2)/lambda) (x + i (lambda^2/(4 hbar)) p)
//     and lambda = hbar sqrt(beta / M) the particle thermal length.
//
// When the coefficients saturate D_pp D_qq = (hbar gamma / 2)^2 (as the
// derivation in coefficients.hpp guarantees) the two forms agree: expanding
// A^dag A reproduces the double commutators, the friction commutator and the
// {x,p} counter-term, and even the truncation defect of [x,p] cancels
// between the dissipator and the commutators.  The matrices produced by
// rhs_qbm4 and rhs_qbm5 therefore agree to roundoff at every dimension, not
// just on the interior block.
//
// The Caldeira-Leggett reference generator is the double-commutator form
// with D_qq set to zero; it is not completely positive (see diagnostics).

#include <span>
#include <vector>

#include "cpqbm/basis.hpp"
#include "cpqbm/coefficients.hpp"

namespace cpqbm {

struct HamiltonianSpec {
  enum class Kind { Free, Harmonic };
  Kind kind = Kind::Free;
  double omega = 0.0;   // trap frequency; required > 0 for Harmonic
  double shift = 0.0;   // additive c-number potential (mean-field shift)

  void validate() const;
};

enum class GeneratorForm { Qbm4, Qbm5, CaldeiraLeggett, Generic };

// A fully assembled generator: basis operators, Hamiltonian and the
// dissipative pieces are precomputed once so the right-hand side is a fixed
// number of matrix products.  Immutable after construction and safe to share
// across threads.
class GeneratorSpec {
 public:
  static GeneratorSpec qbm(GeneratorForm form, const CoefficientSet& coeffs,
                           const HamiltonianSpec& ham, const BasisConfig& basis);
  static GeneratorSpec generic(const BasisConfig& basis, OperatorMatrix h,
                               std::vector<OperatorMatrix> lindblad_ops);

  OperatorMatrix apply(const OperatorMatrix& rho) const;

  GeneratorForm form() const { return form_; }
  const BasisConfig& basis() const { return basis_; }
  const HamiltonianSpec& hamiltonian_spec() const { return ham_; }
  // Coefficients as supplied / as actually used by the generator (the
  // Caldeira-Leggett form drops D_qq).
  const CoefficientSet& coefficients() const;
  CoefficientSet effective_coefficients() const;

  const OperatorMatrix& hamiltonian() const { return h_; }
  const OperatorMatrix& position() const { return x_; }
  const OperatorMatrix& momentum() const { return p_; }
  const OperatorMatrix& position_sq() const { return x2_; }
  const OperatorMatrix& momentum_sq() const { return p2_; }
  const OperatorMatrix& xp_anticommutator() const { return xp_sym_; }
  // Lindblad operator of the single-generator form (Qbm forms only).
  const OperatorMatrix& annihilation_a() const;
  double lindblad_rate() const { return rate5_; }

 private:
  GeneratorSpec() = default;

  friend OperatorMatrix rhs_qbm4(const GeneratorSpec&, const OperatorMatrix&);
  friend OperatorMatrix rhs_qbm5(const GeneratorSpec&, const OperatorMatrix&);
  friend OperatorMatrix rhs_caldeira_leggett(const GeneratorSpec&,
                                             const OperatorMatrix&);

  GeneratorForm form_ = GeneratorForm::Qbm4;
  BasisConfig basis_;
  HamiltonianSpec ham_;
  bool has_coeffs_ = false;
  CoefficientSet coeffs_;

  OperatorMatrix x_, p_, x2_, p2_, xp_sym_, h_;
  // Grouped one-sided factors: rhs = L rho + rho R + cross terms.
  OperatorMatrix l4_, r4_;          // double-commutator form
  OperatorMatrix lcl_, rcl_;        // Caldeira-Leggett (D_qq = 0)
  OperatorMatrix l5_, r5_, a5_;     // Lindblad form
  double rate5_ = 0.0;              // D_pp lambda^2 / hbar^2

  std::vector<OperatorMatrix> gen_ops_;  // generic Lindblad operators
  OperatorMatrix lg_, rg_;
};

// The four right-hand sides.  The Qbm evaluators use whatever coefficient
// set the spec carries (so both forms can be evaluated on one spec);
// rhs_caldeira_leggett always uses D_qq = 0.
OperatorMatrix rhs_qbm4(const GeneratorSpec& spec, const OperatorMatrix& rho);
OperatorMatrix rhs_qbm5(const GeneratorSpec& spec, const OperatorMatrix& rho);
OperatorMatrix rhs_caldeira_leggett(const GeneratorSpec& spec,
                                    const OperatorMatrix& rho);
OperatorMatrix rhs_generic_lindblad(const OperatorMatrix& h,
                                    std::span<const OperatorMatrix> ops,
                                    const OperatorMatrix& rho,
                                    double hbar = 1.0);

// Lindblad operator A = (sqrt(2)/lambda)(x + i (lambda^2/(4 hbar)) p) for a
// particle of the basis mass at inverse temperature beta.  A is a Bogoliubov
// combination u a + v a^dag of the basis ladder operators with u^2 - v^2 = 1,
// so [A, A^dag] = I away from the truncation edge; it reduces to the ladder
// operator itself when omega_ref = 4 / (beta hbar).
OperatorMatrix build_annihilation_a(const BasisConfig& basis, double beta);

// Dense matrix of the generator acting on column-stacked density matrices:
// S vec(rho) = vec(apply(rho)).  Guarded to dim <= 12 (the matrix has
// dim^4 entries); build a smaller-dimension spec for structural checks.
Eigen::MatrixXcd superoperator_matrix(const GeneratorSpec& spec);

}  // namespace cpqbm
