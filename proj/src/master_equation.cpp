#include "cpqbm/master_equation.hpp"

#include <cmath>
#include <stdexcept>

#include "cpqbm/linalg.hpp"

namespace cpqbm {

namespace {
constexpr Complex kI{0.0, 1.0};
}

void HamiltonianSpec::validate() const {
  if (kind == Kind::Harmonic && (!(omega > 0.0) || !std::isfinite(omega)))
    throw std::invalid_argument("HamiltonianSpec: harmonic trap needs omega > 0");
  if (!std::isfinite(shift))
    throw std::invalid_argument("HamiltonianSpec: shift must be finite");
}

GeneratorSpec GeneratorSpec::qbm(GeneratorForm form, const CoefficientSet& coeffs,
                                 const HamiltonianSpec& ham,
                                 const BasisConfig& basis) {
  if (form == GeneratorForm::Generic)
    throw std::invalid_argument("GeneratorSpec::qbm: use generic() for custom operators");
  basis.validate();
  ham.validate();
  if (!(coeffs.d_pp >= 0.0) || !(coeffs.d_qq >= 0.0))
    throw std::invalid_argument("GeneratorSpec: diffusion coefficients must be >= 0");
  const double hb = basis.hbar;
  if (std::abs(coeffs.hbar - hb) > 1e-12 * hb)
    throw std::invalid_argument("GeneratorSpec: coefficient and basis hbar disagree");

  GeneratorSpec s;
  s.form_ = form;
  s.basis_ = basis;
  s.ham_ = ham;
  s.has_coeffs_ = true;
  s.coeffs_ = coeffs;

  s.x_ = build_position(basis);
  s.p_ = build_momentum(basis);
  s.x2_ = s.x_ * s.x_;
  s.p2_ = s.p_ * s.p_;
  s.xp_sym_ = anticommutator(s.x_, s.p_);

  s.h_ = s.p2_ / (2.0 * basis.mass);
  if (ham.kind == HamiltonianSpec::Kind::Harmonic)
    s.h_ += 0.5 * basis.mass * ham.omega * ham.omega * s.x2_;
  if (ham.shift != 0.0)
    s.h_ += ham.shift * OperatorMatrix::Identity(basis.dim, basis.dim);

  // Double-commutator form grouped as L rho + rho R + cross terms.
  const double dpp = coeffs.d_pp / (hb * hb);
  const double dqq = coeffs.d_qq / (hb * hb);
  const Complex fric = kI * coeffs.gamma / hb;
  s.l4_ = -kI / hb * s.h_ - dpp * s.x2_ - dqq * s.p2_ - fric * (s.x_ * s.p_);
  s.r4_ = kI / hb * s.h_ - dpp * s.x2_ - dqq * s.p2_ + fric * (s.p_ * s.x_);
  s.lcl_ = s.l4_ + dqq * s.p2_;
  s.rcl_ = s.r4_ + dqq * s.p2_;

  // Single-generator form.  The thermal length uses the gas temperature the
  // coefficients were derived at; recover beta from gamma = beta/(2M) D_pp
  // when possible, otherwise from the provenance record.
  double beta = coeffs.provenance.gas.beta;
  if (coeffs.d_pp > 0.0 && coeffs.gamma > 0.0)
    beta = 2.0 * basis.mass * coeffs.gamma / coeffs.d_pp;
  if (beta > 0.0) {
    const double lambda = thermal_wavelength_particle(basis.mass, beta, hb);
    s.a5_ = build_annihilation_a(basis, beta);
    s.rate5_ = coeffs.d_pp * lambda * lambda / (hb * hb);
    const OperatorMatrix h5 =
        s.h_ + coeffs.d_pp * lambda * lambda / (4.0 * hb * hb) * s.xp_sym_;
    const OperatorMatrix ada = s.a5_.adjoint() * s.a5_;
    s.l5_ = -kI / hb * h5 - 0.5 * s.rate5_ * ada;
    s.r5_ = kI / hb * h5 - 0.5 * s.rate5_ * ada;
  } else if (form == GeneratorForm::Qbm5) {
    throw std::invalid_argument(
        "GeneratorSpec: single-generator form needs a temperature (set "
        "provenance.gas.beta or nonzero gamma/d_pp)");
  }
  return s;
}

GeneratorSpec GeneratorSpec::generic(const BasisConfig& basis, OperatorMatrix h,
                                     std::vector<OperatorMatrix> lindblad_ops) {
  basis.validate();
  if (h.rows() != basis.dim || h.cols() != basis.dim)
    throw std::invalid_argument("GeneratorSpec::generic: H dimension mismatch");
  if (hermiticity_defect(h) > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("GeneratorSpec::generic: H must be Hermitian");
  for (const auto& op : lindblad_ops)
    if (op.rows() != basis.dim || op.cols() != basis.dim)
      throw std::invalid_argument(
          "GeneratorSpec::generic: Lindblad operator dimension mismatch");

  GeneratorSpec s;
  s.form_ = GeneratorForm::Generic;
  s.basis_ = basis;
  s.x_ = build_position(basis);
  s.p_ = build_momentum(basis);
  s.x2_ = s.x_ * s.x_;
  s.p2_ = s.p_ * s.p_;
  s.xp_sym_ = anticommutator(s.x_, s.p_);
  s.h_ = std::move(h);
  s.gen_ops_ = std::move(lindblad_ops);

  OperatorMatrix half_sum = OperatorMatrix::Zero(basis.dim, basis.dim);
  for (const auto& op : s.gen_ops_) half_sum += 0.5 * (op.adjoint() * op);
  s.lg_ = -kI / basis.hbar * s.h_ - half_sum;
  s.rg_ = kI / basis.hbar * s.h_ - half_sum;
  return s;
}

const CoefficientSet& GeneratorSpec::coefficients() const {
  if (!has_coeffs_)
    throw std::logic_error("GeneratorSpec: generic generator has no coefficients");
  return coeffs_;
}

CoefficientSet GeneratorSpec::effective_coefficients() const {
  CoefficientSet cs = coefficients();
  if (form_ == GeneratorForm::CaldeiraLeggett) cs.d_qq = 0.0;
  return cs;
}

const OperatorMatrix& GeneratorSpec::annihilation_a() const {
  if (a5_.size() == 0)
    throw std::logic_error("GeneratorSpec: no single-generator operator available");
  return a5_;
}

OperatorMatrix GeneratorSpec::apply(const OperatorMatrix& rho) const {
  switch (form_) {
    case GeneratorForm::Qbm4:
      return rhs_qbm4(*this, rho);
    case GeneratorForm::Qbm5:
      return rhs_qbm5(*this, rho);
    case GeneratorForm::CaldeiraLeggett:
      return rhs_caldeira_leggett(*this, rho);
    case GeneratorForm::Generic: {
      OperatorMatrix out = lg_ * rho + rho * rg_;
      for (const auto& op : gen_ops_) out += op * rho * op.adjoint();
      return out;
    }
  }
  throw std::logic_error("GeneratorSpec: unknown form");
}

OperatorMatrix rhs_qbm4(const GeneratorSpec& s, const OperatorMatrix& rho) {
  const double hb = s.basis_.hbar;
  const double dpp = s.coefficients().d_pp / (hb * hb);
  const double dqq = s.coefficients().d_qq / (hb * hb);
  const Complex fric = kI * s.coefficients().gamma / hb;
  const OperatorMatrix xr = s.x_ * rho;
  const OperatorMatrix pr = s.p_ * rho;
  return s.l4_ * rho + rho * s.r4_ + 2.0 * dpp * (xr * s.x_) +
         2.0 * dqq * (pr * s.p_) - fric * (xr * s.p_ - pr * s.x_);
}

OperatorMatrix rhs_qbm5(const GeneratorSpec& s, const OperatorMatrix& rho) {
  if (s.a5_.size() == 0)
    throw std::logic_error("rhs_qbm5: spec has no single-generator operator");
  const OperatorMatrix ar = s.a5_ * rho;
  return s.l5_ * rho + rho * s.r5_ + s.rate5_ * (ar * s.a5_.adjoint());
}

OperatorMatrix rhs_caldeira_leggett(const GeneratorSpec& s,
                                    const OperatorMatrix& rho) {
  const double hb = s.basis_.hbar;
  const double dpp = s.coefficients().d_pp / (hb * hb);
  const Complex fric = kI * s.coefficients().gamma / hb;
  const OperatorMatrix xr = s.x_ * rho;
  const OperatorMatrix pr = s.p_ * rho;
  return s.lcl_ * rho + rho * s.rcl_ + 2.0 * dpp * (xr * s.x_) -
         fric * (xr * s.p_ - pr * s.x_);
}

OperatorMatrix rhs_generic_lindblad(const OperatorMatrix& h,
                                    std::span<const OperatorMatrix> ops,
                                    const OperatorMatrix& rho, double hbar) {
  OperatorMatrix out = -kI / hbar * (h * rho - rho * h);
  for (const auto& op : ops) {
    const OperatorMatrix lr = op * rho;
    const OperatorMatrix ll = op.adjoint() * op;
    out += lr * op.adjoint() - 0.5 * (ll * rho + rho * ll);
  }
  return out;
}

OperatorMatrix build_annihilation_a(const BasisConfig& basis, double beta) {
  basis.validate();
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("build_annihilation_a: beta must be positive");
  const double lambda = thermal_wavelength_particle(basis.mass, beta, basis.hbar);
  const OperatorMatrix x = build_position(basis);
  const OperatorMatrix p = build_momentum(basis);
  return std::sqrt(2.0) / lambda *
         (x + kI * lambda * lambda / (4.0 * basis.hbar) * p);
}

Eigen::MatrixXcd superoperator_matrix(const GeneratorSpec& spec) {
  const int dim = spec.basis().dim;
  if (dim > 12)
    throw std::invalid_argument(
        "superoperator_matrix: dim^2 x dim^2 assembly is limited to dim <= 12; "
        "build a smaller-dimension spec for structural checks");
  const int d2 = dim * dim;
  Eigen::MatrixXcd s(d2, d2);
  OperatorMatrix e = OperatorMatrix::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      e(i, j) = 1.0;
      s.col(i + j * dim) = vec(spec.apply(e));
      e(i, j) = 0.0;
    }
  }
  return s;
}

}  // namespace cpqbm
