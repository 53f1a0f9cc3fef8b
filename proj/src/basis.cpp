#include "cpqbm/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cpqbm/linalg.hpp"

namespace cpqbm {

void BasisConfig::validate() const {
  if (dim < 2) throw std::invalid_argument("BasisConfig: dim must be >= 2");
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw std::invalid_argument("BasisConfig: mass must be positive");
  if (!(omega_ref > 0.0) || !std::isfinite(omega_ref))
    throw std::invalid_argument("BasisConfig: omega_ref must be positive");
  if (!(hbar > 0.0) || !std::isfinite(hbar))
    throw std::invalid_argument("BasisConfig: hbar must be positive");
}

LadderPair build_ladder(const BasisConfig& cfg) {
  cfg.validate();
  OperatorMatrix a = OperatorMatrix::Zero(cfg.dim, cfg.dim);
  for (int n = 1; n < cfg.dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return {a, a.adjoint()};
}

OperatorMatrix build_position(const BasisConfig& cfg) {
  const LadderPair l = build_ladder(cfg);
  const double s = std::sqrt(cfg.hbar / (2.0 * cfg.mass * cfg.omega_ref));
  return s * (l.lower + l.raise);
}

OperatorMatrix build_momentum(const BasisConfig& cfg) {
  const LadderPair l = build_ladder(cfg);
  const double s = std::sqrt(cfg.hbar * cfg.mass * cfg.omega_ref / 2.0);
  return Complex(0.0, 1.0) * s * (l.raise - l.lower);
}

OperatorMatrix build_number(const BasisConfig& cfg) {
  cfg.validate();
  OperatorMatrix n = OperatorMatrix::Zero(cfg.dim, cfg.dim);
  for (int k = 0; k < cfg.dim; ++k) n(k, k) = double(k);
  return n;
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b - b * a;
}

OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b + b * a;
}

DensityMatrix::DensityMatrix(OperatorMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 1)
    throw std::invalid_argument("DensityMatrix: matrix must be square");
  const double herm = hermiticity_defect(rho_);
  if (!(herm <= kHermTol))
    throw std::invalid_argument("DensityMatrix: hermiticity defect " +
                                std::to_string(herm) + " exceeds 1e-12");
  const Complex tr = rho_.trace();
  if (!(std::abs(tr - Complex(1.0, 0.0)) <= kTraceTol))
    throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                std::to_string(std::abs(tr - Complex(1.0, 0.0))));
  const double lo = min_eigenvalue(rho_);
  if (!(lo >= kEigFloor))
    throw std::invalid_argument("DensityMatrix: smallest eigenvalue " +
                                std::to_string(lo) + " below -1e-10");
}

DensityMatrix dm_fock(const BasisConfig& cfg, int n) {
  cfg.validate();
  if (n < 0 || n >= cfg.dim)
    throw std::invalid_argument("dm_fock: level out of range");
  OperatorMatrix rho = OperatorMatrix::Zero(cfg.dim, cfg.dim);
  rho(n, n) = 1.0;
  return DensityMatrix(rho);
}

DensityMatrix dm_coherent(const BasisConfig& cfg, Complex alpha) {
  cfg.validate();
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
    throw std::invalid_argument("dm_coherent: alpha must be finite");
  // c_n = alpha^n / sqrt(n!), built iteratively to avoid overflow, then the
  // truncated vector is renormalised.
  Eigen::VectorXcd v(cfg.dim);
  v(0) = 1.0;
  for (int n = 1; n < cfg.dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(double(n));
  v.normalize();
  OperatorMatrix rho = v * v.adjoint();
  return DensityMatrix(rho);
}

DensityMatrix dm_thermal(const BasisConfig& cfg, double beta_eff) {
  cfg.validate();
  if (!(beta_eff > 0.0) || !std::isfinite(beta_eff))
    throw std::invalid_argument("dm_thermal: beta_eff must be positive");
  // w_n proportional to exp(-beta_eff hbar omega_ref n); the constant
  // zero-point offset cancels in the normalisation.
  Eigen::VectorXd w(cfg.dim);
  const double r = -beta_eff * cfg.hbar * cfg.omega_ref;
  for (int n = 0; n < cfg.dim; ++n) w(n) = std::exp(r * double(n));
  w /= w.sum();
  OperatorMatrix rho = OperatorMatrix::Zero(cfg.dim, cfg.dim);
  for (int n = 0; n < cfg.dim; ++n) rho(n, n) = w(n);
  return DensityMatrix(rho);
}

Complex expectation(const OperatorMatrix& rho, const OperatorMatrix& op) {
  if (rho.rows() != op.rows() || rho.cols() != op.cols())
    throw std::invalid_argument("expectation: dimension mismatch");
  return (rho * op).trace();
}

double purity(const OperatorMatrix& rho) {
  return (rho * rho).trace().real();
}

double min_eigenvalue(const OperatorMatrix& rho) {
  const OperatorMatrix h = hermitize(rho);
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

OperatorMatrix project_interior(const OperatorMatrix& m, int margin_low,
                                int margin_high) {
  const int dim = static_cast<int>(m.rows());
  if (margin_low < 0 || margin_high < 0 || margin_low + margin_high >= dim)
    throw std::invalid_argument("project_interior: margins exceed dimension");
  OperatorMatrix out = m;
  out.topRows(margin_low).setZero();
  out.bottomRows(margin_high).setZero();
  out.leftCols(margin_low).setZero();
  out.rightCols(margin_high).setZero();
  return out;
}

}  // namespace cpqbm
