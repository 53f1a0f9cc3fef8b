#include "cpqbm/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cpqbm/linalg.hpp"

namespace cpqbm {

std::string to_string(CPVerdict v) {
  switch (v) {
    case CPVerdict::Saturated:
      return "Saturated";
    case CPVerdict::StrictlySatisfied:
      return "StrictlySatisfied";
    case CPVerdict::Violated:
      return "Violated";
  }
  return "?";
}

CPReport cp_condition(double d_pp, double d_qq, double gamma, double hbar) {
  CPReport r;
  r.lhs = d_pp * d_qq;
  r.rhs = std::pow(hbar * gamma / 2.0, 2);
  r.slack = r.lhs - r.rhs;
  const double tol =
      1e-10 * std::max({r.lhs, r.rhs, std::numeric_limits<double>::min()});
  if (std::abs(r.slack) <= tol)
    r.verdict = CPVerdict::Saturated;
  else if (r.slack > 0.0)
    r.verdict = CPVerdict::StrictlySatisfied;
  else
    r.verdict = CPVerdict::Violated;
  return r;
}

CPReport cp_condition(const CoefficientSet& coeffs) {
  return cp_condition(coeffs.d_pp, coeffs.d_qq, coeffs.gamma, coeffs.hbar);
}

std::string CPReport::to_text(const std::string& title) const {
  std::ostringstream os;
  os.precision(12);
  os << "== complete-positivity report";
  if (!title.empty()) os << ": " << title;
  os << " ==\n";
  os << "  D_pp * D_qq         = " << lhs << "\n";
  os << "  (hbar * gamma / 2)^2 = " << rhs << "\n";
  os << "  slack (lhs - rhs)   = " << slack << "\n";
  os << "  verdict             = " << cpqbm::to_string(verdict) << "\n";
  if (choi_min_eig) {
    os << "  choi min eigenvalue = " << *choi_min_eig << " (dim "
       << choi_dim.value_or(0) << ", scanned t in {0.1,0.5,1,2}/gamma)\n";
  }
  return os.str();
}

Eigen::MatrixXcd choi_matrix(const GeneratorSpec& spec, double t) {
  const int dim = spec.basis().dim;
  if (dim > 8)
    throw std::invalid_argument(
        "choi_matrix: dim^2 x dim^2 assembly is limited to dim <= 8");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument("choi_matrix: t must be >= 0");

  const Eigen::MatrixXcd u = expm(t * superoperator_matrix(spec));
  const int d2 = dim * dim;
  Eigen::MatrixXcd choi(d2, d2);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) {
      // exp(tL)(E_ij) is column i + j*dim of the propagator.
      const Eigen::MatrixXcd phi = unvec(u.col(i + j * dim), dim);
      choi.block(i * dim, j * dim, dim, dim) = phi;
    }
  }
  return choi;
}

double choi_min_eigenvalue(const Eigen::MatrixXcd& choi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(choi),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double truncation_health(const OperatorMatrix& rho, double fraction) {
  const int dim = static_cast<int>(rho.rows());
  if (!(fraction > 0.0) || !(fraction <= 1.0))
    throw std::invalid_argument("truncation_health: fraction in (0, 1]");
  const int top = std::max(1, static_cast<int>(std::ceil(fraction * dim)));
  double sum = 0.0;
  for (int k = dim - top; k < dim; ++k) sum += rho(k, k).real();
  return sum;
}

}  // namespace cpqbm
