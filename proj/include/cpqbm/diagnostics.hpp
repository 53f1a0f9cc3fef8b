#pragma once

// Structural diagnostics: the complete-positivity inequality on the
// coefficients, the Choi matrix of the propagated channel, and basis
// truncation health.

#include <optional>
#include <string>

#include "cpqbm/coefficients.hpp"
#include "cpqbm/master_equation.hpp"

namespace cpqbm {

enum class CPVerdict { Saturated, StrictlySatisfied, Violated };

std::string to_string(CPVerdict v);

// Verdict on D_pp D_qq >= (hbar gamma / 2)^2.  slack = lhs - rhs; the
// verdict is Saturated when |slack| <= 1e-10 * max(lhs, rhs) (with a tiny
// absolute floor so the all-zero coefficient set counts as saturated).
struct CPReport {
  double lhs = 0.0;    // D_pp * D_qq
  double rhs = 0.0;    // (hbar gamma / 2)^2
  double slack = 0.0;  // lhs - rhs
  CPVerdict verdict = CPVerdict::Saturated;
  std::optional<double> choi_min_eig;
  std::optional<int> choi_dim;

  std::string to_text(const std::string& title = "") const;
};

CPReport cp_condition(const CoefficientSet& coeffs);
CPReport cp_condition(double d_pp, double d_qq, double gamma, double hbar);

// Choi matrix of the channel exp(t L): C = sum_ij E_ij (x) exp(tL)(E_ij),
// assembled from the matrix exponential of the superoperator.  C is positive
// semidefinite for every t >= 0 exactly when the generator is a Lindblad
// generator.  Guarded to dim <= 8 (C has dim^4 entries).
Eigen::MatrixXcd choi_matrix(const GeneratorSpec& spec, double t);

// Smallest eigenvalue of the Hermitised Choi matrix.
double choi_min_eigenvalue(const Eigen::MatrixXcd& choi);

// Population in the top ceil(fraction * dim) levels.  The integrator aborts
// a run once this exceeds 1e-3 with fraction 0.1: from there on the
// truncated dynamics no longer represents the open system.
double truncation_health(const OperatorMatrix& rho, double fraction = 0.1);

}  // namespace cpqbm
