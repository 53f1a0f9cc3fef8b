#pragma once

// Fixed-step and step-doubling adaptive RK4 propagation of the density
// matrix, recording physical observables on a fixed time grid.
//
// Both modes record at exactly the same times (multiples of
// record_every * dt, plus t_end), so fixed and adaptive trajectories of the
// same scenario can be compared row by row.  The trace is never renormalised:
// trace drift is reported as an accuracy diagnostic instead of being hidden.

#include <functional>
#include <stdexcept>
#include <vector>

#include "cpqbm/basis.hpp"
#include "cpqbm/master_equation.hpp"

namespace cpqbm {

struct IntegratorConfig {
  double dt = 0.01;    // fixed step / adaptive initial step and grid unit
  double t_end = 1.0;
  enum class Mode { Fixed, Adaptive } mode = Mode::Fixed;
  double rel_tol = 1e-8;   // adaptive only; must lie in (1e-14, 1e-2)
  double abs_tol = 1e-10;  // adaptive only; same range
  int record_every = 1;    // record at multiples of record_every * dt
  enum class Hermitize { Off, EachStep } hermitize = Hermitize::Off;

  void validate() const;
};

struct ObservableRow {
  double mean_x = 0.0, mean_p = 0.0;
  double var_x = 0.0, var_p = 0.0, cov_xp = 0.0;
  double energy = 0.0, purity = 0.0;
  double trace_drift = 0.0;        // |Tr rho - 1|
  double min_eig = 0.0;            // of the Hermitised state
  double truncation_health = 0.0;  // population in the top 10% of levels
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<ObservableRow> rows;
  OperatorMatrix final_state;
  long long steps_accepted = 0;
  long long steps_rejected = 0;
};

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Population escaped into the truncation edge; the run is physically invalid
// from `time` on.
struct TruncationOverflow : IntegrationError {
  TruncationOverflow(const std::string& msg, double t, double h)
      : IntegrationError(msg), time(t), health(h) {}
  double time, health;
};
struct NonFiniteState : IntegrationError {
  using IntegrationError::IntegrationError;
};
struct StepUnderflow : IntegrationError {
  using IntegrationError::IntegrationError;
};

// Population fraction monitored / abort threshold for truncation health.
inline constexpr double kHealthFraction = 0.1;
inline constexpr double kHealthAbort = 1e-3;

using RhsFn = std::function<OperatorMatrix(const OperatorMatrix&)>;

// One classical RK4 step.  With Hermitize::EachStep the result is replaced
// by its Hermitian part (an optional guard against the slow accumulation of
// antihermitian roundoff; off by default).
OperatorMatrix step_rk4(const RhsFn& rhs, const OperatorMatrix& rho, double dt,
                        IntegratorConfig::Hermitize hermitize =
                            IntegratorConfig::Hermitize::Off);

TrajectoryRecord integrate(const GeneratorSpec& spec, const DensityMatrix& rho0,
                           const IntegratorConfig& cfg);

// Observables of a single state, as recorded in a trajectory row.
ObservableRow observe(const GeneratorSpec& spec, const OperatorMatrix& rho);

}  // namespace cpqbm
