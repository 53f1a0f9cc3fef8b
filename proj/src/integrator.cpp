#include "cpqbm/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpqbm/diagnostics.hpp"
#include "cpqbm/linalg.hpp"

namespace cpqbm {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("IntegratorConfig: dt must be positive");
  if (!(t_end > dt) || !std::isfinite(t_end))
    throw std::invalid_argument("IntegratorConfig: t_end must exceed dt");
  if (record_every < 1)
    throw std::invalid_argument("IntegratorConfig: record_every must be >= 1");
  if (mode == Mode::Adaptive) {
    for (double tol : {rel_tol, abs_tol})
      if (!(tol > 1e-14) || !(tol < 1e-2))
        throw std::invalid_argument(
            "IntegratorConfig: adaptive tolerances must lie in (1e-14, 1e-2)");
  }
}

OperatorMatrix step_rk4(const RhsFn& rhs, const OperatorMatrix& rho, double dt,
                        IntegratorConfig::Hermitize hermitize) {
  const OperatorMatrix k1 = rhs(rho);
  const OperatorMatrix k2 = rhs(rho + 0.5 * dt * k1);
  const OperatorMatrix k3 = rhs(rho + 0.5 * dt * k2);
  const OperatorMatrix k4 = rhs(rho + dt * k3);
  OperatorMatrix out = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (hermitize == IntegratorConfig::Hermitize::EachStep) out = cpqbm::hermitize(out);
  return out;
}

ObservableRow observe(const GeneratorSpec& spec, const OperatorMatrix& rho) {
  ObservableRow row;
  const Complex ex = expectation(rho, spec.position());
  const Complex ep = expectation(rho, spec.momentum());
  const Complex ex2 = expectation(rho, spec.position_sq());
  const Complex ep2 = expectation(rho, spec.momentum_sq());
  const Complex exp_sym = expectation(rho, spec.xp_anticommutator());
  row.mean_x = ex.real();
  row.mean_p = ep.real();
  row.var_x = ex2.real() - row.mean_x * row.mean_x;
  row.var_p = ep2.real() - row.mean_p * row.mean_p;
  row.cov_xp = 0.5 * exp_sym.real() - row.mean_x * row.mean_p;
  row.energy = expectation(rho, spec.hamiltonian()).real();
  row.purity = purity(rho);
  row.trace_drift = std::abs(rho.trace() - Complex(1.0, 0.0));
  row.min_eig = min_eigenvalue(rho);
  row.truncation_health = truncation_health(rho, kHealthFraction);
  return row;
}

namespace {

void check_state(const OperatorMatrix& rho, double t) {
  if (!rho.allFinite()) {
    std::ostringstream os;
    os << "state became non-finite at t = " << t;
    throw NonFiniteState(os.str());
  }
  const double health = truncation_health(rho, kHealthFraction);
  if (health > kHealthAbort) {
    std::ostringstream os;
    os << "truncation overflow at t = " << t << ": population " << health
       << " in the top " << kHealthFraction * 100
       << "% of levels exceeds " << kHealthAbort
       << " (increase basis dim or shorten the run)";
    throw TruncationOverflow(os.str(), t, health);
  }
}

}  // namespace

TrajectoryRecord integrate(const GeneratorSpec& spec, const DensityMatrix& rho0,
                           const IntegratorConfig& cfg) {
  cfg.validate();
  if (rho0.dim() != spec.basis().dim)
    throw std::invalid_argument("integrate: state and generator dimension differ");

  const RhsFn rhs = [&spec](const OperatorMatrix& r) { return spec.apply(r); };

  // Recording grid: multiples of record_every * dt, closed with t_end.
  const double rec_dt = cfg.record_every * cfg.dt;
  std::vector<double> targets;
  for (long long k = 1;
       k * rec_dt < cfg.t_end - 1e-12 * std::max(1.0, cfg.t_end); ++k)
    targets.push_back(k * rec_dt);
  targets.push_back(cfg.t_end);

  TrajectoryRecord rec;
  OperatorMatrix rho = rho0.mat();
  check_state(rho, 0.0);
  rec.times.push_back(0.0);
  rec.rows.push_back(observe(spec, rho));

  const double h_min = cfg.dt / 1000.0;
  const double h_max = cfg.dt * 100.0;
  double h_prop = cfg.dt;  // adaptive step proposal, carried across targets

  double t = 0.0;
  for (const double target : targets) {
    while (t < target - 1e-12 * std::max(1.0, target)) {
      const double remaining = target - t;
      if (cfg.mode == IntegratorConfig::Mode::Fixed) {
        const double h = std::min(cfg.dt, remaining);
        rho = step_rk4(rhs, rho, h, cfg.hermitize);
        ++rec.steps_accepted;
        t += h;
        check_state(rho, t);
      } else {
        double h = std::min(h_prop, remaining);
        for (;;) {
          const OperatorMatrix full = step_rk4(rhs, rho, h, cfg.hermitize);
          OperatorMatrix half = step_rk4(rhs, rho, 0.5 * h, cfg.hermitize);
          half = step_rk4(rhs, half, 0.5 * h, cfg.hermitize);
          // Richardson: the two-half-step result has error ~ diff / 15.
          const double err = (half - full).norm() / 15.0;
          const double tol = cfg.abs_tol + cfg.rel_tol * half.norm();
          if (err <= tol) {
            rho = half;
            ++rec.steps_accepted;
            t += h;
            check_state(rho, t);
            const double grow =
                (err > 0.0) ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
            h_prop = std::clamp(h * std::clamp(grow, 0.2, 5.0), h_min, h_max);
            break;
          }
          ++rec.steps_rejected;
          const double shrink =
              std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.9);
          h *= shrink;
          if (h < h_min) {
            std::ostringstream os;
            os << "adaptive step fell below dt/1000 = " << h_min << " at t = "
               << t << " without meeting the error tolerance";
            throw StepUnderflow(os.str());
          }
        }
      }
    }
    t = target;  // land exactly on the grid point
    rec.times.push_back(t);
    rec.rows.push_back(observe(spec, rho));
  }

  rec.final_state = std::move(rho);
  return rec;
}

}  // namespace cpqbm
