#include "cpqbm/gaussian.hpp"

#include <cmath>
#include <stdexcept>

#include "cpqbm/linalg.hpp"

namespace cpqbm {

namespace {

double trap_omega(const HamiltonianSpec& ham) {
  ham.validate();
  return ham.kind == HamiltonianSpec::Kind::Harmonic ? ham.omega : 0.0;
}

}  // namespace

GaussianState moment_rhs(const GaussianState& s, const CoefficientSet& coeffs,
                         const HamiltonianSpec& ham, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("moment_rhs: mass must be > 0");
  const double w = trap_omega(ham);
  const double g = coeffs.gamma;
  GaussianState d;
  d.mean_x = s.mean_p / mass;
  d.mean_p = -mass * w * w * s.mean_x - 2.0 * g * s.mean_p;
  d.var_x = 2.0 * s.cov_xp / mass + 2.0 * coeffs.d_qq;
  d.var_p = -2.0 * mass * w * w * s.cov_xp - 4.0 * g * s.var_p + 2.0 * coeffs.d_pp;
  d.cov_xp = s.var_p / mass - mass * w * w * s.var_x - 2.0 * g * s.cov_xp;
  return d;
}

std::vector<GaussianState> propagate_moments(const GaussianState& s0,
                                             const CoefficientSet& coeffs,
                                             const HamiltonianSpec& ham,
                                             double mass,
                                             std::span<const double> times) {
  if (!(mass > 0.0))
    throw std::invalid_argument("propagate_moments: mass must be > 0");
  const double w = trap_omega(ham);
  const double g = coeffs.gamma;

  // Means: u' = A u.  Central second moments: v' = B v + b, solved through
  // the augmented homogeneous system [[B, b], [0, 0]].
  Eigen::Matrix2d a;
  a << 0.0, 1.0 / mass, -mass * w * w, -2.0 * g;
  Eigen::Matrix4d aug = Eigen::Matrix4d::Zero();
  aug(0, 2) = 2.0 / mass;
  aug(0, 3) = 2.0 * coeffs.d_qq;
  aug(1, 1) = -4.0 * g;
  aug(1, 2) = -2.0 * mass * w * w;
  aug(1, 3) = 2.0 * coeffs.d_pp;
  aug(2, 0) = -mass * w * w;
  aug(2, 1) = 1.0 / mass;
  aug(2, 2) = -2.0 * g;

  std::vector<GaussianState> out;
  out.reserve(times.size());
  const Eigen::Vector2d u0(s0.mean_x, s0.mean_p);
  const Eigen::Vector4d v0(s0.var_x, s0.var_p, s0.cov_xp, 1.0);
  for (const double t : times) {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument("propagate_moments: times must be >= 0");
    const Eigen::Matrix2d ea =
        expm(Eigen::MatrixXcd(a.cast<Complex>() * t)).real();
    const Eigen::Matrix4d eb =
        expm(Eigen::MatrixXcd(aug.cast<Complex>() * t)).real();
    const Eigen::Vector2d u = ea * u0;
    const Eigen::Vector4d v = eb * v0;
    GaussianState s;
    s.mean_x = u(0);
    s.mean_p = u(1);
    s.var_x = v(0);
    s.var_p = v(1);
    s.cov_xp = v(2);
    out.push_back(s);
  }
  return out;
}

StationaryResult stationary_moments(const CoefficientSet& coeffs,
                                    const HamiltonianSpec& ham, double mass) {
  if (!(mass > 0.0))
    throw std::invalid_argument("stationary_moments: mass must be > 0");
  const double w = trap_omega(ham);
  const double g = coeffs.gamma;
  StationaryResult r;
  if (!(g > 0.0)) return r;  // no friction, nothing relaxes

  r.mean_p = 0.0;
  if (w > 0.0) {
    r.mean_x = 0.0;
    const double cov = -mass * coeffs.d_qq;
    const double vp = (coeffs.d_pp + mass * mass * w * w * coeffs.d_qq) / (2.0 * g);
    r.cov_xp = cov;
    r.var_p = vp;
    r.var_x = vp / (mass * mass * w * w) + 2.0 * g * coeffs.d_qq / (w * w);
  } else {
    // Free particle: momentum thermalises, position diffuses forever.
    const double vp = coeffs.d_pp / (2.0 * g);
    r.var_p = vp;
    r.cov_xp = vp / (2.0 * g * mass);
  }
  return r;
}

}  // namespace cpqbm
