#pragma once

// Transport coefficients of the collisional Brownian-motion master equation.
//
// The momentum-diffusion coefficient is a thermal average over gas collisions,
//
//   D_pp = (2/3) (pi^2 m^2 / (beta hbar)) n lambda_m^3
//          * Integral d^3q |t(q)|^2 q exp(-beta q^2 / (8 m)),
//
// with m the gas-particle mass, beta the gas inverse temperature, n the gas
// number density and lambda_m = sqrt(2 pi hbar^2 beta / m) the gas thermal
// wavelength.  |t(q)|^2 is the squared modulus of the two-body transition
// matrix element as a function of momentum transfer q.  The integral is
// spherically symmetric, so it reduces to 4 pi Int_0^inf q^3 |t(q)|^2
// exp(-c q^2) dq with c = beta / (8 m), evaluated by Gauss-Legendre
// quadrature with node doubling.
//
// The remaining coefficients are fixed by the fluctuation-dissipation
// structure of the equation (M is the tracked particle's mass):
//
//   D_qq  = (beta hbar / (4 M))^2 D_pp
//   gamma = (beta / (2 M)) D_pp
//
// which saturates the complete-positivity inequality
// D_pp D_qq >= (hbar gamma / 2)^2 identically.

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cpqbm {

// Homogeneous background gas in thermal equilibrium.  Program units use
// hbar = k_B = 1 by default; hbar is kept explicit so scaling behaviour can
// be exercised directly.
struct GasParameters {
  double m = 0.0;     // gas particle mass
  double beta = 0.0;  // inverse temperature
  double n = 0.0;     // number density
  double hbar = 1.0;

  void validate() const;
};

// |t(q)|^2 models.  Constant and Gaussian admit closed-form coefficients
// (used as quadrature oracles); Tabulated interpolates measured samples.
struct TMatrixConstant {
  double t0 = 0.0;  // |t(q)| = t0
};

struct TMatrixGaussian {
  double t0 = 0.0;
  double sigma = 0.0;  // |t(q)|^2 = t0^2 exp(-sigma^2 q^2)
};

// Monotone (Fritsch-Carlson) piecewise-cubic interpolant of sampled
// |t(q)|^2 values.  Monotone Hermite slopes keep the interpolant inside the
// local data range, so non-negative samples can never produce a negative
// cross-section.  Below the first sample the value is clamped to the first
// sample; beyond the last sample the cross-section is treated as zero.
class TabulatedCrossSection {
 public:
  TabulatedCrossSection(std::vector<double> q, std::vector<double> t2);

  double operator()(double q) const;
  double max_q() const { return q_.back(); }
  std::size_t size() const { return q_.size(); }

 private:
  std::vector<double> q_, t2_, slope_;
};

using TMatrixModel =
    std::variant<TMatrixConstant, TMatrixGaussian, TabulatedCrossSection>;

void validate_tmatrix(const TMatrixModel& model);
double tmatrix_squared(const TMatrixModel& model, double q);
std::string tmatrix_describe(const TMatrixModel& model);

// Two-column whitespace-separated text file (q, |t(q)|^2); '#' starts a
// comment.  Throws std::runtime_error with a line number on malformed input.
TabulatedCrossSection load_tmatrix_table(const std::string& path);

struct QuadratureConfig {
  int initial_nodes = 32;
  int max_nodes = 4096;
  double target_rel = 1e-8;  // node doubling stops here
  double fail_rel = 1e-6;    // exceeding this after max_nodes is an error
  double cutoff_sigmas = 8.0;  // q_max = cutoff_sigmas * sqrt(8 m / beta)
};

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Where a coefficient set came from, carried along for reporting.
struct CoefficientProvenance {
  GasParameters gas;
  double particle_mass = 0.0;
  std::string tmatrix;
};

struct CoefficientSet {
  double d_pp = 0.0;     // momentum diffusion
  double d_qq = 0.0;     // position diffusion
  double gamma = 0.0;    // friction
  double v_shift = 0.0;  // mean-field potential shift (c-number)
  double alpha = 0.0;    // mass ratio m / M
  double hbar = 1.0;
  CoefficientProvenance provenance;
};

// Thermal de Broglie wavelength of a gas particle, sqrt(2 pi hbar^2 beta/m).
double thermal_wavelength_gas(const GasParameters& gas);
// Thermal coherence length of the tracked particle, sqrt(hbar^2 beta / M).
// Note the deliberate absence of the 2 pi: this is the length that appears
// in the dissipative generator, and it is a different convention from the
// gas wavelength above.
double thermal_wavelength_particle(double particle_mass, double beta,
                                   double hbar = 1.0);

// Momentum diffusion coefficient by adaptive-order Gauss-Legendre quadrature.
// Throws QuadratureError if node doubling cannot reach fail_rel, or if a
// tabulated cross-section ends before the Boltzmann factor has decayed to
// 1e-12 of its peak.
double compute_dpp(const GasParameters& gas, const TMatrixModel& model,
                   const QuadratureConfig& quad = {});

// Everything downstream of D_pp.  f_re0 is the real part of the forward
// scattering amplitude entering the mean-field shift
// v_shift = -2 pi hbar^2 n f_re0 / m.
CoefficientSet derive_coefficients(double d_pp, const GasParameters& gas,
                                   double particle_mass,
                                   const TMatrixModel& model,
                                   double f_re0 = 0.0);

double mean_field_shift(const GasParameters& gas, double f_re0);

// The generator is derived in the Brownian limit alpha = m/M << 1.
enum class BrownianStatus { Ok, Warn, Fail };

struct BrownianReport {
  double alpha = 0.0;
  BrownianStatus status = BrownianStatus::Ok;
  std::string to_text() const;
};

// Ok for alpha <= 0.1, Warn up to 0.5, Fail beyond.
BrownianReport check_brownian_limit(const GasParameters& gas,
                                    double particle_mass);

}  // namespace cpqbm
