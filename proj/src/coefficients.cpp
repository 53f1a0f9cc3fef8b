#include "cpqbm/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace cpqbm {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence; accurate to roundoff for the orders used here.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Int_0^qmax q^3 |t(q)|^2 exp(-c q^2) dq at fixed node count.
double radial_integral(const TMatrixModel& model, double c, double qmax,
                       int nodes) {
  std::vector<double> x, w;
  gauss_legendre(nodes, x, w);
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double q = 0.5 * qmax * (x[i] + 1.0);
    const double wq = 0.5 * qmax * w[i];
    sum += wq * q * q * q * tmatrix_squared(model, q) * std::exp(-c * q * q);
  }
  return sum;
}

double require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive");
  return v;
}

}  // namespace

void GasParameters::validate() const {
  require_positive(m, "GasParameters: m");
  require_positive(beta, "GasParameters: beta");
  require_positive(n, "GasParameters: n");
  require_positive(hbar, "GasParameters: hbar");
}

TabulatedCrossSection::TabulatedCrossSection(std::vector<double> q,
                                             std::vector<double> t2)
    : q_(std::move(q)), t2_(std::move(t2)) {
  if (q_.size() != t2_.size())
    throw std::invalid_argument("tabulated |t|^2: column length mismatch");
  if (q_.size() < 4)
    throw std::invalid_argument("tabulated |t|^2: need at least 4 samples");
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (!std::isfinite(q_[i]) || !std::isfinite(t2_[i]))
      throw std::invalid_argument("tabulated |t|^2: non-finite sample");
    if (t2_[i] < 0.0)
      throw std::invalid_argument("tabulated |t|^2: negative sample");
    if (i > 0 && !(q_[i] > q_[i - 1]))
      throw std::invalid_argument("tabulated |t|^2: q must increase strictly");
  }
  if (q_.front() < 0.0)
    throw std::invalid_argument("tabulated |t|^2: q must be non-negative");

  // Fritsch-Carlson monotone slopes: zero at local extrema, otherwise a
  // weighted harmonic mean of adjacent secants.  This keeps every cubic
  // piece inside the range spanned by its endpoint samples.
  const std::size_t n = q_.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = q_[i + 1] - q_[i];
    delta[i] = (t2_[i + 1] - t2_[i]) / h[i];
  }
  slope_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      slope_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0)
      d = 0.0;
    else if (d0 * d1 < 0.0 && std::abs(d) > 3.0 * std::abs(d0))
      d = 3.0 * d0;
    return d;
  };
  slope_.front() = endpoint(h[0], h[1], delta[0], delta[1]);
  slope_.back() = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double TabulatedCrossSection::operator()(double q) const {
  if (q <= q_.front()) return t2_.front();  // clamp below the first sample
  if (q >= q_.back())                       // no data beyond, no scattering
    return q == q_.back() ? t2_.back() : 0.0;
  const auto it = std::upper_bound(q_.begin(), q_.end(), q);
  const std::size_t k = static_cast<std::size_t>(it - q_.begin()) - 1;
  const double h = q_[k + 1] - q_[k];
  const double t = (q - q_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * t2_[k] +
         (t3 - 2.0 * t2 + t) * h * slope_[k] +
         (-2.0 * t3 + 3.0 * t2) * t2_[k + 1] + (t3 - t2) * h * slope_[k + 1];
}

void validate_tmatrix(const TMatrixModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TMatrixConstant>) {
          if (!(m.t0 >= 0.0) || !std::isfinite(m.t0))
            throw std::invalid_argument("constant |t|^2: t0 must be >= 0");
        } else if constexpr (std::is_same_v<T, TMatrixGaussian>) {
          if (!(m.t0 >= 0.0) || !std::isfinite(m.t0))
            throw std::invalid_argument("gaussian |t|^2: t0 must be >= 0");
          if (!(m.sigma > 0.0) || !std::isfinite(m.sigma))
            throw std::invalid_argument("gaussian |t|^2: sigma must be > 0");
        }
        // TabulatedCrossSection validates in its constructor.
      },
      model);
}

double tmatrix_squared(const TMatrixModel& model, double q) {
  return std::visit(
      [q](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TMatrixConstant>) {
          return m.t0 * m.t0;
        } else if constexpr (std::is_same_v<T, TMatrixGaussian>) {
          return m.t0 * m.t0 * std::exp(-m.sigma * m.sigma * q * q);
        } else {
          return m(q);
        }
      },
      model);
}

std::string tmatrix_describe(const TMatrixModel& model) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TMatrixConstant>) {
          os << "constant, t0 = " << m.t0;
        } else if constexpr (std::is_same_v<T, TMatrixGaussian>) {
          os << "gaussian, t0 = " << m.t0 << ", sigma = " << m.sigma;
        } else {
          os << "tabulated, " << m.size() << " samples on [0, " << m.max_q()
             << "]";
        }
      },
      model);
  return os.str();
}

TabulatedCrossSection load_tmatrix_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open |t|^2 table: " + path);
  std::vector<double> q, t2;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    double a = 0.0, b = 0.0;
    if (!(is >> a)) continue;  // blank or comment-only line
    if (!(is >> b))
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected two columns (q, |t|^2)");
    double extra = 0.0;
    if (is >> extra)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected exactly two columns");
    q.push_back(a);
    t2.push_back(b);
  }
  try {
    return TabulatedCrossSection(std::move(q), std::move(t2));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

double thermal_wavelength_gas(const GasParameters& gas) {
  gas.validate();
  return std::sqrt(2.0 * std::numbers::pi * gas.hbar * gas.hbar * gas.beta /
                   gas.m);
}

double thermal_wavelength_particle(double particle_mass, double beta,
                                   double hbar) {
  require_positive(particle_mass, "thermal_wavelength_particle: mass");
  require_positive(beta, "thermal_wavelength_particle: beta");
  require_positive(hbar, "thermal_wavelength_particle: hbar");
  return hbar * std::sqrt(beta / particle_mass);
}

double compute_dpp(const GasParameters& gas, const TMatrixModel& model,
                   const QuadratureConfig& quad) {
  gas.validate();
  validate_tmatrix(model);
  if (quad.initial_nodes < 2 || quad.max_nodes < quad.initial_nodes)
    throw std::invalid_argument("compute_dpp: bad quadrature node counts");

  const double c = gas.beta / (8.0 * gas.m);
  double qmax = quad.cutoff_sigmas / std::sqrt(c);

  if (const auto* tab = std::get_if<TabulatedCrossSection>(&model)) {
    // Beyond the table the cross-section is treated as zero, which is only
    // safe once the Boltzmann factor has decayed to spec (1e-12 of peak).
    const double q_needed = std::sqrt(std::log(1e12) / c);
    if (tab->max_q() < q_needed) {
      std::ostringstream os;
      os << "tabulated |t|^2 ends at q = " << tab->max_q()
         << " but thermal weighting requires coverage to q = " << q_needed
         << " (beta = " << gas.beta << ", m = " << gas.m << ")";
      throw QuadratureError(os.str());
    }
    qmax = std::min(qmax, tab->max_q());
  }

  double prev = radial_integral(model, c, qmax, quad.initial_nodes);
  double integral = prev;
  double rel_change = std::numeric_limits<double>::infinity();
  for (int n = 2 * quad.initial_nodes; n <= quad.max_nodes; n *= 2) {
    integral = radial_integral(model, c, qmax, n);
    rel_change = std::abs(integral - prev) /
                 std::max(std::abs(integral), std::numeric_limits<double>::min());
    if (rel_change <= quad.target_rel) break;
    prev = integral;
  }
  if (rel_change > quad.fail_rel) {
    std::ostringstream os;
    os << "momentum-diffusion quadrature did not converge: relative change "
       << rel_change << " after " << quad.max_nodes << " nodes (target "
       << quad.fail_rel << ")";
    throw QuadratureError(os.str());
  }

  const double lambda = thermal_wavelength_gas(gas);
  const double pref = (2.0 / 3.0) * std::numbers::pi * std::numbers::pi *
                      gas.m * gas.m / (gas.beta * gas.hbar) * gas.n *
                      lambda * lambda * lambda;
  return pref * 4.0 * std::numbers::pi * integral;
}

CoefficientSet derive_coefficients(double d_pp, const GasParameters& gas,
                                   double particle_mass,
                                   const TMatrixModel& model, double f_re0) {
  gas.validate();
  require_positive(particle_mass, "derive_coefficients: particle mass");
  if (!(d_pp >= 0.0) || !std::isfinite(d_pp))
    throw std::invalid_argument("derive_coefficients: d_pp must be >= 0");

  CoefficientSet cs;
  cs.d_pp = d_pp;
  cs.d_qq = std::pow(gas.beta * gas.hbar / (4.0 * particle_mass), 2) * d_pp;
  cs.gamma = gas.beta / (2.0 * particle_mass) * d_pp;
  cs.v_shift = mean_field_shift(gas, f_re0);
  cs.alpha = gas.m / particle_mass;
  cs.hbar = gas.hbar;
  cs.provenance = {gas, particle_mass, tmatrix_describe(model)};
  return cs;
}

double mean_field_shift(const GasParameters& gas, double f_re0) {
  gas.validate();
  if (!std::isfinite(f_re0))
    throw std::invalid_argument("mean_field_shift: f_re0 must be finite");
  return -2.0 * std::numbers::pi * gas.hbar * gas.hbar * gas.n * f_re0 /
         gas.m;
}

std::string BrownianReport::to_text() const {
  std::ostringstream os;
  os << "mass ratio alpha = m/M = " << alpha << ": ";
  switch (status) {
    case BrownianStatus::Ok:
      os << "OK (Brownian limit holds)";
      break;
    case BrownianStatus::Warn:
      os << "WARN (alpha > 0.1; derived coefficients are marginal)";
      break;
    case BrownianStatus::Fail:
      os << "FAIL (alpha > 0.5; outside the Brownian regime)";
      break;
  }
  return os.str();
}

BrownianReport check_brownian_limit(const GasParameters& gas,
                                    double particle_mass) {
  gas.validate();
  require_positive(particle_mass, "check_brownian_limit: particle mass");
  BrownianReport r;
  r.alpha = gas.m / particle_mass;
  if (r.alpha <= 0.1)
    r.status = BrownianStatus::Ok;
  else if (r.alpha <= 0.5)
    r.status = BrownianStatus::Warn;
  else
    r.status = BrownianStatus::Fail;
  return r;
}

}  // namespace cpqbm
