#pragma once

// Scenario configs and the run / compare drivers behind the CLI.
//
// Config files are flat `section.key = value` lines with `#` comments.  A
// scenario starts at each `scenario.name = ...` line; one file may hold
// several scenarios.  Parsing returns every problem it finds (line, key,
// reason) instead of stopping at the first.

#include <optional>
#include <string>
#include <vector>

#include "cpqbm/basis.hpp"
#include "cpqbm/coefficients.hpp"
#include "cpqbm/diagnostics.hpp"
#include "cpqbm/gaussian.hpp"
#include "cpqbm/integrator.hpp"
#include "cpqbm/master_equation.hpp"

namespace cpqbm {

struct InitialStateSpec {
  enum class Kind { Fock, Coherent, Thermal } kind = Kind::Fock;
  int fock_n = 0;
  Complex alpha = 0.0;
  double beta_eff = 0.0;  // thermal; defaults to the gas temperature
};

struct OutputSpec {
  std::string csv_name;   // default <name>.csv
  std::string json_name;  // default <name>.json
  bool print_report = true;
  bool scan_choi = false;  // Choi spectrum scan at t in {0.1,0.5,1,2}/gamma
};

struct Scenario {
  std::string name;
  GasParameters gas;
  double particle_mass = 0.0;
  TMatrixModel tmatrix = TMatrixConstant{};
  double f_re0 = 0.0;
  GeneratorForm form = GeneratorForm::Qbm4;
  HamiltonianSpec hamiltonian;
  BasisConfig basis;  // mass/hbar filled from particle/gas during parsing
  InitialStateSpec initial;
  IntegratorConfig integrator;
  OutputSpec outputs;
};

struct ConfigError {
  int line = 0;
  std::string key;
  std::string reason;
};

struct ParseResult {
  std::vector<Scenario> scenarios;
  std::vector<ConfigError> errors;
  bool ok() const { return errors.empty(); }
};

// base_dir resolves relative tmatrix.file paths (usually the directory of
// the config file).
ParseResult parse_config(const std::string& text,
                         const std::string& base_dir = ".");

struct RunOptions {
  std::string out_dir = ".";
  bool override_brownian_limit = false;
  int jobs = 1;
};

struct RunOutcome {
  std::string name;
  int exit_code = 0;       // 0 ok, 1 config/compute error, 2 physics abort
  std::string status;      // "ok" | "error" | "brownian_fail" | "truncation_overflow"
  std::string message;     // human-readable detail on failure
  std::vector<std::string> warnings;

  CoefficientSet coefficients;  // as used by the generator
  BrownianReport brownian;
  CPReport cp_report;
  std::optional<TrajectoryRecord> trajectory;
  // Largest relative deviation from the Gaussian moment oracle over the
  // whole run, per moment and overall (see README for the scales used).
  std::optional<double> oracle_max_rel_dev;
  std::optional<double> min_eig_overall;
  std::optional<double> trace_drift_max;
  std::optional<StationaryResult> stationary;

  double wall_time_s = 0.0;
  std::string csv_path;   // empty if not written
  std::string json_path;

  std::string to_text() const;  // short human-readable block
};

RunOutcome run_scenario(const Scenario& sc, const RunOptions& opts);

// Runs every scenario (in parallel up to opts.jobs), preserving input order
// in the returned vector.
std::vector<RunOutcome> run_all(const std::vector<Scenario>& scenarios,
                                const RunOptions& opts);

struct ComparisonResult {
  std::vector<RunOutcome> outcomes;
  std::string table_text;
  int exit_code = 0;
  std::string error;  // non-empty if the scenarios are not comparable
};

// Requires all scenarios to share gas, particle mass and basis; reports a
// coefficient table plus observable/final-state agreement against the first
// scenario when the recording grids coincide.
ComparisonResult compare_mode(const std::vector<Scenario>& scenarios,
                              const RunOptions& opts);

// Combined process exit code: any config/compute error wins over a physics
// abort, which wins over success.
int combined_exit_code(const std::vector<RunOutcome>& outcomes);

}  // namespace cpqbm
