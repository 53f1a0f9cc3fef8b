// Command-line front end: `cpqbm run <config>` evolves every scenario in the
// config and writes trajectory CSVs plus JSON run summaries; `cpqbm compare
// <config>` additionally requires the scenarios to share their physical
// setting and prints a side-by-side coefficient/agreement table.
//
// Exit codes: 0 success, 1 config or compute error, 2 physics abort
// (truncation overflow while integrating).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cpqbm/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int load_scenarios(const std::string& config_path,
                   std::vector<cpqbm::Scenario>& scenarios) {
  std::string text;
  try {
    text = read_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  const std::string base_dir =
      std::filesystem::path(config_path).parent_path().string();
  const cpqbm::ParseResult parsed =
      cpqbm::parse_config(text, base_dir.empty() ? "." : base_dir);
  if (!parsed.ok()) {
    for (const cpqbm::ConfigError& e : parsed.errors) {
      std::cerr << config_path << ":" << e.line << ": ";
      if (!e.key.empty()) std::cerr << e.key << ": ";
      std::cerr << e.reason << "\n";
    }
    return 1;
  }
  if (parsed.scenarios.empty()) {
    std::cerr << config_path << ": no scenarios defined\n";
    return 1;
  }
  scenarios = parsed.scenarios;
  return 0;
}

void print_outcomes(const std::vector<cpqbm::Scenario>& scenarios,
                    const std::vector<cpqbm::RunOutcome>& outcomes) {
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    std::cout << outcomes[i].to_text();
    if (scenarios[i].outputs.print_report && outcomes[i].status != "error" &&
        outcomes[i].status != "brownian_fail")
      std::cout << outcomes[i].cp_report.to_text(outcomes[i].name);
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"completely positive quantum Brownian motion toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  cpqbm::RunOptions opts;
  if (const char* env = std::getenv("CPQBM_OUT_DIR")) opts.out_dir = env;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "scenario config file")->required();
    cmd->add_option("--jobs", opts.jobs, "scenarios to run in parallel")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out-dir", opts.out_dir,
                    "output directory (default: $CPQBM_OUT_DIR or .)");
    cmd->add_flag("--override-brownian-limit", opts.override_brownian_limit,
                  "run even when the mass ratio leaves the Brownian regime");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "evolve each scenario");
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run scenarios side by side");
  add_common(run_cmd);
  add_common(compare_cmd);

  CLI11_PARSE(app, argc, argv);

  std::vector<cpqbm::Scenario> scenarios;
  if (const int rc = load_scenarios(config_path, scenarios); rc != 0) return rc;

  if (run_cmd->parsed()) {
    const std::vector<cpqbm::RunOutcome> outcomes =
        cpqbm::run_all(scenarios, opts);
    print_outcomes(scenarios, outcomes);
    return cpqbm::combined_exit_code(outcomes);
  }

  const cpqbm::ComparisonResult cmp = cpqbm::compare_mode(scenarios, opts);
  if (!cmp.error.empty()) {
    std::cerr << cmp.error << "\n";
    return cmp.exit_code;
  }
  print_outcomes(scenarios, cmp.outcomes);
  std::cout << cmp.table_text;
  return cmp.exit_code;
}
