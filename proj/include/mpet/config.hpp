#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mpet/bench.hpp"
#include "mpet/splitsolve.hpp"

namespace mpet {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SolverChoice { FixedStress, MinRes, Both };

struct RunConfig {
  std::string benchmark = "barenblatt"; // barenblatt | mpet4 | custom
  int N = 16;
  SolverChoice solver = SolverChoice::Both;
  UnitMode units = UnitMode::Si;
  LMode L_mode = LMode::Paper;
  double cK2 = 1.0;     // L_mode = theory
  double L_value = 0.1; // L_mode = explicit
  double eta = 4.0;
  double tau = 1.0;
  double reduction = 1e8;
  double lambda_scale = 1.0;
  double K1_scale = 1.0, K2_scale = 1.0; // barenblatt
  double K_scale = 1.0, K3_scale = 1.0;  // mpet4
  double beta = 5e-10;                   // barenblatt transfer choice
  InnerSolver inner = InnerSolver::Direct;
  double inner_tol = 1e-12;
  std::string out;
  std::optional<PhysicalParams> custom;

  void validate() const; // throws ConfigError
  PhysicalParams physical_params() const;
  RescaledModel rescaled_model() const;
  BoundarySpec boundary_spec() const;
};

// Line-based `key = value` text with optional `[run]` / `[network i]`
// section headers; '#' starts a comment. Unknown keys are rejected with
// their line number.
RunConfig parse_config(std::istream &in);
RunConfig parse_config_file(const std::string &path);

void emit_config(const RunConfig &config, std::ostream &os);

struct SolverRecord {
  std::string name; // fixed_stress | minres
  int iterations = 0;
  bool converged = false;
  double final_ratio = 0.0; // residual_history.back() / front()
  double seconds = 0.0;
  std::vector<double> history;
};

struct RunReport {
  RunConfig config;
  int dof_total = 0, dof_u = 0, dof_v = 0, dof_p = 0;
  std::vector<SolverRecord> results;
};

// One structured record per run; timings live in a dedicated `seconds`
// key so byte-comparisons of reports can ignore that single line.
void emit_report(const RunReport &report, std::ostream &os);
RunReport parse_report(std::istream &in);

// Executes the configured benchmark and returns the report.
RunReport execute_run(const RunConfig &config);

} // namespace mpet
