#pragma once

#include "mpet/config.hpp"

namespace mpet {

struct SweepCell {
  int N = 0;
  double beta = 0.0, K1_scale = 1.0, K2_scale = 1.0; // barenblatt grids
  double lambda_scale = 1.0, K_scale = 1.0, K3_scale = 1.0;
  int fs_iters = -1, minres_iters = -1;
  bool fs_converged = false, minres_converged = false;
  double fs_final_ratio = 0.0, minres_final_ratio = 0.0;
  double seconds = 0.0;
  std::string error;
};

struct SweepResult {
  std::string table;       // T2 | T3 | T4 | T7
  std::string benchmark;   // barenblatt | mpet4
  SolverChoice solver = SolverChoice::Both;
  std::vector<SweepCell> cells;
};

// Runs the full published grid of the named table. Individual cell
// failures are recorded and the sweep continues; rows appear in
// deterministic grid order. `mesh_override` replaces the h grid.
SweepResult run_table_sweep(const std::string &table, const RunConfig &base,
                            const std::vector<int> &mesh_override = {},
                            std::ostream *progress = nullptr);

void write_sweep_csv(const SweepResult &sweep, std::ostream &os);
void write_sweep_timings_csv(const SweepResult &sweep, std::ostream &os);
void write_sweep_text(const SweepResult &sweep, std::ostream &os);

} // namespace mpet
