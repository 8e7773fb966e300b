#include "mpet/tables.hpp"

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace mpet {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct GridSpec {
  std::string benchmark;
  double lambda_scale = 1.0;
  std::vector<int> meshes{16, 32, 64};
  // barenblatt axes
  std::vector<double> betas{5e-10, 1e-8};
  std::vector<double> K1{1e-2, 1e-1, 1.0};
  std::vector<double> K2{1.0, 1e2, 1e4, 1e6};
  // mpet4 axes
  std::vector<double> lambdas{1.0, 1e4, 1e8};
  std::vector<double> K{1e-2, 1.0, 1e2};
  std::vector<double> K3{1e-2, 1.0, 1e2, 1e4, 1e6, 1e10};
};

GridSpec table_grid(const std::string &table) {
  GridSpec grid;
  if (table == "T2") {
    grid.benchmark = "barenblatt";
    grid.lambda_scale = 1.0;
  } else if (table == "T3") {
    grid.benchmark = "barenblatt";
    grid.lambda_scale = 0.01;
  } else if (table == "T4") {
    grid.benchmark = "barenblatt";
    grid.lambda_scale = 100.0;
  } else if (table == "T7") {
    grid.benchmark = "mpet4";
  } else {
    throw ConfigError("unknown table id '" + table + "' (use T2, T3, T4, T7)");
  }
  return grid;
}

void run_cell(const TriMesh &mesh, const RunConfig &config,
              const ElasticityBlocks &elasticity,
              SharedElasticitySolver &bu_solver, SweepCell &cell) {
  const auto start = std::chrono::steady_clock::now();
  try {
    const RescaledModel model = config.rescaled_model();
    const BoundarySpec bc = config.boundary_spec();
    const BlockSystem sys = assemble_full(mesh, model, bc, &elasticity);
    if (!bu_solver && config.inner == InnerSolver::Direct)
      bu_solver = make_elasticity_solver(sys);
    const BlockPreconditioner P(sys, config.inner, config.inner_tol, 200000,
                                bu_solver);
    if (config.solver != SolverChoice::MinRes) {
      FixedStressOptions opts;
      opts.reduction = config.reduction;
      opts.inner = config.inner;
      opts.inner_tol = config.inner_tol;
      opts.mechanics_solver = bu_solver;
      auto [x, iter] = fixed_stress_solve(sys, P, opts);
      (void)x;
      cell.fs_iters = iter.iterations;
      cell.fs_converged = iter.converged;
      cell.fs_final_ratio =
          iter.residual_history.back() /
          std::max(iter.residual_history.front(), 1e-300);
    }
    if (config.solver != SolverChoice::FixedStress) {
      auto [x, iter] = minres_mpet(sys, P, config.reduction);
      (void)x;
      cell.minres_iters = iter.iterations;
      cell.minres_converged = iter.converged;
      cell.minres_final_ratio =
          iter.residual_history.back() /
          std::max(iter.residual_history.front(), 1e-300);
    }
  } catch (const std::exception &ex) {
    cell.error = ex.what();
  }
  cell.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
}

} // namespace

SweepResult run_table_sweep(const std::string &table, const RunConfig &base,
                            const std::vector<int> &mesh_override,
                            std::ostream *progress) {
  GridSpec grid = table_grid(table);
  if (!mesh_override.empty())
    grid.meshes = mesh_override;

  SweepResult sweep;
  sweep.table = table;
  sweep.benchmark = grid.benchmark;
  sweep.solver = base.solver;

  for (int N : grid.meshes) {
    const TriMesh mesh = build_unit_square_mesh(N);
    if (grid.benchmark == "barenblatt") {
      RunConfig config = base;
      config.benchmark = "barenblatt";
      config.N = N;
      config.lambda_scale = grid.lambda_scale;
      // The elasticity block depends only on (mesh, lambda, eta).
      const ElasticityBlocks elasticity = assemble_elasticity(
          mesh, config.rescaled_model().lambda, config.eta,
          config.boundary_spec());
      SharedElasticitySolver bu; // built lazily from the first cell
      for (double beta : grid.betas)
        for (double k1 : grid.K1)
          for (double k2 : grid.K2) {
            config.beta = beta;
            config.K1_scale = k1;
            config.K2_scale = k2;
            SweepCell cell;
            cell.N = N;
            cell.beta = beta;
            cell.K1_scale = k1;
            cell.K2_scale = k2;
            cell.lambda_scale = grid.lambda_scale;
            run_cell(mesh, config, elasticity, bu, cell);
            if (progress)
              (*progress) << table << " N=" << N << " beta=" << beta
                          << " K1=" << k1 << " K2=" << k2
                          << " fs=" << cell.fs_iters
                          << " minres=" << cell.minres_iters
                          << (cell.error.empty() ? "" : " ERROR " + cell.error)
                          << "\n";
            sweep.cells.push_back(std::move(cell));
          }
    } else {
      for (double lam : grid.lambdas) {
        RunConfig config = base;
        config.benchmark = "mpet4";
        config.N = N;
        config.lambda_scale = lam;
        const ElasticityBlocks elasticity = assemble_elasticity(
            mesh, config.rescaled_model().lambda, config.eta,
            config.boundary_spec());
        SharedElasticitySolver bu; // built lazily from the first cell
        for (double k : grid.K)
          for (double k3 : grid.K3) {
            config.K_scale = k;
            config.K3_scale = k3;
            SweepCell cell;
            cell.N = N;
            cell.lambda_scale = lam;
            cell.K_scale = k;
            cell.K3_scale = k3;
            run_cell(mesh, config, elasticity, bu, cell);
            if (progress)
              (*progress) << table << " N=" << N << " lambda=" << lam
                          << " K=" << k << " K3=" << k3
                          << " fs=" << cell.fs_iters
                          << " minres=" << cell.minres_iters
                          << (cell.error.empty() ? "" : " ERROR " + cell.error)
                          << "\n";
            sweep.cells.push_back(std::move(cell));
          }
      }
    }
  }
  return sweep;
}

void write_sweep_csv(const SweepResult &sweep, std::ostream &os) {
  os << "table,benchmark,solver,N,h,lambda_scale,beta,K1_scale,K2_scale,"
        "K_scale,K3_scale,iters,converged,final_residual_ratio,error\n";
  auto row = [&](const SweepCell &cell, const char *solver, int iters,
                 bool converged, double ratio) {
    os << sweep.table << "," << sweep.benchmark << "," << solver << ","
       << cell.N << "," << fmt(1.0 / cell.N) << "," << fmt(cell.lambda_scale)
       << "," << fmt(cell.beta) << "," << fmt(cell.K1_scale) << ","
       << fmt(cell.K2_scale) << "," << fmt(cell.K_scale) << ","
       << fmt(cell.K3_scale) << "," << iters << "," << (converged ? 1 : 0)
       << "," << fmt(ratio) << "," << cell.error << "\n";
  };
  for (const SweepCell &cell : sweep.cells) {
    if (sweep.solver != SolverChoice::MinRes)
      row(cell, "fixed_stress", cell.fs_iters, cell.fs_converged,
          cell.fs_final_ratio);
    if (sweep.solver != SolverChoice::FixedStress)
      row(cell, "minres", cell.minres_iters, cell.minres_converged,
          cell.minres_final_ratio);
  }
}

void write_sweep_timings_csv(const SweepResult &sweep, std::ostream &os) {
  os << "table,N,lambda_scale,beta,K1_scale,K2_scale,K_scale,K3_scale,"
        "seconds\n";
  for (const SweepCell &cell : sweep.cells)
    os << sweep.table << "," << cell.N << "," << fmt(cell.lambda_scale) << ","
       << fmt(cell.beta) << "," << fmt(cell.K1_scale) << ","
       << fmt(cell.K2_scale) << "," << fmt(cell.K_scale) << ","
       << fmt(cell.K3_scale) << "," << fmt(cell.seconds) << "\n";
}

void write_sweep_text(const SweepResult &sweep, std::ostream &os) {
  os << "table " << sweep.table << " (" << sweep.benchmark << ")\n";
  const bool barenblatt = sweep.benchmark == "barenblatt";
  os << std::left << std::setw(6) << "N";
  if (barenblatt)
    os << std::setw(10) << "beta" << std::setw(10) << "K1" << std::setw(10)
       << "K2";
  else
    os << std::setw(10) << "lambda" << std::setw(10) << "K" << std::setw(10)
       << "K3";
  os << std::setw(10) << "minres" << std::setw(14) << "fixed_stress"
     << "\n";
  for (const SweepCell &cell : sweep.cells) {
    os << std::left << std::setw(6) << cell.N;
    if (barenblatt)
      os << std::setw(10) << fmt(cell.beta) << std::setw(10)
         << fmt(cell.K1_scale) << std::setw(10) << fmt(cell.K2_scale);
    else
      os << std::setw(10) << fmt(cell.lambda_scale) << std::setw(10)
         << fmt(cell.K_scale) << std::setw(10) << fmt(cell.K3_scale);
    os << std::setw(10) << cell.minres_iters << std::setw(14) << cell.fs_iters;
    if (!cell.error.empty())
      os << " ERROR " << cell.error;
    os << "\n";
  }
}

} // namespace mpet
