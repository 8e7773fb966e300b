// Command-line driver: single benchmark runs, published-table sweeps and
// the numerical verification checks.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mpet/tables.hpp"
#include "mpet/verify.hpp"

namespace {

int run_command(const std::string &config_path) {
  mpet::RunConfig config;
  try {
    config = config_path.empty() ? mpet::RunConfig{}
                                 : mpet::parse_config_file(config_path);
    config.validate();
  } catch (const std::exception &ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  }
  try {
    const mpet::RunReport report = mpet::execute_run(config);
    mpet::emit_report(report, std::cout);
    if (!config.out.empty()) {
      std::filesystem::create_directories(config.out);
      std::ofstream out(config.out + "/report.txt", std::ios::app);
      mpet::emit_report(report, out);
    }
    for (const auto &r : report.results)
      if (!r.converged)
        return 1;
    return 0;
  } catch (const std::exception &ex) {
    std::cerr << "run failed: " << ex.what() << "\n";
    return 1;
  }
}

int table_command(const std::string &table, const std::vector<int> &meshes,
                  const std::string &units, const std::string &out_dir) {
  mpet::RunConfig base;
  try {
    base.units = units == "paper_raw" ? mpet::UnitMode::PaperRaw
                                      : mpet::UnitMode::Si;
    if (units != "si" && units != "paper_raw")
      throw mpet::ConfigError("units must be si or paper_raw");
  } catch (const std::exception &ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  }

  const mpet::SweepResult sweep =
      mpet::run_table_sweep(table, base, meshes, &std::cerr);
  mpet::write_sweep_text(sweep, std::cout);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir + "/" + table + ".csv");
    mpet::write_sweep_csv(sweep, csv);
    std::ofstream timings(out_dir + "/" + table + "_timings.csv");
    mpet::write_sweep_timings_csv(sweep, timings);
    std::ofstream text(out_dir + "/" + table + ".txt");
    mpet::write_sweep_text(sweep, text);
  }
  for (const auto &cell : sweep.cells)
    if (!cell.error.empty())
      return 1;
  return 0;
}

int verify_command(const std::string &level) {
  using namespace mpet;
  bool ok = true;
  auto report = [&ok](const std::string &name, bool pass) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << "\n";
    ok = ok && pass;
  };

  // Randomized matrix-ordering checks on both benchmark parameter sets.
  for (UnitMode units : {UnitMode::Si, UnitMode::PaperRaw}) {
    const RescaledModel m2 =
        rescale(barenblatt_params(units), LMode::Paper, 0, 10.0);
    report("lemma2 barenblatt", check_lemma2(m2, 1000).pass());
    const RescaledModel m4 =
        rescale(mpet4_params(units), LMode::Paper, 0, 10.0);
    report("lemma2 mpet4", check_lemma2(m4, 1000).pass());
  }

  // Sparse assembly against the independent dense oracle.
  for (int N : {1, 2}) {
    const TriMesh mesh = build_unit_square_mesh(N);
    const RescaledModel m =
        rescale(barenblatt_params(UnitMode::Si), LMode::Paper, 0, 10.0);
    const BoundarySpec bc = cantilever_bc(benchmark_pressures(2));
    const BlockSystem sys = assemble_full(mesh, m, bc);
    const DenseBlocks oracle = dense_oracle(mesh, m, bc);
    const Matrix mono = Matrix(monolithic_matrix(sys));
    const double err = (mono - oracle.monolithic).norm() /
                       std::max(1e-300, oracle.monolithic.norm());
    report("dense oracle N=" + std::to_string(N), err < 1e-12);
  }

  // Constants and the contraction bound on small meshes.
  const BoundarySpec bc = cantilever_bc(benchmark_pressures(2));
  const double beta4 = estimate_infsup(build_unit_square_mesh(4), bc);
  const double ck4 = estimate_ckd(build_unit_square_mesh(4), bc, 10.0);
  std::cout << "beta_sd(N=4) = " << beta4 << ", cKd2(N=4) = " << ck4 << "\n";
  report("inf-sup positive", beta4 > 0);
  report("cKd2 in (0,2]", ck4 > 0 && ck4 <= 2.0);

  const int N = level == "full" ? 16 : 8;
  const TriMesh mesh = build_unit_square_mesh(N);
  const RescaledModel m =
      rescale(barenblatt_params(UnitMode::PaperRaw), LMode::Paper, 0, 10.0);
  const BlockSystem sys = assemble_full(mesh, m, cantilever_bc(benchmark_pressures(2)));
  const BlockPreconditioner P(sys);
  const Vector reference = reference_solve(sys, P);
  const ContractionAudit audit = contraction_audit(sys, P, reference, beta4);
  std::cout << "contraction worst ratio " << audit.worst_ratio << " vs bound "
            << audit.bound << "\n";
  report("contraction bound", audit.pass);

  FixedStressOptions opts;
  opts.store_iterates = true;
  opts.reference = &reference;
  auto [x, iter] = fixed_stress_solve(sys, P, opts);
  report("energy inequality",
         energy_audit(sys, iter.iterates, reference).pass);
  report("conservation",
         conservation_check(sys, mesh, x.x) < 1e-10);
  return ok ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Discrete flux-based multiple-network poroelasticity solvers"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App *run = app.add_subcommand("run", "solve one configured benchmark");
  run->add_option("--config", config_path, "configuration file");

  std::string table_id, units = "si", out_dir;
  std::vector<int> meshes;
  CLI::App *table =
      app.add_subcommand("table", "reproduce a published iteration table");
  table->add_option("table", table_id, "T2 | T3 | T4 | T7")->required();
  table->add_option("--mesh", meshes, "override the mesh grid (N values)");
  table->add_option("--units", units, "si | paper_raw");
  table->add_option("--out", out_dir, "output directory for CSV/text");

  std::string level = "quick";
  CLI::App *verify = app.add_subcommand("verify", "numerical property checks");
  verify->add_option("--level", level, "quick | full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed())
      return run_command(config_path);
    if (table->parsed())
      return table_command(table_id, meshes, units, out_dir);
    return verify_command(level);
  } catch (const mpet::ConfigError &ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception &ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
