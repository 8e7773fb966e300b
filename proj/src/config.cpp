#include "mpet/config.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace mpet {

namespace {

std::string trim(const std::string &s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
    ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
    --b;
  return s.substr(a, b - a);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail_line(int line, const std::string &msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string &value, int line) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception &) {
    fail_line(line, "expected a number, got '" + value + "'");
  }
  if (pos != value.size())
    fail_line(line, "trailing characters in number '" + value + "'");
  return v;
}

int parse_int(const std::string &value, int line) {
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(value, &pos);
  } catch (const std::exception &) {
    fail_line(line, "expected an integer, got '" + value + "'");
  }
  if (pos != value.size())
    fail_line(line, "trailing characters in integer '" + value + "'");
  return v;
}

struct CustomAccum {
  int n = 0;
  double lambda = 0, mu = 0;
  std::map<int, std::map<std::string, double>> network; // 1-based id
};

void apply_global_key(RunConfig &config, CustomAccum &custom,
                      const std::string &key, const std::string &value,
                      int line) {
  if (key == "benchmark") {
    if (value != "barenblatt" && value != "mpet4" && value != "custom")
      fail_line(line, "benchmark must be barenblatt, mpet4 or custom");
    config.benchmark = value;
  } else if (key == "N") {
    config.N = parse_int(value, line);
  } else if (key == "solver") {
    if (value == "fixed_stress")
      config.solver = SolverChoice::FixedStress;
    else if (value == "minres")
      config.solver = SolverChoice::MinRes;
    else if (value == "both")
      config.solver = SolverChoice::Both;
    else
      fail_line(line, "solver must be fixed_stress, minres or both");
  } else if (key == "units") {
    if (value == "si")
      config.units = UnitMode::Si;
    else if (value == "paper_raw")
      config.units = UnitMode::PaperRaw;
    else
      fail_line(line, "units must be si or paper_raw");
  } else if (key == "L_mode") {
    if (value == "paper")
      config.L_mode = LMode::Paper;
    else if (value == "theory")
      config.L_mode = LMode::Theory;
    else if (value == "explicit")
      config.L_mode = LMode::Explicit;
    else
      fail_line(line, "L_mode must be paper, theory or explicit");
  } else if (key == "cK2") {
    config.cK2 = parse_double(value, line);
  } else if (key == "L_value") {
    config.L_value = parse_double(value, line);
  } else if (key == "eta") {
    config.eta = parse_double(value, line);
  } else if (key == "tau") {
    config.tau = parse_double(value, line);
  } else if (key == "reduction") {
    config.reduction = parse_double(value, line);
  } else if (key == "lambda_scale") {
    config.lambda_scale = parse_double(value, line);
  } else if (key == "K1_scale") {
    config.K1_scale = parse_double(value, line);
  } else if (key == "K2_scale") {
    config.K2_scale = parse_double(value, line);
  } else if (key == "K_scale") {
    config.K_scale = parse_double(value, line);
  } else if (key == "K3_scale") {
    config.K3_scale = parse_double(value, line);
  } else if (key == "beta") {
    config.beta = parse_double(value, line);
  } else if (key == "inner") {
    if (value == "direct")
      config.inner = InnerSolver::Direct;
    else if (value == "cg")
      config.inner = InnerSolver::CG;
    else
      fail_line(line, "inner must be direct or cg");
  } else if (key == "inner_tol") {
    config.inner_tol = parse_double(value, line);
  } else if (key == "out") {
    config.out = value;
  } else if (key == "n") {
    custom.n = parse_int(value, line);
  } else if (key == "lambda") {
    custom.lambda = parse_double(value, line);
  } else if (key == "mu") {
    custom.mu = parse_double(value, line);
  } else {
    fail_line(line, "unknown key '" + key + "'");
  }
}

void finalize_custom(RunConfig &config, const CustomAccum &custom) {
  if (config.benchmark != "custom") {
    if (!custom.network.empty())
      throw ConfigError("config: [network i] sections require "
                        "benchmark = custom");
    return;
  }
  if (custom.n < 1)
    throw ConfigError("config: custom benchmark needs n >= 1");
  PhysicalParams p;
  p.n = custom.n;
  p.lambda = custom.lambda;
  p.mu = custom.mu;
  p.tau = config.tau;
  p.c_p = Vector::Zero(p.n);
  p.alpha = Vector::Ones(p.n);
  p.K = Vector::Ones(p.n);
  p.beta = Matrix::Zero(p.n, p.n);
  for (const auto &[id, keys] : custom.network) {
    if (id < 1 || id > p.n)
      throw ConfigError("config: network id out of range");
    const int i = id - 1;
    for (const auto &[key, value] : keys) {
      if (key == "c_p")
        p.c_p[i] = value;
      else if (key == "alpha")
        p.alpha[i] = value;
      else if (key == "K")
        p.K[i] = value;
      else if (key.rfind("beta", 0) == 0) {
        const int j = std::stoi(key.substr(4)) - 1;
        if (j < 0 || j >= p.n)
          throw ConfigError("config: beta index out of range");
        p.beta(i, j) = value;
        p.beta(j, i) = value;
      } else {
        throw ConfigError("config: unknown network key '" + key + "'");
      }
    }
  }
  try {
    p.validate();
  } catch (const std::exception &ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  config.custom = p;
}

} // namespace

void RunConfig::validate() const {
  if (N < 1 || N > 256)
    throw ConfigError("config: N must be in [1, 256]");
  for (double scale : {lambda_scale, K1_scale, K2_scale, K_scale, K3_scale})
    if (!(scale > 0))
      throw ConfigError("config: scales must be positive");
  if (!(eta > 0) || !(tau > 0) || !(reduction > 1) || !(beta >= 0))
    throw ConfigError("config: invalid eta/tau/reduction/beta");
  if (benchmark == "custom" && !custom)
    throw ConfigError("config: custom benchmark without parameters");
}

PhysicalParams RunConfig::physical_params() const {
  if (benchmark == "barenblatt") {
    BarenblattScales scales;
    scales.lambda_scale = lambda_scale;
    scales.K1_scale = K1_scale;
    scales.K2_scale = K2_scale;
    scales.beta = beta;
    scales.tau = tau;
    return barenblatt_params(units, scales);
  }
  if (benchmark == "mpet4") {
    Mpet4Scales scales;
    scales.lambda_scale = lambda_scale;
    scales.K_scale = K_scale;
    scales.K3_scale = K3_scale;
    scales.tau = tau;
    return mpet4_params(units, scales);
  }
  if (!custom)
    throw ConfigError("config: custom benchmark without parameters");
  PhysicalParams p = *custom;
  p.lambda *= lambda_scale;
  p.tau = tau;
  return p;
}

RescaledModel RunConfig::rescaled_model() const {
  const double arg = L_mode == LMode::Theory ? cK2 : L_value;
  return rescale(physical_params(), L_mode, arg, eta);
}

BoundarySpec RunConfig::boundary_spec() const {
  return cantilever_bc(benchmark_pressures(physical_params().n));
}

RunConfig parse_config(std::istream &in) {
  RunConfig config;
  CustomAccum custom;
  std::string section; // "" or "run" = global, otherwise "network <i>"
  int network_id = -1;

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = raw;
    if (const size_t hash = text.find('#'); hash != std::string::npos)
      text = text.substr(0, hash);
    text = trim(text);
    if (text.empty())
      continue;

    if (text.front() == '[') {
      if (text.back() != ']')
        fail_line(line, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (section == "run" || section.empty()) {
        network_id = -1;
      } else if (section.rfind("network", 0) == 0) {
        network_id = parse_int(trim(section.substr(7)), line);
      } else {
        fail_line(line, "unknown section '" + section + "'");
      }
      continue;
    }

    const size_t eq = text.find('=');
    if (eq == std::string::npos)
      fail_line(line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty())
      fail_line(line, "expected 'key = value'");

    if (network_id > 0)
      custom.network[network_id][key] = parse_double(value, line);
    else
      apply_global_key(config, custom, key, value, line);
  }
  finalize_custom(config, custom);
  config.validate();
  return config;
}

RunConfig parse_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void emit_config(const RunConfig &config, std::ostream &os) {
  os << "benchmark = " << config.benchmark << "\n";
  os << "N = " << config.N << "\n";
  os << "solver = "
     << (config.solver == SolverChoice::Both
             ? "both"
             : config.solver == SolverChoice::MinRes ? "minres"
                                                     : "fixed_stress")
     << "\n";
  os << "units = " << (config.units == UnitMode::Si ? "si" : "paper_raw")
     << "\n";
  os << "L_mode = "
     << (config.L_mode == LMode::Paper
             ? "paper"
             : config.L_mode == LMode::Theory ? "theory" : "explicit")
     << "\n";
  os << "cK2 = " << fmt(config.cK2) << "\n";
  os << "L_value = " << fmt(config.L_value) << "\n";
  os << "eta = " << fmt(config.eta) << "\n";
  os << "tau = " << fmt(config.tau) << "\n";
  os << "reduction = " << fmt(config.reduction) << "\n";
  os << "lambda_scale = " << fmt(config.lambda_scale) << "\n";
  os << "K1_scale = " << fmt(config.K1_scale) << "\n";
  os << "K2_scale = " << fmt(config.K2_scale) << "\n";
  os << "K_scale = " << fmt(config.K_scale) << "\n";
  os << "K3_scale = " << fmt(config.K3_scale) << "\n";
  os << "beta = " << fmt(config.beta) << "\n";
  os << "inner = " << (config.inner == InnerSolver::Direct ? "direct" : "cg")
     << "\n";
  os << "inner_tol = " << fmt(config.inner_tol) << "\n";
  if (!config.out.empty())
    os << "out = " << config.out << "\n";
  if (config.custom) {
    const PhysicalParams &p = *config.custom;
    os << "n = " << p.n << "\n";
    os << "lambda = " << fmt(p.lambda) << "\n";
    os << "mu = " << fmt(p.mu) << "\n";
    for (int i = 0; i < p.n; ++i) {
      os << "[network " << i + 1 << "]\n";
      os << "c_p = " << fmt(p.c_p[i]) << "\n";
      os << "alpha = " << fmt(p.alpha[i]) << "\n";
      os << "K = " << fmt(p.K[i]) << "\n";
      for (int j = i + 1; j < p.n; ++j)
        if (p.beta(i, j) != 0.0)
          os << "beta" << j + 1 << " = " << fmt(p.beta(i, j)) << "\n";
    }
  }
}

void emit_report(const RunReport &report, std::ostream &os) {
  os << "[config]\n";
  emit_config(report.config, os);
  os << "[system]\n";
  os << "dof_total = " << report.dof_total << "\n";
  os << "dof_u = " << report.dof_u << "\n";
  os << "dof_v = " << report.dof_v << "\n";
  os << "dof_p = " << report.dof_p << "\n";
  for (const SolverRecord &r : report.results) {
    os << "[result " << r.name << "]\n";
    os << "iterations = " << r.iterations << "\n";
    os << "converged = " << (r.converged ? 1 : 0) << "\n";
    os << "final_ratio = " << fmt(r.final_ratio) << "\n";
    os << "seconds = " << fmt(r.seconds) << "\n";
    os << "history =";
    for (double h : r.history)
      os << " " << fmt(h);
    os << "\n";
  }
}

RunReport parse_report(std::istream &in) {
  RunReport report;
  std::ostringstream config_text;
  std::string raw;
  std::string section;
  SolverRecord *current = nullptr;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty())
      continue;
    if (text.front() == '[') {
      const std::string name = trim(text.substr(1, text.size() - 2));
      if (name == "config" || name == "system") {
        section = name;
        current = nullptr;
      } else if (name.rfind("result ", 0) == 0) {
        section = "result";
        report.results.push_back({});
        current = &report.results.back();
        current->name = trim(name.substr(7));
      } else if (section == "config" && name.rfind("network", 0) == 0) {
        config_text << text << "\n"; // custom parameter section
      } else {
        fail_line(line, "unknown report section '" + name + "'");
      }
      continue;
    }
    if (section == "config") {
      config_text << text << "\n";
      continue;
    }
    const size_t eq = text.find('=');
    if (eq == std::string::npos)
      fail_line(line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (section == "system") {
      if (key == "dof_total")
        report.dof_total = parse_int(value, line);
      else if (key == "dof_u")
        report.dof_u = parse_int(value, line);
      else if (key == "dof_v")
        report.dof_v = parse_int(value, line);
      else if (key == "dof_p")
        report.dof_p = parse_int(value, line);
      else
        fail_line(line, "unknown system key '" + key + "'");
    } else if (current) {
      if (key == "iterations")
        current->iterations = parse_int(value, line);
      else if (key == "converged")
        current->converged = parse_int(value, line) != 0;
      else if (key == "final_ratio")
        current->final_ratio = parse_double(value, line);
      else if (key == "seconds")
        current->seconds = parse_double(value, line);
      else if (key == "history") {
        std::istringstream hs(value);
        double v;
        while (hs >> v)
          current->history.push_back(v);
      } else
        fail_line(line, "unknown result key '" + key + "'");
    } else {
      fail_line(line, "key outside of a section");
    }
  }
  std::istringstream cfg(config_text.str());
  report.config = parse_config(cfg);
  return report;
}

RunReport execute_run(const RunConfig &config) {
  config.validate();
  const TriMesh mesh = build_unit_square_mesh(config.N);
  const RescaledModel model = config.rescaled_model();
  const BoundarySpec bc = config.boundary_spec();
  const BlockSystem sys = assemble_full(mesh, model, bc);

  RunReport report;
  report.config = config;
  report.dof_total = sys.layout.total();
  report.dof_u = sys.layout.u_size();
  report.dof_v = sys.layout.n * sys.layout.E;
  report.dof_p = sys.layout.n * sys.layout.C;

  const BlockPreconditioner P(sys, config.inner, config.inner_tol);

  if (config.solver != SolverChoice::MinRes) {
    FixedStressOptions opts;
    opts.reduction = config.reduction;
    opts.inner = config.inner;
    opts.inner_tol = config.inner_tol;
    auto [x, iter] = fixed_stress_solve(sys, P, opts);
    (void)x;
    SolverRecord record;
    record.name = "fixed_stress";
    record.iterations = iter.iterations;
    record.converged = iter.converged;
    record.final_ratio = iter.residual_history.empty()
                             ? 0.0
                             : iter.residual_history.back() /
                                   std::max(iter.residual_history.front(),
                                            1e-300);
    record.seconds = iter.wall_seconds;
    record.history = iter.residual_history;
    report.results.push_back(std::move(record));
  }
  if (config.solver != SolverChoice::FixedStress) {
    const auto start = std::chrono::steady_clock::now();
    auto [x, iter] = minres_mpet(sys, P, config.reduction);
    (void)x;
    SolverRecord record;
    record.name = "minres";
    record.iterations = iter.iterations;
    record.converged = iter.converged;
    record.final_ratio = iter.residual_history.empty()
                             ? 0.0
                             : iter.residual_history.back() /
                                   std::max(iter.residual_history.front(),
                                            1e-300);
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    record.history = iter.residual_history;
    report.results.push_back(std::move(record));
  }
  return report;
}

} // namespace mpet
