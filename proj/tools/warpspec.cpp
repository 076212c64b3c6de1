// Command-line front end: declarative scenario files, one subcommand per
// computation, CSV/JSON emission, exit-code contract for CI (0 = all verdicts
// pass, 1 = solver error or failed verdict, 2 = input error).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "warpspec/compare.hpp"
#include "warpspec/config.hpp"
#include "warpspec/kernel.hpp"
#include "warpspec/spectrum.hpp"
#include "warpspec/warp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace warpspec;

namespace {

struct GlobalOptions {
  std::string config_path;
  double h_override = 0.0;
  double tol_override = 0.0;
};

void apply_overrides(ComparisonScenario& sc, const GlobalOptions& opt) {
  if (opt.h_override > 0.0) {
    sc.nodes = static_cast<std::size_t>(std::ceil(sc.r0 / opt.h_override));
    if (sc.nodes < 64) throw config_error("--h-override too coarse");
  }
  if (opt.tol_override > 0.0) {
    sc.tolerances.eig_tol = opt.tol_override;
    sc.tolerances.kernel_tol = opt.tol_override;
  }
}

fs::path scenario_dir(const OutputSpec& out, const std::string& name) {
  fs::path dir = fs::path(out.dir) / name;
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

Warping warping_for(const ComparisonScenario& sc) {
  return solve_warping(sc.g_profile, sc.n, sc.solve_span(), sc.grid_step());
}

int cmd_warp(const GlobalOptions& opt, const std::string& name) {
  auto cfg = load_config(opt.config_path);
  ComparisonScenario sc = cfg.scenario(name);
  apply_overrides(sc, opt);
  const auto dir = scenario_dir(cfg.output, sc.name);
  // integrate well past the ball so a finite first zero is actually found
  const double span =
      std::max(sc.solve_span(), std::min(8.0 * sc.r0, sc.g_profile.s_max()));
  auto w = solve_warping(sc.g_profile, sc.n, span, sc.grid_step());
  if (cfg.output.csv) {
    std::ostringstream os;
    write_warping_csv(os, w);
    write_text(dir / "warping.csv", os.str());
  }
  if (cfg.output.json) {
    json j{{"n", w.n},
           {"h", w.h},
           {"l", w.l_finite() ? json(w.l) : json("inf")}};
    write_text(dir / "warping.json", j.dump(2) + "\n");
  }
  return 0;
}

int cmd_eig(const GlobalOptions& opt, const std::string& name, int k,
            double p_flag) {
  auto cfg = load_config(opt.config_path);
  ComparisonScenario sc = cfg.scenario(name);
  apply_overrides(sc, opt);
  const auto dir = scenario_dir(cfg.output, sc.name);
  const double p = (p_flag > 0) ? p_flag : sc.p;
  RadialProblem prob(warping_for(sc), sc.potential, sc.r0, p, sc.nodes);
  EigenPair pair;
  if (p == 2.0) {
    pair = kth_radial_eigenvalue(prob, k);
  } else {
    if (k != 1)
      throw config_error("--k > 1 is only available for p = 2");
    pair = first_eigenvalue_p(prob);
  }
  if (cfg.output.csv) {
    std::ostringstream os;
    write_eigen_csv(os, pair);
    write_text(dir / "eigen.csv", os.str());
  }
  if (cfg.output.json) {
    json j{{"n", sc.n},
           {"p", p},
           {"r0", sc.r0},
           {"lambda", pair.lambda},
           {"node_count", pair.node_count},
           {"rayleigh_residual", pair.rayleigh_residual}};
    if (!pair.warnings.empty()) j["warnings"] = pair.warnings;
    write_text(dir / "eigen.json", j.dump(2) + "\n");
  }
  return 0;
}

int cmd_kernel(const GlobalOptions& opt, const std::string& name,
               const std::string& method, const std::string& boundary_name) {
  auto cfg = load_config(opt.config_path);
  ComparisonScenario sc = cfg.scenario(name);
  apply_overrides(sc, opt);
  const auto dir = scenario_dir(cfg.output, sc.name);
  const auto boundary = boundary_name == "neumann"
                            ? BoundaryCondition::neumann
                            : BoundaryCondition::dirichlet;

  RadialProblem prob(warping_for(sc), sc.potential, sc.r0, 2.0, sc.nodes);
  const double t_min = *std::min_element(sc.t_grid.begin(), sc.t_grid.end());
  const double t_max = *std::max_element(sc.t_grid.begin(), sc.t_grid.end());
  const double t0 = std::min(1e-3 * sc.r0 * sc.r0, 0.5 * t_min);
  const double dt = std::min((t_max - t0) / 400.0, t_min / 40.0);

  KernelGrid grid;
  if (method == "expansion") {
    if (boundary == BoundaryCondition::neumann)
      throw config_error(
          "expansion kernels are Dirichlet; use --method cn for neumann");
    std::vector<double> r_grid(129);
    for (std::size_t i = 0; i < r_grid.size(); ++i)
      r_grid[i] = sc.r0 * double(i) / double(r_grid.size() - 1);
    grid = expansion_kernel(prob, sc.kernel_modes, r_grid, sc.t_grid);
  } else {
    grid = cn_kernel(prob, t0, dt, t_max, boundary, 8192);
  }

  // cross-validation metric: expansion vs stepping at the scenario's times
  // on a shared radius probe, normalized by the expansion's peak; the
  // stepping grid is interpolated linearly in t
  double cross = 0.0;
  if (boundary == BoundaryCondition::dirichlet) {
    const KernelGrid cn_grid =
        (method == "expansion") ? cn_kernel(prob, t0, dt, t_max, boundary, 8192)
                                : grid;
    std::vector<double> probe_r;
    for (std::size_t i = 0; i < cn_grid.r.size(); i += 64)
      probe_r.push_back(cn_grid.r[i]);
    std::vector<double> probe_t;
    for (double t : sc.t_grid)
      if (t >= cn_grid.t.front() - 1e-12 && t <= cn_grid.t.back() + 1e-12)
        probe_t.push_back(t);
    if (!probe_t.empty()) {
      auto exp_grid =
          expansion_kernel(prob, sc.kernel_modes, probe_r, probe_t);
      double peak = 0.0;
      for (double v : exp_grid.H) peak = std::max(peak, std::abs(v));
      auto cn_at_t = [&](std::size_t i, double t) {
        if (t <= cn_grid.t.front()) return cn_grid.at(i, 0);
        if (t >= cn_grid.t.back())
          return cn_grid.at(i, cn_grid.t.size() - 1);
        std::size_t j = 1;
        while (cn_grid.t[j] < t) ++j;
        const double w =
            (t - cn_grid.t[j - 1]) / (cn_grid.t[j] - cn_grid.t[j - 1]);
        return (1 - w) * cn_grid.at(i, j - 1) + w * cn_grid.at(i, j);
      };
      for (std::size_t jt = 0; jt < probe_t.size(); ++jt)
        for (std::size_t i = 0; i < probe_r.size(); ++i)
          cross = std::max(
              cross, std::abs(exp_grid.at(i, jt) -
                              cn_at_t(i * 64, probe_t[jt])) / peak);
    }
  }

  if (cfg.output.csv) {
    std::ostringstream os;
    write_kernel_csv(os, grid);
    write_text(dir / "kernel.csv", os.str());
  }
  if (cfg.output.json) {
    json mass = json::array();
    for (double t : grid.t) mass.push_back(kernel_mass(grid, t));
    json j{{"boundary", to_string(grid.boundary)},
           {"K", sc.kernel_modes},
           {"t0", grid.t0},
           {"dt", grid.dt},
           {"method", method},
           {"modes_used", grid.modes_used},
           {"mass", mass},
           {"cross_check_max_rel", cross}};
    if (!grid.warnings.empty()) j["warnings"] = grid.warnings;
    write_text(dir / "kernel.json", j.dump(2) + "\n");
  }
  return 0;
}

int cmd_compare(const GlobalOptions& opt, const std::string& name, bool all) {
  auto cfg = load_config(opt.config_path);
  std::vector<ComparisonScenario> list;
  if (all) {
    if (cfg.scenarios.empty())
      throw config_error("--all: config contains no scenarios");
    list = cfg.scenarios;
  } else {
    list.push_back(cfg.scenario(name));
  }
  for (auto& sc : list) apply_overrides(sc, opt);

  // bound ordering is an input-contract gate, not a verdict
  for (const auto& sc : list) {
    auto viol = validate_bounds(sc);
    if (!viol.empty()) {
      std::ostringstream msg;
      msg << "scenario '" << sc.name << "': curvature bounds violated at "
          << viol.size() << " grid points (first at s="
          << format_double(viol.front().s) << ": "
          << format_double(viol.front().kappa_minus_value) << " <= "
          << format_double(viol.front().kappa_g_value) << " <= "
          << format_double(viol.front().kappa_plus_value) << " fails)";
      throw config_error(msg.str());
    }
  }

  const auto outcomes = run_scenarios(list);

  json summary;
  summary["scenarios"] = json::array();
  int failed_verdicts = 0, errors = 0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto dir = scenario_dir(cfg.output, list[i].name);
    if (outcomes[i].report) {
      const auto& rep = *outcomes[i].report;
      json j = rep;
      write_text(dir / "compare.json", j.dump(2) + "\n");
      const bool pass = rep.all_pass();
      if (!pass) ++failed_verdicts;
      summary["scenarios"].push_back(
          {{"name", list[i].name}, {"pass", pass}});
    } else {
      ++errors;
      write_text(dir / "compare.json",
                 json{{"scenario", list[i].name},
                      {"error", outcomes[i].error}}.dump(2) + "\n");
      summary["scenarios"].push_back(
          {{"name", list[i].name}, {"error", outcomes[i].error}});
    }
  }
  summary["pass_count"] =
      static_cast<int>(list.size()) - failed_verdicts - errors;
  summary["fail_count"] = failed_verdicts;
  summary["error_count"] = errors;
  fs::create_directories(cfg.output.dir);
  write_text(fs::path(cfg.output.dir) / "summary.json",
             summary.dump(2) + "\n");

  for (std::size_t i = 0; i < list.size(); ++i) {
    if (outcomes[i].report)
      std::cout << list[i].name << ": "
                << (outcomes[i].report->all_pass() ? "pass" : "FAIL") << "\n";
    else
      std::cout << list[i].name << ": ERROR " << outcomes[i].error << "\n";
  }
  return (failed_verdicts + errors) > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted heat kernels and Dirichlet eigenvalues on "
               "spherically symmetric model spaces"};
  app.require_subcommand(1);

  GlobalOptions opt;
  app.add_option("--h-override", opt.h_override,
                 "override the scenario grid step");
  app.add_option("--tol-override", opt.tol_override,
                 "override eig_tol and kernel_tol");

  std::string name;
  int k = 1;
  double p_flag = 0.0;
  std::string method = "expansion";
  std::string boundary = "dirichlet";
  bool all = false;

  auto* warp = app.add_subcommand("warp", "solve the warping ODE");
  warp->add_option("--config", opt.config_path, "config file")->required();
  warp->add_option("--scenario", name, "scenario name")->required();

  auto* eig = app.add_subcommand("eig", "first/k-th Dirichlet eigenpair");
  eig->add_option("--config", opt.config_path, "config file")->required();
  eig->add_option("--scenario", name, "scenario name")->required();
  eig->add_option("--k", k, "mode index (p = 2 only)");
  eig->add_option("--p", p_flag, "override the scenario's p");

  auto* kern = app.add_subcommand("kernel", "center-based heat kernel");
  kern->add_option("--config", opt.config_path, "config file")->required();
  kern->add_option("--scenario", name, "scenario name")->required();
  kern->add_option("--method", method, "expansion | cn")
      ->check(CLI::IsMember({"expansion", "cn"}));
  kern->add_option("--boundary", boundary, "dirichlet | neumann")
      ->check(CLI::IsMember({"dirichlet", "neumann"}));

  auto* cmp = app.add_subcommand("compare", "run comparison verdicts");
  cmp->add_option("--config", opt.config_path, "config file")->required();
  cmp->add_option("--scenario", name, "scenario name");
  cmp->add_flag("--all", all, "run every scenario in the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(warp)) return cmd_warp(opt, name);
    if (app.got_subcommand(eig)) return cmd_eig(opt, name, k, p_flag);
    if (app.got_subcommand(kern)) return cmd_kernel(opt, name, method, boundary);
    if (app.got_subcommand(cmp)) {
      if (!all && name.empty())
        throw config_error("compare: need --scenario NAME or --all");
      return cmd_compare(opt, name, all);
    }
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
