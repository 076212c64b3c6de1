#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "warpspec/kernel.hpp"
#include "warpspec/numeric.hpp"
#include "warpspec/profiles.hpp"
#include "warpspec/spectrum.hpp"
#include "warpspec/warp.hpp"

namespace warpspec {

struct Tolerances {
  double eig_tol = 1e-6;     // relative, eigenvalue verdicts
  double kernel_tol = 1e-4;  // absolute, kernel gap verdicts
  double bound_tol = 1e-10;  // pointwise curvature ordering slack

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// A rotationally symmetric test manifold (exact radial curvature kappa_g, so
/// the metric's warping g solves g'' + kappa_g g = 0) together with the
/// curvature bounds kappa_- <= kappa_g <= kappa_+ the verdicts are run
/// against. On this class the radial Ricci and sectional curvatures coincide
/// (-g''/g), so one kappa_g feeds both verdict directions; the checks assert
/// nothing beyond this rotationally symmetric setting.
struct ComparisonScenario {
  std::string name;
  int n = 2;
  double p = 2.0;
  CurvatureProfile g_profile = CurvatureProfile::constant(0.0);
  CurvatureProfile kappa_minus = CurvatureProfile::constant(0.0);
  CurvatureProfile kappa_plus = CurvatureProfile::constant(0.0);
  Potential potential = Potential::constant(0.0);
  double r0 = 1.0;
  std::vector<double> t_grid{0.05, 0.1, 0.5, 1.0};
  int kernel_modes = 30;
  std::size_t nodes = 4096;
  Tolerances tolerances;

  /// Warpings are solved slightly past r0 so that l <= r0 is detectable.
  double solve_span() const { return 1.05 * r0; }
  double grid_step() const { return r0 / static_cast<double>(nodes); }
};

struct BoundViolation {
  double s;
  double kappa_minus_value;
  double kappa_g_value;
  double kappa_plus_value;
};

/// Pointwise check kappa_- <= kappa_g <= kappa_+ on the warping grid over
/// [0, r0]. Violations are data, not errors.
inline std::vector<BoundViolation> validate_bounds(
    const ComparisonScenario& sc) {
  std::vector<BoundViolation> out;
  const double h = sc.grid_step();
  const auto count = static_cast<std::size_t>(sc.r0 / h + 1e-9);
  for (std::size_t i = 0; i <= count; ++i) {
    const double s = std::min(double(i) * h, sc.r0);
    const double lo = sc.kappa_minus.eval(s);
    const double mid = sc.g_profile.eval(s);
    const double hi = sc.kappa_plus.eval(s);
    if (lo > mid + sc.tolerances.bound_tol ||
        mid > hi + sc.tolerances.bound_tol)
      out.push_back({s, lo, mid, hi});
  }
  return out;
}

struct ComparisonReport {
  std::string scenario_name;
  int n = 0;
  double p = 2.0;
  double r0 = 0;

  double lambda_g = 0, lambda_minus = 0, lambda_plus = 0;
  std::optional<double> lambda_p_g, lambda_p_minus, lambda_p_plus;

  // eig_lower: lambda_minus - lambda_g >= 0 (test ball below the lower-bound
  // model); eig_upper: lambda_g - lambda_plus >= 0; eig_p_*: p-Laplacian legs.
  std::map<std::string, double> margins;
  std::optional<double> kernel_min_gap_lower;  // min over grid of H_g - H_-
  std::optional<double> kernel_min_gap_upper;  // min over grid of H_+ - H_g
  std::map<std::string, bool> verdicts;
  std::vector<std::string> near_equality;
  std::vector<std::string> warnings;

  bool all_pass() const {
    for (const auto& [k, v] : verdicts)
      if (!v) return false;
    return true;
  }

  friend bool operator==(const ComparisonReport&,
                         const ComparisonReport&) = default;
};

namespace detail {

inline Warping scenario_warping(const ComparisonScenario& sc,
                                const CurvatureProfile& profile) {
  return solve_warping(profile, sc.n, sc.solve_span(), sc.grid_step());
}

inline RadialProblem scenario_problem(const ComparisonScenario& sc,
                                      Warping w, double p) {
  return RadialProblem(std::move(w), sc.potential, sc.r0, p, sc.nodes);
}

inline void note_eig_margin(ComparisonReport& rep, const std::string& key,
                            double margin, double scale, double eig_tol) {
  rep.margins[key] = margin;
  rep.verdicts[key] = margin >= -eig_tol * std::max(std::abs(scale), 1e-30);
  if (std::abs(margin) <= 1e-9 * std::max(std::abs(scale), 1.0))
    rep.near_equality.push_back(key);
}

}  // namespace detail

/// Eigenvalue legs of the verdicts: first Dirichlet eigenvalues of the
/// weighted Laplacian on the test ball and on both bound models, plus the
/// p-Laplacian triple when p != 2.
inline ComparisonReport eigen_comparison(const ComparisonScenario& sc) {
  if (!validate_bounds(sc).empty())
    throw std::invalid_argument("eigen_comparison(" + sc.name +
                                "): curvature bounds do not order correctly");
  ComparisonReport rep;
  rep.scenario_name = sc.name;
  rep.n = sc.n;
  rep.p = sc.p;
  rep.r0 = sc.r0;

  auto wg = detail::scenario_warping(sc, sc.g_profile);
  auto wm = detail::scenario_warping(sc, sc.kappa_minus);
  auto wp = detail::scenario_warping(sc, sc.kappa_plus);

  const auto pg = detail::scenario_problem(sc, wg, 2.0);
  const auto pm = detail::scenario_problem(sc, wm, 2.0);
  const auto pp = detail::scenario_problem(sc, wp, 2.0);
  if (!sc.potential.origin_smooth())
    rep.warnings.push_back(
        "scenario uses a potential that is not smooth at the origin; "
        "results are outside the smooth-potential hypotheses");

  try {
    const auto eg = first_eigenvalue(pg);
    const auto em = first_eigenvalue(pm);
    const auto ep = first_eigenvalue(pp);
    rep.lambda_g = eg.lambda;
    rep.lambda_minus = em.lambda;
    rep.lambda_plus = ep.lambda;
  } catch (const std::exception& e) {
    throw solver_error("eigen_comparison(" + sc.name + "): " + e.what());
  }
  detail::note_eig_margin(rep, "eig_lower", rep.lambda_minus - rep.lambda_g,
                          rep.lambda_g, sc.tolerances.eig_tol);
  detail::note_eig_margin(rep, "eig_upper", rep.lambda_g - rep.lambda_plus,
                          rep.lambda_g, sc.tolerances.eig_tol);

  if (sc.p != 2.0) {
    try {
      rep.lambda_p_g =
          first_eigenvalue_p(detail::scenario_problem(sc, wg, sc.p)).lambda;
      rep.lambda_p_minus =
          first_eigenvalue_p(detail::scenario_problem(sc, wm, sc.p)).lambda;
      rep.lambda_p_plus =
          first_eigenvalue_p(detail::scenario_problem(sc, wp, sc.p)).lambda;
    } catch (const std::exception& e) {
      throw solver_error("eigen_comparison(" + sc.name + ", p): " + e.what());
    }
    detail::note_eig_margin(rep, "eig_p_lower", *rep.lambda_p_minus - *rep.lambda_p_g,
                            *rep.lambda_p_g, sc.tolerances.eig_tol);
    detail::note_eig_margin(rep, "eig_p_upper", *rep.lambda_p_g - *rep.lambda_p_plus,
                            *rep.lambda_p_g, sc.tolerances.eig_tol);
  }
  return rep;
}

/// Kernel legs: center-based expansion kernels on the test ball and both
/// models with a matched mode count, compared pointwise over the (r, t) grid.
/// Gap margins are minima of H_g - H_- and H_+ - H_g.
inline ComparisonReport kernel_comparison(const ComparisonScenario& sc) {
  if (!validate_bounds(sc).empty())
    throw std::invalid_argument("kernel_comparison(" + sc.name +
                                "): curvature bounds do not order correctly");
  ComparisonReport rep;
  rep.scenario_name = sc.name;
  rep.n = sc.n;
  rep.p = sc.p;
  rep.r0 = sc.r0;

  // open-ball comparison: the boundary point is excluded (all Dirichlet
  // kernels vanish there identically)
  std::vector<double> r_grid(64);
  for (std::size_t i = 0; i < r_grid.size(); ++i)
    r_grid[i] = sc.r0 * double(i) / double(r_grid.size());

  auto run = [&](const CurvatureProfile& prof) {
    auto prob =
        detail::scenario_problem(sc, detail::scenario_warping(sc, prof), 2.0);
    return expansion_kernel(prob, sc.kernel_modes, r_grid, sc.t_grid);
  };
  KernelGrid kg = run(sc.g_profile);
  KernelGrid km = run(sc.kappa_minus);
  KernelGrid kp = run(sc.kappa_plus);

  double gap_lower = std::numeric_limits<double>::infinity();
  double gap_upper = gap_lower;
  for (std::size_t j = 0; j < sc.t_grid.size(); ++j)
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
      gap_lower = std::min(gap_lower, kg.at(i, j) - km.at(i, j));
      gap_upper = std::min(gap_upper, kp.at(i, j) - kg.at(i, j));
    }
  rep.kernel_min_gap_lower = gap_lower;
  rep.kernel_min_gap_upper = gap_upper;
  rep.margins["hk_lower"] = gap_lower;
  rep.margins["hk_upper"] = gap_upper;
  rep.verdicts["hk_lower"] = gap_lower >= -sc.tolerances.kernel_tol;
  rep.verdicts["hk_upper"] = gap_upper >= -sc.tolerances.kernel_tol;
  if (std::abs(gap_lower) <= 1e-6) rep.near_equality.push_back("hk_lower");
  if (std::abs(gap_upper) <= 1e-6) rep.near_equality.push_back("hk_upper");
  if (!sc.potential.origin_smooth())
    rep.warnings.push_back(
        "scenario uses a potential that is not smooth at the origin; "
        "results are outside the smooth-potential hypotheses");
  return rep;
}

/// Both legs merged into one report.
inline ComparisonReport run_scenario(const ComparisonScenario& sc) {
  ComparisonReport rep = eigen_comparison(sc);
  ComparisonReport kern = kernel_comparison(sc);
  rep.kernel_min_gap_lower = kern.kernel_min_gap_lower;
  rep.kernel_min_gap_upper = kern.kernel_min_gap_upper;
  for (const auto& [k, v] : kern.margins) rep.margins[k] = v;
  for (const auto& [k, v] : kern.verdicts) rep.verdicts[k] = v;
  for (const auto& k : kern.near_equality) rep.near_equality.push_back(k);
  return rep;
}

/// First Dirichlet eigenvalues of balls B(q, l - eps) exhausting a closed
/// model (finite l): one lambda per eps, ordered by descending eps.
inline std::vector<double> exhaustion_asymptotics(
    const CurvatureProfile& profile, const Potential& potential, int n,
    double p, std::vector<double> eps_list, std::size_t nodes = 4096) {
  const double span = profile.s_max();
  auto w = solve_warping(profile, n, span, span / double(nodes));
  if (!w.l_finite())
    throw std::domain_error(
        "exhaustion_asymptotics: no zero of f up to s_max (l = inf)");
  std::sort(eps_list.begin(), eps_list.end(),
            [](double a, double b) { return a > b; });
  std::vector<double> lambdas;
  for (double eps : eps_list) {
    if (!(eps > 0) || eps >= w.l / 2)
      throw std::domain_error("exhaustion_asymptotics: eps must lie in (0, l/2)");
    // the eigenfunction develops an O(eps) layer at the closing end; keep
    // enough nodes across it
    std::size_t n_eps = nodes;
    while (double(n_eps) * eps < 48.0 * w.l && n_eps < 65536) n_eps *= 2;
    RadialProblem prob(w, potential, w.l - eps, p, n_eps);
    lambdas.push_back(p == 2.0 ? first_eigenvalue(prob).lambda
                               : first_eigenvalue_p(prob).lambda);
  }
  return lambdas;
}

/// Outcome slot of a batch run: either a report or the error that stopped the
/// scenario. Slots stay in input order regardless of scheduling.
struct ScenarioOutcome {
  std::optional<ComparisonReport> report;
  std::string error;
};

inline unsigned worker_count() {
  if (const char* env = std::getenv("WARPSPEC_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 64) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::clamp(hw == 0 ? 1u : hw, 1u, 16u);
}

/// Runs every scenario, fanning out across workers; results are collected in
/// deterministic input order. Scenarios are independent (pure computations on
/// immutable inputs).
inline std::vector<ScenarioOutcome> run_scenarios(
    const std::vector<ComparisonScenario>& scenarios,
    unsigned workers = worker_count()) {
  std::vector<ScenarioOutcome> out(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= scenarios.size()) return;
      try {
        out[i].report = run_scenario(scenarios[i]);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  if (workers <= 1 || scenarios.size() <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, scenarios.size());
         ++w)
      pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

// ---- JSON serialization -------------------------------------------------

inline void to_json(nlohmann::json& j, const ComparisonReport& r) {
  j = nlohmann::json{{"scenario", r.scenario_name},
                     {"n", r.n},
                     {"p", r.p},
                     {"r0", r.r0},
                     {"lambda", {{"g", r.lambda_g},
                                 {"minus", r.lambda_minus},
                                 {"plus", r.lambda_plus}}},
                     {"margins", r.margins},
                     {"verdicts", r.verdicts},
                     {"near_equality", r.near_equality},
                     {"warnings", r.warnings}};
  if (r.lambda_p_g) {
    j["lambda_p"] = {{"g", *r.lambda_p_g},
                     {"minus", *r.lambda_p_minus},
                     {"plus", *r.lambda_p_plus}};
  }
  if (r.kernel_min_gap_lower) {
    j["kernel"] = {{"min_gap_lower", *r.kernel_min_gap_lower},
                   {"min_gap_upper", *r.kernel_min_gap_upper}};
  }
}

inline void from_json(const nlohmann::json& j, ComparisonReport& r) {
  j.at("scenario").get_to(r.scenario_name);
  j.at("n").get_to(r.n);
  j.at("p").get_to(r.p);
  j.at("r0").get_to(r.r0);
  j.at("lambda").at("g").get_to(r.lambda_g);
  j.at("lambda").at("minus").get_to(r.lambda_minus);
  j.at("lambda").at("plus").get_to(r.lambda_plus);
  j.at("margins").get_to(r.margins);
  j.at("verdicts").get_to(r.verdicts);
  j.at("near_equality").get_to(r.near_equality);
  j.at("warnings").get_to(r.warnings);
  if (j.contains("lambda_p")) {
    r.lambda_p_g = j["lambda_p"].at("g").get<double>();
    r.lambda_p_minus = j["lambda_p"].at("minus").get<double>();
    r.lambda_p_plus = j["lambda_p"].at("plus").get<double>();
  }
  if (j.contains("kernel")) {
    r.kernel_min_gap_lower = j["kernel"].at("min_gap_lower").get<double>();
    r.kernel_min_gap_upper = j["kernel"].at("min_gap_upper").get<double>();
  }
}

}  // namespace warpspec
