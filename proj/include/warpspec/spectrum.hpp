#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "warpspec/numeric.hpp"
#include "warpspec/profiles.hpp"
#include "warpspec/warp.hpp"

namespace warpspec {

/// One Dirichlet eigenvalue/kernel problem on a geodesic ball of a model
/// space: dimension via the warping, radial potential, ball radius r0, and
/// the exponent p (p = 2 is the linear weighted Laplacian).
///
/// The ball must sit strictly inside the warping's positivity interval.
struct RadialProblem {
  int n;
  Warping warping;
  Potential potential;
  double r0;
  double p = 2.0;
  double shoot_offset;       // Frobenius start offset
  std::size_t nodes = 4096;  // shooting grid resolution
  // search ceiling override for the first-eigenvalue bracket (the default
  // scales like the flat-ball eigenvalue)
  std::optional<double> lambda_cap_override;

  RadialProblem(Warping w, Potential pot, double radius, double p_exp = 2.0,
                std::size_t grid_nodes = 4096,
                std::optional<double> offset = std::nullopt)
      : n(w.n),
        warping(std::move(w)),
        potential(std::move(pot)),
        r0(radius),
        p(p_exp),
        shoot_offset(offset.value_or(1e-6 * radius)),
        nodes(grid_nodes) {
    if (n < 2)
      throw std::invalid_argument("RadialProblem: n must be >= 2 "
                                  "(use one_dimensional() for the line mode)");
    validate();
  }

  /// Line mode: the (n-1) f'/f transport term vanishes (f^0 = 1, w_1 = 2),
  /// used for half-line potential problems. Not a manifold dimension.
  static RadialProblem one_dimensional(Warping w, Potential pot, double radius,
                                       double p_exp = 2.0,
                                       std::size_t grid_nodes = 4096) {
    return RadialProblem(Tag{}, std::move(w), std::move(pot), radius, p_exp,
                         grid_nodes);
  }

  bool one_dim() const { return n == 1; }

  double grid_step() const { return r0 / static_cast<double>(nodes); }

  /// Search ceiling for the first eigenvalue bracket; k-th searches scale it
  /// by k^2.
  double lambda_cap() const {
    if (lambda_cap_override) return *lambda_cap_override;
    return (20.0 / r0) * (20.0 / r0) * std::max(1.0, double(n) * double(n));
  }

 private:
  struct Tag {};
  RadialProblem(Tag, Warping w, Potential pot, double radius, double p_exp,
                std::size_t grid_nodes)
      : n(1),
        warping(std::move(w)),
        potential(std::move(pot)),
        r0(radius),
        p(p_exp),
        shoot_offset(1e-6 * radius),
        nodes(grid_nodes) {
    validate();
  }

  void validate() const {
    if (!(r0 > 0) || r0 >= warping.domain_max())
      throw std::invalid_argument(
          "RadialProblem: r0 must satisfy 0 < r0 < min(l, s_max)");
    if (!(p > 1)) throw std::domain_error("RadialProblem: p must be > 1");
    if (potential.s_max() < r0)
      throw std::invalid_argument("RadialProblem: potential not defined to r0");
    if (nodes < 64)
      throw std::invalid_argument("RadialProblem: need >= 64 grid nodes");
    if (!(shoot_offset > 0) || shoot_offset >= r0 / double(nodes))
      throw std::invalid_argument(
          "RadialProblem: shoot_offset must lie inside the first grid cell");
  }
};

/// Normalized radial eigenpair on the uniform grid over [0, r0].
struct EigenPair {
  double lambda = 0;
  std::vector<double> s;
  std::vector<double> psi;
  std::vector<double> dpsi;
  int node_count = 0;
  bool normalized = false;
  double rayleigh_residual = 0;  // |Rayleigh(psi)/lambda - 1|
  std::vector<std::string> warnings;
};

struct ShootResult {
  double terminal = 0;
  int node_count = 0;
  std::vector<double> s, psi, dpsi;
};

namespace detail {

/// Transport coefficient (n-1) f'/f - phi' tabulated on the half-step
/// lattice so repeated shots share the evaluations.
class CoefficientTable {
 public:
  explicit CoefficientTable(const RadialProblem& prob) : prob_(prob) {
    const std::size_t N = prob.nodes;
    h_ = prob.grid_step();
    c_.resize(2 * N + 1);
    for (std::size_t j = 0; j <= 2 * N; ++j) {
      const double s = (j == 0) ? prob.shoot_offset : 0.5 * h_ * double(j);
      c_[j] = coefficient_exact(s);
    }
  }

  double at(double s) const {
    const double idx = 2.0 * s / h_;
    const auto j = static_cast<std::size_t>(idx + 0.5);
    if (j >= 1 && j < c_.size() && std::abs(idx - double(j)) < 1e-6)
      return c_[j];
    return coefficient_exact(s);
  }

  double coefficient_exact(double s) const {
    const double drift = prob_.potential.dphi(s);
    if (prob_.one_dim()) return -drift;
    return (prob_.n - 1) * log_derivative(prob_.warping, s) - drift;
  }

 private:
  const RadialProblem& prob_;
  double h_ = 0;
  std::vector<double> c_;
};

/// Integrates one trajectory for the given lambda. The shot starts at the
/// offset eps; the first grid interval is covered by four short steps and the
/// s=0 node carries the series value, so the exposed grid is exactly [0, r0].
template <typename Rhs, typename Slope>
ShootResult integrate_shot(const RadialProblem& prob, const Rhs& rhs,
                           const Slope& slope_of, double psi_eps, double w_eps,
                           double lambda) {
  const std::size_t N = prob.nodes;
  const double h = prob.grid_step();
  const double eps = prob.shoot_offset;

  ShootResult out;
  out.s.resize(N + 1);
  out.psi.resize(N + 1);
  out.dpsi.resize(N + 1);
  out.s[0] = 0.0;
  out.psi[0] = 1.0;
  out.dpsi[0] = 0.0;

  std::array<double, 2> u{psi_eps, w_eps};
  {
    const double span = h - eps;
    double s = eps;
    for (int q = 0; q < 4; ++q) {
      u = rk4_step(rhs, s, u, span / 4);
      s += span / 4;
    }
  }
  out.s[1] = h;
  out.psi[1] = u[0];
  out.dpsi[1] = slope_of(u[1]);
  int crossings = 0;
  for (std::size_t i = 1; i < N; ++i) {
    u = rk4_step(rhs, double(i) * h, u, h);
    if (!(std::abs(u[0]) < 1e150) || !(std::abs(u[1]) < 1e150))
      throw solver_error("shooting blow-up at lambda=" + format_double(lambda));
    out.s[i + 1] = double(i + 1) * h;
    out.psi[i + 1] = u[0];
    out.dpsi[i + 1] = slope_of(u[1]);
    // interior sign changes only; a crossing inside the final interval is
    // accounted for by the terminal sign in the Sturm count
    if (i + 1 < N && out.psi[i] * out.psi[i + 1] < 0.0) ++crossings;
  }
  out.node_count = crossings;
  out.terminal = out.psi[N];
  return out;
}

}  // namespace detail

/// One linear shot of psi'' + [(n-1)f'/f - phi'] psi' + lambda psi = 0 from
/// the Frobenius start psi(eps) = 1 - lambda eps^2/(2n), psi'(eps) =
/// -lambda eps/n. Returns terminal value, interior sign-change count, and the
/// trajectory.
inline ShootResult shoot_linear(const RadialProblem& prob, double lambda,
                                const detail::CoefficientTable* table = nullptr) {
  if (prob.p != 2.0) throw std::domain_error("shoot_linear: requires p = 2");
  if (lambda < 0) throw std::domain_error("shoot_linear: lambda must be >= 0");
  std::optional<detail::CoefficientTable> own;
  if (!table) own.emplace(prob), table = &*own;
  auto rhs = [&](double s, const std::array<double, 2>& u)
      -> std::array<double, 2> {
    return {u[1], -table->at(s) * u[1] - lambda * u[0]};
  };
  const double eps = prob.shoot_offset;
  return detail::integrate_shot(prob, rhs, [](double v) { return v; },
                                1.0 - lambda * eps * eps / (2.0 * prob.n),
                                -lambda * eps / prob.n, lambda);
}

/// One shot of the p-problem as the first-order system in (psi, w) with
/// w = |psi'|^{p-2} psi', so no negative power is ever taken at the origin:
///   psi' = sgn(w)|w|^{1/(p-1)},
///   w'   = -[(n-1)f'/f - phi'] w - lambda sgn(psi)|psi|^{p-1}.
inline ShootResult shoot_p(const RadialProblem& prob, double lambda,
                           const detail::CoefficientTable* table = nullptr) {
  if (lambda < 0) throw std::domain_error("shoot_p: lambda must be >= 0");
  std::optional<detail::CoefficientTable> own;
  if (!table) own.emplace(prob), table = &*own;
  const double p = prob.p;
  auto rhs = [&](double s, const std::array<double, 2>& u)
      -> std::array<double, 2> {
    return {sgnpow(u[1], 1.0 / (p - 1.0)),
            -table->at(s) * u[1] - lambda * sgnpow(u[0], p - 1.0)};
  };
  const double eps = prob.shoot_offset;
  return detail::integrate_shot(
      prob, rhs, [p](double w) { return sgnpow(w, 1.0 / (p - 1.0)); }, 1.0,
      -sgnpow(lambda * eps / prob.n, p - 1.0), lambda);
}

namespace detail {

/// Zeros swept past r0 as lambda grows; the k-th eigenvalue is where this
/// count jumps from k-1 to k. After j interior zeros the trajectory's sign is
/// (-1)^j (psi starts positive); a terminal sign violating that parity means
/// one more zero hides between the last interior crossing and r0.
inline int sturm_count(const ShootResult& shot) {
  const double parity = (shot.node_count % 2 == 0) ? 1.0 : -1.0;
  return shot.node_count + (shot.terminal * parity <= 0.0 ? 1 : 0);
}

inline std::vector<double> weight_on_grid(const RadialProblem& prob,
                                          const std::vector<double>& s) {
  std::vector<double> alpha(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    double fpow = 1.0;
    if (!prob.one_dim()) {
      const double fv = (s[i] == 0.0) ? 0.0 : prob.warping.eval_f(s[i]);
      fpow = std::pow(std::max(fv, 0.0), prob.n - 1);
    }
    alpha[i] = fpow * std::exp(-prob.potential.phi(s[i]));
  }
  return alpha;
}

/// Quotient evaluated with the solver-propagated derivative (accurate for
/// highly oscillatory modes, where numerical differentiation degrades).
inline double rayleigh_with_derivative(const RadialProblem& prob,
                                       const std::vector<double>& s,
                                       const std::vector<double>& psi,
                                       const std::vector<double>& dpsi) {
  const auto alpha = weight_on_grid(prob, s);
  std::vector<double> num(s.size()), den(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    num[i] = std::pow(std::abs(dpsi[i]), prob.p) * alpha[i];
    den[i] = std::pow(std::abs(psi[i]), prob.p) * alpha[i];
  }
  const double h = prob.grid_step();
  return simpson_uniform(num, h) / simpson_uniform(den, h);
}

template <typename Shooter>
EigenPair eigen_by_bisection(const RadialProblem& prob, int k,
                             const Shooter& shoot) {
  if (k < 1) throw std::invalid_argument("eigen: k must be >= 1");
  const double cap = prob.lambda_cap() * double(k) * double(k);
  double lo = 0.0, hi = cap;
  if (sturm_count(shoot(hi)) < k)
    throw solver_error("eigenvalue bracket not found below cap=" +
                       format_double(cap) + " (mis-specified problem?)");
  // well inside the 1e-10 contract; the extra digits keep kernel expansions
  // (deep cancellations near the Dirichlet wall) above their positivity floor
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    (sturm_count(shoot(mid)) < k ? lo : hi) = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  auto shot = shoot(lambda);

  EigenPair pair;
  pair.lambda = lambda;
  pair.s = std::move(shot.s);
  pair.psi = std::move(shot.psi);
  pair.dpsi = std::move(shot.dpsi);
  pair.node_count = shot.node_count;
  if (!prob.potential.origin_smooth())
    pair.warnings.push_back(
        "potential is not differentiable at the origin (linear kind): "
        "Frobenius start omits the phi'(0+) correction");

  const auto alpha = weight_on_grid(prob, pair.s);
  std::vector<double> integ(pair.s.size());
  for (std::size_t i = 0; i < integ.size(); ++i)
    integ[i] = alpha[i] * pair.psi[i] * pair.psi[i];
  const double norm2 =
      unit_sphere_area(prob.n) * simpson_uniform(integ, prob.grid_step());
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& v : pair.psi) v *= scale;
  for (auto& v : pair.dpsi) v *= scale;
  pair.normalized = true;
  pair.rayleigh_residual = std::abs(
      rayleigh_with_derivative(prob, pair.s, pair.psi, pair.dpsi) / lambda -
      1.0);
  return pair;
}

}  // namespace detail

/// The k-th radial Dirichlet eigenpair (exactly k-1 interior sign changes),
/// bisected to relative tolerance 1e-10 and normalized in the weighted L2
/// norm. The discrete Rayleigh quotient must reproduce lambda to 1e-6; for
/// oscillatory high modes the gate widens with the discretization floor
/// (sqrt(lambda) h)^4 of the 4th-order scheme.
inline EigenPair kth_radial_eigenvalue(const RadialProblem& prob, int k) {
  if (prob.p != 2.0)
    throw std::domain_error("kth_radial_eigenvalue: requires p = 2");
  detail::CoefficientTable table(prob);
  auto pair = detail::eigen_by_bisection(
      prob, k, [&](double lam) { return shoot_linear(prob, lam, &table); });
  const double floor4 =
      std::pow(std::sqrt(pair.lambda) * prob.grid_step(), 4);
  if (pair.rayleigh_residual > std::max(1e-6, 100.0 * floor4))
    throw solver_error("eigenpair failed the Rayleigh check: residual=" +
                       format_double(pair.rayleigh_residual));
  return pair;
}

inline EigenPair first_eigenvalue(const RadialProblem& prob) {
  return kth_radial_eigenvalue(prob, 1);
}

/// First Dirichlet eigenvalue of the weighted p-Laplacian; p = 2 reproduces
/// first_eigenvalue.
inline EigenPair first_eigenvalue_p(const RadialProblem& prob) {
  detail::CoefficientTable table(prob);
  return detail::eigen_by_bisection(
      prob, 1, [&](double lam) { return shoot_p(prob, lam, &table); });
}

namespace detail {

/// 4th-order first/second derivative stencils on a uniform grid.
inline double d1_order4(const std::vector<double>& y, std::size_t i, double h) {
  const std::size_t n = y.size();
  if (i >= 2 && i + 2 < n)
    return (-y[i + 2] + 8 * y[i + 1] - 8 * y[i - 1] + y[i - 2]) / (12 * h);
  if (i < 2)
    return (-25 * y[i] + 48 * y[i + 1] - 36 * y[i + 2] + 16 * y[i + 3] -
            3 * y[i + 4]) / (12 * h);
  return (25 * y[i] - 48 * y[i - 1] + 36 * y[i - 2] - 16 * y[i - 3] +
          3 * y[i - 4]) / (12 * h);
}

inline double d2_order4(const std::vector<double>& y, std::size_t i, double h) {
  const std::size_t n = y.size();
  if (i >= 2 && i + 2 < n)
    return (-y[i + 2] + 16 * y[i + 1] - 30 * y[i] + 16 * y[i - 1] -
            y[i - 2]) / (12 * h * h);
  if (i < 2)
    return (45 * y[i] - 154 * y[i + 1] + 214 * y[i + 2] - 156 * y[i + 3] +
            61 * y[i + 4] - 10 * y[i + 5]) / (12 * h * h);
  return (45 * y[i] - 154 * y[i - 1] + 214 * y[i - 2] - 156 * y[i - 3] +
          61 * y[i - 4] - 10 * y[i - 5]) / (12 * h * h);
}

}  // namespace detail

/// Discrete Rayleigh quotient int |psi'|^p alpha / int |psi|^p alpha on the
/// problem grid, psi' by 4th-order differences. psi must vanish at r0.
inline double rayleigh_quotient(const std::vector<double>& psi,
                                const RadialProblem& prob) {
  const std::size_t n = psi.size();
  if (n != prob.nodes + 1)
    throw std::invalid_argument("rayleigh_quotient: grid size mismatch");
  double peak = 0;
  for (double v : psi) peak = std::max(peak, std::abs(v));
  if (peak == 0) throw std::domain_error("rayleigh_quotient: psi is zero");
  if (std::abs(psi.back()) > 1e-6 * peak)
    throw std::domain_error("rayleigh_quotient: psi(r0) must vanish");

  const double h = prob.grid_step();
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = h * double(i);
  const auto alpha = detail::weight_on_grid(prob, s);
  std::vector<double> num(n), den(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = detail::d1_order4(psi, i, h);
    num[i] = std::pow(std::abs(d), prob.p) * alpha[i];
    den[i] = std::pow(std::abs(psi[i]), prob.p) * alpha[i];
  }
  const double bottom = simpson_uniform(den, h);
  if (bottom <= 0) throw std::domain_error("rayleigh_quotient: zero denominator");
  return simpson_uniform(num, h) / bottom;
}

/// Two-sided bound on the first eigenvalue from a positive trial function
/// vanishing at r0: (inf, sup) over the interior grid of -Delta_phi h / h,
/// excluding a 5-step collar at both ends.
inline std::pair<double, double> barta_bounds(const std::vector<double>& trial,
                                              const RadialProblem& prob) {
  if (prob.p != 2.0) throw std::domain_error("barta_bounds: requires p = 2");
  if (trial.size() != prob.nodes + 1)
    throw std::invalid_argument("barta_bounds: grid size mismatch");
  const double h = prob.grid_step();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  detail::CoefficientTable table(prob);
  for (std::size_t i = 5; i + 5 < trial.size(); ++i) {
    if (!(trial[i] > 0))
      throw std::domain_error(
          "barta_bounds: trial function must be positive in the interior");
    const double s = h * double(i);
    const double lap = detail::d2_order4(trial, i, h) +
                       table.coefficient_exact(s) *
                           detail::d1_order4(trial, i, h);
    const double q = -lap / trial[i];
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return {lo, hi};
}

/// Lower bound on the first p-eigenvalue from a positive trial function:
/// inf over the interior grid (same collar) of -Delta_{p,phi} h / h^{p-1},
/// with Delta_{p,phi} h = |h'|^{p-2} [(p-1) h'' + ((n-1)f'/f - phi') h'].
inline double picone_lower_bound(const std::vector<double>& trial,
                                 const RadialProblem& prob) {
  if (!(prob.p > 1)) throw std::domain_error("picone_lower_bound: p must be > 1");
  if (trial.size() != prob.nodes + 1)
    throw std::invalid_argument("picone_lower_bound: grid size mismatch");
  const double h = prob.grid_step();
  const double p = prob.p;
  double lo = std::numeric_limits<double>::infinity();
  detail::CoefficientTable table(prob);
  for (std::size_t i = 5; i + 5 < trial.size(); ++i) {
    if (!(trial[i] > 0))
      throw std::domain_error(
          "picone_lower_bound: trial function must be positive in the interior");
    const double s = h * double(i);
    const double d1 = detail::d1_order4(trial, i, h);
    const double d2 = detail::d2_order4(trial, i, h);
    const double plap = std::pow(std::abs(d1), p - 2.0) *
                        ((p - 1.0) * d2 + table.coefficient_exact(s) * d1);
    lo = std::min(lo, -plap / std::pow(trial[i], p - 1.0));
  }
  return lo;
}

/// CSV rows s,psi,psip.
inline void write_eigen_csv(std::ostream& os, const EigenPair& pair) {
  os << "# warpspec eigenpair lambda=" << format_double(pair.lambda)
     << " nodes=" << pair.node_count << "\n";
  os << "s,psi,psip\n";
  for (std::size_t i = 0; i < pair.s.size(); ++i)
    os << format_double(pair.s[i]) << ',' << format_double(pair.psi[i]) << ','
       << format_double(pair.dpsi[i]) << "\n";
}

}  // namespace warpspec
