#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "warpspec/numeric.hpp"
#include "warpspec/spectrum.hpp"

namespace warpspec {

/// Closed-form weighted heat kernels. All kinds are radial (functions of the
/// distance r to the base point) except the Mehler pair, whose formula is not
/// a function of |x-y| alone and therefore takes two spatial arguments.
class ClosedFormKernel {
 public:
  enum class Kind {
    euclidean,                  // (4 pi t)^{-n/2} exp(-r^2/4t)
    steady_soliton,             // e^{kr} e^{-t/4} (4 pi t)^{-1/2} exp(-r^2/4t)
    steady_soliton_reflected,   // exact kernel for phi(r)=kr with reflecting origin
    mehler_shrinking,           // phi = x^2
    mehler_expanding,           // phi = -x^2
    hyperbolic3_weighted,       // e^{-t/4}(4 pi t)^{-3/2} (r/sinh r) exp(-r^2/4t)
  };

  static ClosedFormKernel euclidean(int n) {
    if (n < 1) throw std::invalid_argument("euclidean kernel: n >= 1");
    return {Kind::euclidean, n, +1};
  }
  static ClosedFormKernel steady_soliton(int sign) {
    require_unit(sign);
    return {Kind::steady_soliton, 1, sign};
  }
  /// Kernel of u_t = u'' - k u' on the half line with reflecting origin and
  /// unit weighted mass (w_1 = 2): the separable part e^{kr/2 - t/4} G(r,t)
  /// plus the image term (k/4) erfc((r - kt)/(2 sqrt t)).
  static ClosedFormKernel steady_soliton_reflected(int sign) {
    require_unit(sign);
    return {Kind::steady_soliton_reflected, 1, sign};
  }
  static ClosedFormKernel mehler_shrinking() {
    return {Kind::mehler_shrinking, 1, +1};
  }
  static ClosedFormKernel mehler_expanding() {
    return {Kind::mehler_expanding, 1, -1};
  }
  static ClosedFormKernel hyperbolic3_weighted() {
    return {Kind::hyperbolic3_weighted, 3, +1};
  }

  Kind kind() const { return kind_; }
  bool takes_two_points() const {
    return kind_ == Kind::mehler_shrinking || kind_ == Kind::mehler_expanding;
  }

  double eval_radial(double r, double t) const {
    check_t(t);
    if (r < 0) throw std::domain_error("kernel: r must be >= 0");
    if (takes_two_points())
      throw std::invalid_argument(
          "Mehler kernels take two spatial arguments; use eval_two_point");
    const double gauss =
        std::exp(-r * r / (4 * t)) / std::sqrt(4 * M_PI * t);
    switch (kind_) {
      case Kind::euclidean:
        return std::exp(-r * r / (4 * t)) /
               std::pow(4 * M_PI * t, 0.5 * n_);
      case Kind::steady_soliton:
        return std::exp(sign_ * r - t / 4) * gauss;
      case Kind::steady_soliton_reflected:
        return std::exp(sign_ * r / 2 - t / 4) * gauss +
               sign_ * 0.25 * std::erfc((r - sign_ * t) / (2 * std::sqrt(t)));
      case Kind::hyperbolic3_weighted: {
        double ratio;  // r / sinh r with its removable singularity
        if (r < 1e-6) {
          const double r2 = r * r;
          ratio = 1.0 - r2 / 6.0 + 7.0 * r2 * r2 / 360.0;
        } else {
          ratio = r / std::sinh(r);
        }
        return std::exp(-t / 4) / std::pow(4 * M_PI * t, 1.5) * ratio *
               std::exp(-r * r / (4 * t));
      }
      default:
        throw std::logic_error("unreachable");
    }
  }

  double eval_two_point(double x, double y, double t) const {
    check_t(t);
    if (!takes_two_points()) return eval_radial(std::abs(x - y), t);
    const double e2 = std::exp(-2 * t), e4 = std::exp(-4 * t);
    const double denom = 1.0 - e4;
    if (kind_ == Kind::mehler_shrinking)
      return std::exp((2 * x * y * e2 - (x * x + y * y) * e4) / denom + t) /
             std::sqrt(2 * M_PI * std::sinh(2 * t));
    return std::exp((2 * x * y * e2 - (x * x + y * y)) / denom - t) /
           std::sqrt(2 * M_PI * std::sinh(2 * t));
  }

 private:
  static void require_unit(int k) {
    if (k != 1 && k != -1)
      throw std::invalid_argument("soliton kernel: sign must be +1 or -1");
  }
  static void check_t(double t) {
    if (!(t > 0)) throw std::domain_error("kernel: t must be > 0");
  }
  ClosedFormKernel(Kind kind, int n, int sign)
      : kind_(kind), n_(n), sign_(sign) {}

  Kind kind_;
  int n_;
  int sign_;
};

inline double closed_form_eval(const ClosedFormKernel& kernel, double r,
                               double t) {
  return kernel.eval_radial(r, t);
}

enum class BoundaryCondition { dirichlet, neumann };

inline const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
}

/// Center-based kernel values H(r_i, t_j) on a product grid, with the
/// weighted line density w_n f^{n-1} e^{-phi} stored alongside so mass
/// integrals need no further geometry.
struct KernelGrid {
  std::vector<double> r;
  std::vector<double> t;
  std::vector<double> H;  // row-major: H[j * r.size() + i] = H(r[i], t[j])
  std::vector<double> weight;
  // For stepping grids: w_n * int_cell f^{n-1} e^{-phi}, the cell masses the
  // scheme conserves exactly; empty on expansion grids.
  std::vector<double> cell_mass;
  BoundaryCondition boundary = BoundaryCondition::dirichlet;
  int modes_used = 0;  // expansion mode count; 0 for time stepping
  double t0 = 0, dt = 0;
  std::vector<std::string> warnings;

  double at(std::size_t ir, std::size_t it) const {
    return H[it * r.size() + ir];
  }
  std::size_t t_index(double tq) const {
    for (std::size_t j = 0; j < t.size(); ++j)
      if (std::abs(t[j] - tq) <= 1e-12 * std::max(1.0, std::abs(tq))) return j;
    throw std::domain_error("kernel grid: t=" + format_double(tq) +
                            " not on the stored grid");
  }
};

namespace detail {

inline double eigen_value_at(const EigenPair& pair, double r, double h) {
  if (r <= 0) return pair.psi[0];
  std::size_t i = static_cast<std::size_t>(r / h);
  if (i + 1 >= pair.psi.size()) i = pair.psi.size() - 2;
  return hermite_value(pair.psi[i], pair.dpsi[i], pair.psi[i + 1],
                       pair.dpsi[i + 1], h, r - double(i) * h);
}

/// First K radial Dirichlet eigenpairs, reusing one coefficient table.
inline std::vector<EigenPair> radial_basis(const RadialProblem& prob, int K) {
  std::vector<EigenPair> basis;
  basis.reserve(K);
  for (int k = 1; k <= K; ++k)
    basis.push_back(kth_radial_eigenvalue(prob, k));
  return basis;
}

struct TailModel {
  double lambda1 = 0, lambda_last = 0, gap = 0, amplitude = 0;
  int K = 0;

  double lambda_hat(int j) const {  // estimated lambda_{K+j}, j >= 1
    const double weyl = 0.5 * lambda1 * double(K + j) * double(K + j);
    return std::max(weyl, lambda_last + 0.5 * gap * double(j));
  }
  double tail(double t) const {
    double sum = 0;
    for (int j = 1; j <= 400; ++j) sum += std::exp(-lambda_hat(j) * t);
    return amplitude * sum;
  }
  double admissible_t(double tol) const {
    double lo = 1e-12, hi = 1e-12;
    while (tail(hi) > tol && hi < 1e9) hi *= 2;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (tail(mid) > tol ? lo : hi) = mid;
    }
    return hi;
  }
};

inline TailModel make_tail_model(const std::vector<EigenPair>& basis) {
  TailModel m;
  m.K = static_cast<int>(basis.size());
  m.lambda1 = basis.front().lambda;
  m.lambda_last = basis.back().lambda;
  m.gap = (m.K >= 2)
              ? std::max(m.lambda_last - basis[m.K - 2].lambda, m.lambda1)
              : m.lambda1;
  double amp = 0;
  for (const auto& mode : basis) {
    double sup = 0;
    for (double v : mode.psi) sup = std::max(sup, std::abs(v));
    amp = std::max(amp, std::abs(mode.psi[0]) * sup);
  }
  m.amplitude = amp;
  return m;
}

inline std::vector<double> weight_vector(const RadialProblem& prob,
                                         const std::vector<double>& r) {
  auto alpha = weight_on_grid(prob, r);
  const double wn = unit_sphere_area(prob.n);
  for (auto& a : alpha) a *= wn;
  return alpha;
}

}  // namespace detail

/// Center-based eigenfunction-expansion kernel
///   H(r, t) = sum_{k<=K} e^{-lambda_k t} psi_k(0) psi_k(r)
/// over normalized radial Dirichlet modes. Refuses when the truncation tail
/// bound at min(t_grid) exceeds tail_tol, reporting the smallest admissible
/// start time.
inline KernelGrid expansion_kernel(const RadialProblem& prob, int K,
                                   const std::vector<double>& r_grid,
                                   const std::vector<double>& t_grid,
                                   double tail_tol = 1e-8) {
  if (prob.p != 2.0) throw std::domain_error("expansion_kernel: requires p = 2");
  if (K < 1) throw std::invalid_argument("expansion_kernel: K >= 1");
  if (r_grid.empty() || t_grid.empty())
    throw std::invalid_argument("expansion_kernel: empty grid");
  for (double t : t_grid)
    if (!(t > 0)) throw std::domain_error("expansion_kernel: t must be > 0");
  for (double r : r_grid)
    if (r < 0 || r > prob.r0 * (1 + 1e-12))
      throw std::domain_error("expansion_kernel: r outside [0, r0]");

  const auto basis = detail::radial_basis(prob, K);
  const double t_min = *std::min_element(t_grid.begin(), t_grid.end());
  const auto tail = detail::make_tail_model(basis);
  if (tail.tail(t_min) > tail_tol)
    throw solver_error(
        "expansion_kernel: truncation tail bound " +
        format_double(tail.tail(t_min)) + " exceeds tolerance " +
        format_double(tail_tol) + " at t_min=" + format_double(t_min) +
        "; minimal admissible t_min=" +
        format_double(tail.admissible_t(tail_tol)) +
        " (or increase K)");

  KernelGrid grid;
  grid.r = r_grid;
  grid.t = t_grid;
  grid.boundary = BoundaryCondition::dirichlet;
  grid.modes_used = K;
  grid.weight = detail::weight_vector(prob, r_grid);
  grid.H.resize(r_grid.size() * t_grid.size());
  const double h = prob.grid_step();
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
      double sum = 0;
      for (const auto& mode : basis)
        sum += std::exp(-mode.lambda * t_grid[j]) * mode.psi[0] *
               detail::eigen_value_at(mode, r_grid[i], h);
      grid.H[j * r_grid.size() + i] = sum;
    }
  }
  return grid;
}

/// Crank-Nicolson time stepping of the radial weighted heat equation in
/// conservative (finite-volume) form
///   V_i du_i/dt = [b_{i+1/2}(u_{i+1}-u_i) - b_{i-1/2}(u_i-u_{i-1})] / dr,
/// b = f^{n-1} e^{-phi} at half nodes, which keeps the weighted mass exactly
/// constant under reflecting/Neumann boundaries. Starts from the expansion
/// kernel profile at t0 (the modes needed are chosen so the truncation at t0
/// is below 1e-12 of scale).
///
/// The origin row reduces to u_t = n u_rr by the even symmetry of the kernel;
/// a Dirichlet wall at r0 absorbs, a Neumann wall reflects.
inline KernelGrid cn_kernel(const RadialProblem& prob, double t0, double dt,
                            double T,
                            BoundaryCondition boundary = BoundaryCondition::dirichlet,
                            std::size_t space_nodes = 1024,
                            std::size_t max_stored_times = 600) {
  if (prob.p != 2.0) throw std::domain_error("cn_kernel: requires p = 2");
  if (!(t0 > 0)) throw std::domain_error("cn_kernel: t0 must be > 0");
  if (!(T > t0)) throw std::invalid_argument("cn_kernel: need T > t0");
  if (!(dt > 0) || dt > (T - t0) / 10)
    throw std::invalid_argument("cn_kernel: dt must satisfy 0 < dt <= (T-t0)/10");
  // snap dt down so the last step lands exactly on T
  const auto steps =
      static_cast<std::size_t>(std::ceil((T - t0) / dt - 1e-9));
  dt = (T - t0) / static_cast<double>(steps);

  const std::size_t M = space_nodes;
  const double dr = prob.r0 / static_cast<double>(M);
  std::vector<double> r(M + 1);
  for (std::size_t i = 0; i <= M; ++i) r[i] = dr * double(i);

  // half-node flux coefficients and cell volumes of the weighted density
  auto density = [&](double s) {
    double fpow = 1.0;
    if (!prob.one_dim())
      fpow = std::pow(std::max(s == 0.0 ? 0.0 : prob.warping.eval_f(s), 0.0),
                      prob.n - 1);
    return fpow * std::exp(-prob.potential.phi(s));
  };
  std::vector<double> b(M);
  for (std::size_t i = 0; i < M; ++i) b[i] = density(r[i] + dr / 2);
  std::vector<double> V(M + 1);
  auto cell_volume = [&](double a0, double a1) {
    // 3-point Simpson over one cell
    return (a1 - a0) / 6.0 *
           (density(a0) + 4 * density(0.5 * (a0 + a1)) + density(a1));
  };
  V[0] = cell_volume(0.0, dr / 2);
  for (std::size_t i = 1; i < M; ++i)
    V[i] = cell_volume(r[i] - dr / 2, r[i] + dr / 2);
  V[M] = cell_volume(prob.r0 - dr / 2, prob.r0);

  const bool dirichlet = boundary == BoundaryCondition::dirichlet;
  const std::size_t nu = dirichlet ? M : M + 1;  // active unknowns

  // L u|_i = [b_i (u_{i+1}-u_i) - b_{i-1}(u_i-u_{i-1})]/dr, row-scaled by V_i
  auto build = [&](double scale, std::vector<double>& lower,
                   std::vector<double>& diag, std::vector<double>& upper) {
    lower.assign(nu - 1, 0.0);
    diag.assign(nu, 0.0);
    upper.assign(nu - 1, 0.0);
    for (std::size_t i = 0; i < nu; ++i) {
      const double out_right = (i < M) ? b[i] : 0.0;
      const double out_left = (i > 0) ? b[i - 1] : 0.0;
      diag[i] = 1.0 - scale * (-(out_left + out_right) / (dr * V[i]));
      if (i > 0) lower[i - 1] = -scale * (out_left / (dr * V[i]));
      if (i + 1 < nu) upper[i] = -scale * (out_right / (dr * V[i]));
    }
  };
  std::vector<double> lw, dg, up;   // implicit side (I - dt/2 L)
  std::vector<double> lwe, dge, upe;  // explicit side (I + dt/2 L)
  build(+dt / 2, lw, dg, up);
  build(-dt / 2, lwe, dge, upe);

  // Seed from the expansion at t0. Modes grow until the amplitude-weighted
  // truncation tail sits below 1e-12, and the basis is shot on a refined grid:
  // near the wall the seed is a deep cancellation (terms of size ~1e-2 summing
  // to ~1e-22), so mode-shape errors ~e^{-lambda t0}(sqrt(lambda) h)^4 set the
  // floor of the seed values and must stay below the 1e-10 positivity budget.
  std::vector<double> u(M + 1);
  {
    RadialProblem seed_prob = prob;
    seed_prob.nodes = std::max<std::size_t>(prob.nodes, 16384);
    int K = 16;
    std::vector<EigenPair> basis = detail::radial_basis(seed_prob, K);
    while (detail::make_tail_model(basis).tail(t0) > 1e-12 && K < 512) {
      const int add = std::max(8, K / 2);
      for (int k = K + 1; k <= K + add; ++k)
        basis.push_back(kth_radial_eigenvalue(seed_prob, k));
      K += add;
    }
    const double h = seed_prob.grid_step();
    for (std::size_t i = 0; i <= M; ++i) {
      double sum = 0;
      for (const auto& mode : basis)
        sum += std::exp(-mode.lambda * t0) * mode.psi[0] *
               detail::eigen_value_at(mode, r[i], h);
      u[i] = sum;
    }
    if (dirichlet) u[M] = 0.0;
  }

  const std::size_t stride = steps / max_stored_times + 1;

  KernelGrid grid;
  grid.boundary = boundary;
  grid.modes_used = 0;
  grid.t0 = t0;
  grid.dt = dt;
  grid.r = r;
  grid.weight = detail::weight_vector(prob, r);
  grid.cell_mass.resize(M + 1);
  for (std::size_t i = 0; i <= M; ++i)
    grid.cell_mass[i] = unit_sphere_area(prob.n) * V[i];
  grid.t.push_back(t0);
  grid.H.insert(grid.H.end(), u.begin(), u.end());

  double min_value = 0.0;
  std::vector<double> rhs(nu);
  for (std::size_t step = 1; step <= steps; ++step) {
    for (std::size_t i = 0; i < nu; ++i) {
      rhs[i] = dge[i] * u[i];
      if (i > 0) rhs[i] += lwe[i - 1] * u[i - 1];
      if (i + 1 < nu) rhs[i] += upe[i] * u[i + 1];
    }
    auto next = tridiag_solve(lw, dg, up, rhs);
    for (std::size_t i = 0; i < nu; ++i) {
      u[i] = next[i];
      min_value = std::min(min_value, u[i]);
    }
    if (dirichlet) u[M] = 0.0;
    if (step % stride == 0 || step == steps) {
      grid.t.push_back(t0 + double(step) * dt);
      grid.H.insert(grid.H.end(), u.begin(), u.end());
    }
  }
  if (min_value < -1e-10)
    grid.warnings.push_back("instability: intermediate value " +
                            format_double(min_value) + " below -1e-10");
  return grid;
}

/// Weighted mass w_n int_0^{r_upper} H(., t) f^{n-1} e^{-phi} dr. Stepping
/// grids sum the conserved cell masses (the scheme's own quadrature, so
/// Neumann conservation holds to rounding); expansion grids use Simpson over
/// the nodal weights.
inline double kernel_mass(const KernelGrid& grid, double t,
                          double r_upper = std::numeric_limits<double>::infinity()) {
  const std::size_t j = grid.t_index(t);
  std::size_t count = grid.r.size();
  if (std::isfinite(r_upper)) {
    count = 0;
    while (count < grid.r.size() && grid.r[count] <= r_upper * (1 + 1e-12))
      ++count;
    if (count < 2) throw std::domain_error("kernel_mass: r_upper too small");
  }
  if (!grid.cell_mass.empty()) {
    double sum = 0;
    for (std::size_t i = 0; i < count; ++i)
      sum += grid.cell_mass[i] * grid.at(i, j);
    return sum;
  }
  const double dr = grid.r[1] - grid.r[0];
  for (std::size_t i = 1; i < count; ++i)
    if (std::abs(grid.r[i] - grid.r[i - 1] - dr) > 1e-9 * std::max(dr, 1.0))
      throw std::invalid_argument("kernel_mass: needs a uniform radial grid");
  std::vector<double> vals(count);
  for (std::size_t i = 0; i < count; ++i)
    vals[i] = grid.at(i, j) * grid.weight[i];
  return simpson_uniform(vals, dr);
}

/// Long-format CSV rows r,t,H.
inline void write_kernel_csv(std::ostream& os, const KernelGrid& grid) {
  os << "# warpspec kernel boundary=" << to_string(grid.boundary)
     << " modes=" << grid.modes_used << "\n";
  os << "r,t,H\n";
  for (std::size_t j = 0; j < grid.t.size(); ++j)
    for (std::size_t i = 0; i < grid.r.size(); ++i)
      os << format_double(grid.r[i]) << ',' << format_double(grid.t[j]) << ','
         << format_double(grid.at(i, j)) << "\n";
}

}  // namespace warpspec
