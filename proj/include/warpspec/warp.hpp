#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "warpspec/numeric.hpp"
#include "warpspec/profiles.hpp"

namespace warpspec {

/// Solution of the model-space warping ODE f'' + kappa(s) f = 0, f(0)=0,
/// f'(0)=1, sampled on a uniform grid together with the location l of the
/// first zero beyond the origin (infinity() if none was found up to s_max).
///
/// Immutable after construction; safe to share across threads.
class Warping {
 public:
  int n = 0;                 // manifold dimension
  double h = 0;              // grid step
  std::vector<double> f;     // f at 0, h, 2h, ...
  std::vector<double> fp;    // f' at the same nodes
  double l = infinity();     // first positive zero, or infinity()
  double s_max = 0;          // requested integration end
  CurvatureProfile source = CurvatureProfile::constant(0.0);

  static constexpr double infinity() {
    return std::numeric_limits<double>::infinity();
  }

  bool l_finite() const { return std::isfinite(l); }

  /// Largest s at which the positive branch of f is usable.
  double domain_max() const { return std::min(l, s_max); }

  double grid_s(std::size_t i) const { return static_cast<double>(i) * h; }

  /// f(s) by cubic Hermite between stored nodes (f, f' both known).
  double eval_f(double s) const {
    const auto [i, x] = locate(s);
    return hermite_value(f[i], fp[i], f[i + 1], fp[i + 1], h, x);
  }

  /// f'(s); the second derivative needed for the Hermite patch comes from the
  /// ODE identity f'' = -kappa f.
  double eval_fp(double s) const {
    const auto [i, x] = locate(s);
    const double fpp0 = -source.eval(grid_s(i)) * f[i];
    const double fpp1 = -source.eval(grid_s(i + 1)) * f[i + 1];
    return hermite_value(fp[i], fpp0, fp[i + 1], fpp1, h, x);
  }

 private:
  std::pair<std::size_t, double> locate(double s) const {
    if (s < 0 || s > domain_max() * (1 + 1e-12) + 1e-300)
      throw std::domain_error("warping: s=" + format_double(s) +
                              " outside [0, " + format_double(domain_max()) +
                              "]");
    std::size_t i = static_cast<std::size_t>(s / h);
    if (i + 1 >= f.size()) i = f.size() - 2;
    return {i, s - grid_s(i)};
  }
};

/// Integrates the warping ODE with the classical 4th-order one-step method on
/// a fixed grid and locates the first zero by bisection on the interpolating
/// cubic between the bracketing nodes (relative accuracy 1e-10).
inline Warping solve_warping(const CurvatureProfile& profile, int n,
                             double s_max, double h) {
  if (n < 1) throw std::invalid_argument("solve_warping: n must be >= 1");
  if (!(s_max > 0) || !(h > 0))
    throw std::invalid_argument("solve_warping: s_max and h must be > 0");
  if (h > s_max / 100)
    throw std::invalid_argument("solve_warping: step too coarse (h > s_max/100)");
  if (profile.s_max() < s_max)
    throw std::invalid_argument("solve_warping: profile not defined up to s_max");

  const std::size_t N = static_cast<std::size_t>(std::ceil(s_max / h - 1e-9));
  const double hs = s_max / static_cast<double>(N);

  Warping w;
  w.n = n;
  w.h = hs;
  w.s_max = s_max;
  w.source = profile;
  w.f.reserve(N + 1);
  w.fp.reserve(N + 1);
  w.f.push_back(0.0);
  w.fp.push_back(1.0);

  auto rhs = [&profile](double s, const std::array<double, 2>& u)
      -> std::array<double, 2> {
    return {u[1], -profile.eval(s) * u[0]};
  };

  std::array<double, 2> u{0.0, 1.0};
  for (std::size_t i = 0; i < N; ++i) {
    const double s = static_cast<double>(i) * hs;
    u = rk4_step(rhs, s, u, hs);
    if (std::abs(u[0]) < 1e-300 && std::abs(u[1]) < 1e-300)
      throw solver_error("solve_warping: degenerate solution (f and f' vanish)");
    w.f.push_back(u[0]);
    w.fp.push_back(u[1]);

    const double f0 = w.f[i], d0 = w.fp[i];
    const double f1 = w.f[i + 1], d1 = w.fp[i + 1];
    if (i >= 1 && f0 > 0.0 && f1 <= 0.0) {
      // bisect the Hermite cubic for the crossing
      double lo = 0.0, hi = hs;
      while (hi - lo > 1e-10 * (s + hs)) {
        const double mid = 0.5 * (lo + hi);
        (hermite_value(f0, d0, f1, d1, hs, mid) > 0.0 ? lo : hi) = mid;
      }
      w.l = s + 0.5 * (lo + hi);
      return w;  // grid truncated at the crossing node
    }
    if (i >= 1 && f0 > 0.0 && f1 > 0.0 && d0 < 0.0 && d1 > 0.0) {
      // interior minimum of the Hermite patch; a dip below zero means the
      // step cannot bracket the crossing pair
      double m = std::min(f0, f1);
      for (int q = 1; q < 16; ++q)
        m = std::min(m, hermite_value(f0, d0, f1, d1, hs, hs * q / 16.0));
      if (m <= 0.0)
        throw solver_error(
            "solve_warping: step too coarse to bracket a zero crossing near s=" +
            format_double(s));
    }
  }
  return w;
}

/// f'(s)/f(s). Near the origin (s < 10h) the series 1/s - kappa(0) s/3 is
/// blended with the grid value to dodge the 0/0 cancellation.
inline double log_derivative(const Warping& w, double s) {
  if (!(s > 0) || s >= w.domain_max())
    throw std::domain_error("log_derivative: need 0 < s < min(l, s_max)");
  if (s < 10 * w.h) {
    const double series = 1.0 / s - w.source.eval(0.0) * s / 3.0;
    const double blend = s / (10 * w.h);
    return (1 - blend) * series + blend * (w.eval_fp(s) / w.eval_f(s));
  }
  return w.eval_fp(s) / w.eval_f(s);
}

/// Weighted ball volume  w_n * int_0^r f^{n-1} e^{-phi} ds  (composite Simpson
/// over the stored grid, Hermite-interpolated partial last interval).
inline double weighted_ball_volume(const Warping& w, const Potential& pot,
                                   double r) {
  const double top = w.domain_max();
  if (!(r > 0) || r > top * (1 + 1e-9))
    throw std::domain_error("weighted_ball_volume: need 0 < r <= min(l, s_max)");
  r = std::min(r, top);
  auto integrand_at_node = [&](std::size_t i) {
    return std::pow(std::max(w.f[i], 0.0), w.n - 1) * std::exp(-pot.phi(w.grid_s(i)));
  };
  auto integrand_at = [&](double s) {
    return std::pow(std::max(w.eval_f(s), 0.0), w.n - 1) *
           std::exp(-pot.phi(s));
  };
  const std::size_t k = std::min<std::size_t>(
      static_cast<std::size_t>(r / w.h + 1e-12), w.f.size() - 1);
  std::vector<double> vals(k + 1);
  for (std::size_t i = 0; i <= k; ++i) vals[i] = integrand_at_node(i);
  double total = simpson_uniform(vals, w.h);
  const double rest = r - w.grid_s(k);
  if (rest > 1e-14 * std::max(1.0, r)) {
    const double a = w.grid_s(k);
    total += rest / 6.0 *
             (integrand_at(a) + 4.0 * integrand_at(a + rest / 2) +
              integrand_at(a + rest));
  }
  return unit_sphere_area(w.n) * total;
}

/// Ratio (g(s)/f(s))^{n-1}: the Bishop-type density quotient of two warpings
/// sharing dimension and grid.
inline double bishop_ratio(const Warping& numerator, const Warping& denominator,
                           double s) {
  if (numerator.n != denominator.n)
    throw std::invalid_argument("bishop_ratio: dimension mismatch");
  if (std::abs(numerator.h - denominator.h) >
      1e-12 * std::max(numerator.h, denominator.h))
    throw std::invalid_argument("bishop_ratio: grid mismatch");
  if (!(s > 0) || s >= std::min(numerator.domain_max(), denominator.domain_max()))
    throw std::domain_error("bishop_ratio: s outside common domain");
  return std::pow(numerator.eval_f(s) / denominator.eval_f(s),
                  numerator.n - 1);
}

/// CSV rows s,f,fp with the identifying header comment.
inline void write_warping_csv(std::ostream& os, const Warping& w) {
  os << "# warpspec warping n=" << w.n << " h=" << format_double(w.h) << " l="
     << (w.l_finite() ? format_double(w.l) : std::string("inf")) << "\n";
  os << "s,f,fp\n";
  for (std::size_t i = 0; i < w.f.size(); ++i)
    os << format_double(w.grid_s(i)) << ',' << format_double(w.f[i]) << ','
       << format_double(w.fp[i]) << "\n";
}

}  // namespace warpspec
