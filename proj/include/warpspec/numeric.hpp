#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace warpspec {

/// Shortest round-trip decimal representation (deterministic, locale-free).
inline std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline double sgnpow(double x, double a) {
  double m = std::abs(x);
  if (m == 0.0) return 0.0;
  if (m < 1e-300) m = 1e-300;  // underflow floor
  return std::copysign(std::pow(m, a), x);
}

/// Cubic Hermite on [0, h]: values/derivatives at both ends.
inline double hermite_value(double y0, double d0, double y1, double d1,
                            double h, double x) {
  const double t = x / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 +
         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

inline double hermite_derivative(double y0, double d0, double y1, double d1,
                                 double h, double x) {
  const double t = x / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * d0 +
          (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * h * d1) / h;
}

/// Composite Simpson on a uniform grid; odd interval counts finished with
/// the 3/8 rule so the scheme stays 4th order.
inline double simpson_uniform(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  if (n == 3) return h / 3.0 * (y[0] + 4 * y[1] + y[2]);
  std::size_t m = n - 1;  // intervals
  double total = 0.0;
  std::size_t last = m;
  if (m % 2 == 1) {
    // 3/8 rule on the final three intervals
    total += 3.0 * h / 8.0 *
             (y[n - 4] + 3 * y[n - 3] + 3 * y[n - 2] + y[n - 1]);
    last = m - 3;
  }
  for (std::size_t i = 0; i + 2 <= last; i += 2)
    total += h / 3.0 * (y[i] + 4 * y[i + 1] + y[i + 2]);
  return total;
}

/// One classical 4th-order step for a 2-state first-order system.
template <typename Rhs>
inline std::array<double, 2> rk4_step(const Rhs& rhs, double s,
                                      const std::array<double, 2>& u,
                                      double h) {
  const auto k1 = rhs(s, u);
  const auto k2 = rhs(s + h / 2, {u[0] + h / 2 * k1[0], u[1] + h / 2 * k1[1]});
  const auto k3 = rhs(s + h / 2, {u[0] + h / 2 * k2[0], u[1] + h / 2 * k2[1]});
  const auto k4 = rhs(s + h, {u[0] + h * k3[0], u[1] + h * k3[1]});
  return {u[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          u[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

/// Thomas solve for a tridiagonal system; diagonals passed by value since the
/// sweep destroys them.
inline std::vector<double> tridiag_solve(std::vector<double> lower,
                                         std::vector<double> diag,
                                         std::vector<double> upper,
                                         std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i - 1] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

/// Monotone piecewise-cubic interpolant (Fritsch–Carlson slope limiting):
/// no overshoot between nodes, exact at nodes.
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      throw std::invalid_argument("pchip: need >= 2 nodes, matching sizes");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(x_[i + 1] > x_[i]))
        throw std::invalid_argument("pchip: grid must be strictly increasing");
    m_.resize(n);
    std::vector<double> d(n - 1), hs(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      hs[i] = x_[i + 1] - x_[i];
      d[i] = (y_[i + 1] - y_[i]) / hs[i];
    }
    if (n == 2) {
      m_[0] = m_[1] = d[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
        m_[i] = 0.0;
      } else {
        const double w1 = 2 * hs[i] + hs[i - 1];
        const double w2 = hs[i] + 2 * hs[i - 1];
        m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    m_[0] = edge_slope(hs[0], hs[1], d[0], d[1]);
    m_[n - 1] = edge_slope(hs[n - 2], hs[n - 3], d[n - 2], d[n - 3]);
  }

  double min_x() const { return x_.front(); }
  double max_x() const { return x_.back(); }

  double value(double x) const {
    const std::size_t i = locate(x);
    return hermite_value(y_[i], m_[i], y_[i + 1], m_[i + 1],
                         x_[i + 1] - x_[i], x - x_[i]);
  }

  double derivative(double x) const {
    const std::size_t i = locate(x);
    return hermite_derivative(y_[i], m_[i], y_[i + 1], m_[i + 1],
                              x_[i + 1] - x_[i], x - x_[i]);
  }

 private:
  static double edge_slope(double h0, double h1, double d0, double d1) {
    // shape-preserving three-point endpoint formula
    double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0)
      m = 0.0;
    else if (d0 * d1 <= 0 && std::abs(m) > 3 * std::abs(d0))
      m = 3 * d0;
    return m;
  }

  std::size_t locate(double x) const {
    if (x <= x_.front()) return 0;
    if (x >= x_[x_.size() - 2]) return x_.size() - 2;
    std::size_t lo = 0, hi = x_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (x_[mid] <= x ? lo : hi) = mid;
    }
    return lo;
  }

  std::vector<double> x_, y_, m_;
};

/// (n-1)-volume of the unit sphere S^{n-1}; n=1 gives 2 (two points).
inline double unit_sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace warpspec
