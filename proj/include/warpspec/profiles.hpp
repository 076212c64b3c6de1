#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "warpspec/numeric.hpp"

namespace warpspec {

namespace detail {
// Domain guard with a hair of slack so integrator endpoints at s_max do not
// trip on rounding.
inline void check_domain(double s, double s_max, const char* what) {
  const double slack = 1e-12 * std::max(1.0, std::abs(s_max));
  if (s < -slack || s > s_max + slack)
    throw std::domain_error(std::string(what) + ": s=" + format_double(s) +
                            " outside [0, " + format_double(s_max) + "]");
}
}  // namespace detail

/// Radial curvature bound kappa(s): the coefficient of the warping ODE
/// f'' + kappa f = 0. Evaluation is pure and deterministic.
class CurvatureProfile {
 public:
  struct Constant {
    double k;
  };
  struct Polynomial {
    std::vector<double> coeffs;  // c0 + c1 s + c2 s^2 + ...
  };
  struct Tabulated {
    Pchip interp;
  };
  struct Named {
    std::string id;
  };

  static CurvatureProfile constant(double k, double s_max = default_s_max()) {
    return CurvatureProfile(Constant{k}, s_max);
  }

  static CurvatureProfile polynomial(std::vector<double> coeffs,
                                     double s_max = default_s_max()) {
    return CurvatureProfile(Polynomial{std::move(coeffs)}, s_max);
  }

  /// Tabulated profiles interpolate monotonically (no overshoot); the s-grid
  /// must be strictly increasing and start at 0. Domain ends at the last node.
  static CurvatureProfile tabulated(std::vector<double> s,
                                    std::vector<double> kappa) {
    if (s.size() < 2) throw std::invalid_argument("tabulated: need >= 2 nodes");
    if (s.front() != 0.0)
      throw std::invalid_argument("tabulated: s-grid must start at 0");
    const double s_max = s.back();
    return CurvatureProfile(Tabulated{Pchip(std::move(s), std::move(kappa))},
                            s_max);
  }

  /// Built-in ids: "euclidean" (0), "sphere" (+1), "hyperbolic" (-1),
  /// "gaussian_bump" (exp(-s^2)).
  static CurvatureProfile named(const std::string& id,
                                double s_max = default_s_max()) {
    if (id != "euclidean" && id != "sphere" && id != "hyperbolic" &&
        id != "gaussian_bump")
      throw std::invalid_argument("unknown curvature profile id: " + id);
    return CurvatureProfile(Named{id}, s_max);
  }

  static constexpr double default_s_max() { return 1e30; }

  double s_max() const { return s_max_; }

  double eval(double s) const {
    detail::check_domain(s, s_max_, "curvature profile");
    if (const auto* c = std::get_if<Constant>(&kind_)) return c->k;
    if (const auto* p = std::get_if<Polynomial>(&kind_)) {
      double v = 0.0;
      for (std::size_t i = p->coeffs.size(); i-- > 0;)
        v = v * s + p->coeffs[i];
      return v;
    }
    if (const auto* t = std::get_if<Tabulated>(&kind_)) return t->interp.value(s);
    const auto& id = std::get<Named>(kind_).id;
    if (id == "euclidean") return 0.0;
    if (id == "sphere") return 1.0;
    if (id == "hyperbolic") return -1.0;
    return std::exp(-s * s);  // gaussian_bump
  }

  bool is_constant() const { return std::holds_alternative<Constant>(kind_); }

 private:
  CurvatureProfile(std::variant<Constant, Polynomial, Tabulated, Named> kind,
                   double s_max)
      : kind_(std::move(kind)), s_max_(s_max) {
    if (!(s_max_ > 0)) throw std::invalid_argument("profile: s_max must be > 0");
  }

  std::variant<Constant, Polynomial, Tabulated, Named> kind_;
  double s_max_;
};

inline double eval_curvature(const CurvatureProfile& profile, double s) {
  return profile.eval(s);
}

/// Radial potential phi(s) together with its derivative.
///
/// Built-ins: constant c, linear ks (k=+-1), quadratic ks^2 (k=+-1), and
/// hyperbolic_log phi(r) = -2 log(r/sinh r). The linear kind is the only one
/// whose derivative does not vanish at the origin (origin_smooth() == false);
/// consumers record a warning when they meet it.
class Potential {
 public:
  enum class Kind { constant, linear, quadratic, hyperbolic_log, tabulated };

  static Potential constant(double c, double s_max = default_s_max()) {
    Potential p(Kind::constant, s_max);
    p.param_ = c;
    return p;
  }

  static Potential linear(int k, double s_max = default_s_max()) {
    require_unit(k);
    Potential p(Kind::linear, s_max);
    p.param_ = k;
    return p;
  }

  static Potential quadratic(int k, double s_max = default_s_max()) {
    require_unit(k);
    Potential p(Kind::quadratic, s_max);
    p.param_ = k;
    return p;
  }

  static Potential hyperbolic_log(double s_max = default_s_max()) {
    return Potential(Kind::hyperbolic_log, s_max);
  }

  static Potential tabulated(std::vector<double> s, std::vector<double> phi) {
    if (s.size() < 2) throw std::invalid_argument("tabulated: need >= 2 nodes");
    if (s.front() != 0.0)
      throw std::invalid_argument("tabulated: s-grid must start at 0");
    const double s_max = s.back();
    Potential p(Kind::tabulated, s_max);
    p.interp_ = Pchip(std::move(s), std::move(phi));
    return p;
  }

  static constexpr double default_s_max() { return 1e30; }

  Kind kind() const { return kind_; }
  double s_max() const { return s_max_; }

  /// phi'(0) = 0 (or phi constant) for every kind except linear.
  bool origin_smooth() const { return kind_ != Kind::linear; }

  struct Value {
    double phi;
    double dphi;
  };

  Value eval(double s) const {
    detail::check_domain(s, s_max_, "potential");
    switch (kind_) {
      case Kind::constant:
        return {param_, 0.0};
      case Kind::linear:
        return {param_ * s, param_};
      case Kind::quadratic:
        return {param_ * s * s, 2.0 * param_ * s};
      case Kind::hyperbolic_log: {
        if (s < 1e-6) {
          // series of 2 log(sinh r / r): removable singularity at 0
          const double s2 = s * s;
          return {s2 / 3.0 - s2 * s2 / 90.0,
                  2.0 * s / 3.0 - 2.0 * s * s2 / 45.0};
        }
        return {2.0 * std::log(std::sinh(s) / s),
                2.0 / std::tanh(s) - 2.0 / s};
      }
      case Kind::tabulated:
        return {interp_.value(s), interp_.derivative(s)};
    }
    throw std::logic_error("unreachable");
  }

  double phi(double s) const { return eval(s).phi; }
  double dphi(double s) const { return eval(s).dphi; }

 private:
  static void require_unit(int k) {
    if (k != 1 && k != -1)
      throw std::invalid_argument("potential: k must be +1 or -1");
  }

  Potential(Kind kind, double s_max) : kind_(kind), s_max_(s_max) {
    if (!(s_max_ > 0)) throw std::invalid_argument("potential: s_max must be > 0");
  }

  Kind kind_;
  double param_ = 0.0;
  Pchip interp_;
  double s_max_;
};

inline Potential::Value eval_potential(const Potential& potential, double s) {
  return potential.eval(s);
}

}  // namespace warpspec
