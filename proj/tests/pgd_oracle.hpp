// Test-only oracle: first p-Laplacian eigenvalue as the minimum of the
// discrete Rayleigh quotient  int |psi'|^p alpha / int |psi|^p alpha
// over radial profiles with psi(r0) = 0, found by projected gradient descent
// (descent direction preconditioned by the p=2 stiffness, monotone
// backtracking line search). Independent of the shooting path.

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "fd_oracle.hpp"

namespace oracle {

struct PgdProblem {
  int n = 2;
  double p = 2.0;
  std::function<double(double)> f;
  std::function<double(double)> phi;
  double r0 = 1.0;
  std::size_t cells = 2000;
  int iterations = 800;
};

inline double pgd_first_eigenvalue_p(const PgdProblem& prob) {
  const std::size_t M = prob.cells;
  const double dr = prob.r0 / static_cast<double>(M);
  const double p = prob.p;
  auto alpha = [&](double s) {
    return std::pow(prob.f(s), prob.n - 1) * std::exp(-prob.phi(s));
  };

  std::vector<double> w(M + 1, dr), a(M + 1), ah(M);
  w[0] = w[M] = dr / 2;
  for (std::size_t i = 0; i <= M; ++i) a[i] = alpha(double(i) * dr);
  for (std::size_t i = 0; i < M; ++i) ah[i] = alpha((double(i) + 0.5) * dr);

  // p=2 stiffness + mass shift on the free nodes 0..M-1 as preconditioner
  std::vector<double> diag(M), lower(M - 1), upper(M - 1);
  diag[0] = ah[0] / dr + a[0] * dr;
  for (std::size_t i = 1; i < M; ++i)
    diag[i] = (ah[i - 1] + ah[i]) / dr + a[i] * dr;
  for (std::size_t i = 0; i + 1 < M; ++i) lower[i] = upper[i] = -ah[i] / dr;

  auto quotient_gradient = [&](const std::vector<double>& psi, double& R,
                               std::vector<double>& g) {
    double A = 0, B = 0;
    std::vector<double> t(M);
    for (std::size_t i = 0; i < M; ++i) {
      const double d = (psi[i + 1] - psi[i]) / dr;
      A += ah[i] * std::pow(std::abs(d), p) * dr;
      t[i] = p * std::copysign(std::pow(std::abs(d), p - 1), d) * ah[i];
    }
    for (std::size_t i = 0; i <= M; ++i)
      B += w[i] * a[i] * std::pow(std::abs(psi[i]), p);
    R = A / B;
    g.assign(M + 1, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
      g[i] -= t[i];
      g[i + 1] += t[i];
    }
    for (std::size_t i = 0; i <= M; ++i)
      g[i] -= R * p * std::copysign(std::pow(std::abs(psi[i]), p - 1), psi[i]) *
              a[i] * w[i];
    for (auto& v : g) v /= B;
    g[M] = 0.0;
  };
  auto project = [&](std::vector<double> x) {
    x[M] = 0.0;
    double nrm = 0;
    for (std::size_t i = 0; i <= M; ++i)
      nrm += w[i] * a[i] * std::pow(std::abs(x[i]), p);
    nrm = std::pow(nrm, 1.0 / p);
    for (auto& v : x) v /= nrm;
    return x;
  };

  std::vector<double> psi(M + 1);
  for (std::size_t i = 0; i <= M; ++i) {
    const double s = double(i) * dr / prob.r0;
    psi[i] = 1.0 - s * s;
  }
  psi = project(psi);
  double R;
  std::vector<double> g;
  quotient_gradient(psi, R, g);
  for (int it = 0; it < prob.iterations; ++it) {
    std::vector<double> z(M + 1, 0.0);
    {
      std::vector<double> rhs(g.begin(), g.begin() + M);
      auto sol = detail::thomas(lower, diag, upper, rhs);
      for (std::size_t i = 0; i < M; ++i) z[i] = sol[i];
    }
    double eta = 1.0;
    bool improved = false;
    std::vector<double> cand, gc;
    double Rc = 0;
    for (int back = 0; back < 60; ++back) {
      cand = psi;
      for (std::size_t i = 0; i <= M; ++i) cand[i] -= eta * z[i];
      cand = project(std::move(cand));
      quotient_gradient(cand, Rc, gc);
      if (std::isfinite(Rc) && Rc < R - 1e-16) {
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!improved) break;
    psi = std::move(cand);
    R = Rc;
    g = std::move(gc);
  }
  return R;
}

}  // namespace oracle
