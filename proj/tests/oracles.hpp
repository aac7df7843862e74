#pragma once

// Independent reference computations used only by the tests. None of these
// touch the jet engine: derivatives are plain finite differences of closed
// forms.

#include <cmath>
#include <functional>
#include <numbers>

#include "finsler/linalg.hpp"

namespace oracle {

using finsler::Mat;
using finsler::Vec;

constexpr double kPi = std::numbers::pi;

// 4th-order central first derivative of a scalar function of one variable.
inline double d1(const std::function<double(double)>& f, double t, double h) {
  return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h);
}

inline double d2(const std::function<double(double)>& f, double t, double h) {
  return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h) - f(t + 2 * h)) / (12 * h * h);
}

// Hessian of a function on R^2 by 4th-order differences.
inline Mat<2> hessian(const std::function<double(const Vec<2>&)>& f, const Vec<2>& p, double h) {
  Mat<2> H;
  for (int i = 0; i < 2; ++i) {
    H[i][i] = d2([&](double t) { Vec<2> q = p; q[i] = t; return f(q); }, p[i], h);
  }
  H[0][1] = H[1][0] = d1(
      [&](double s) {
        return d1([&](double t) { Vec<2> q = p; q[0] = s; q[1] = t; return f(q); }, p[1], h);
      },
      p[0], h);
  return H;
}

// Christoffel symbols Gamma[i][j][k] of a Riemannian metric a(x) on R^2.
inline finsler::Arr3<2> christoffel(const std::function<Mat<2>(const Vec<2>&)>& a, const Vec<2>& x,
                                    double h = 1e-3) {
  finsler::Arr3<2> da;  // da[m][j][k] = d_k a_mj
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 2; ++m)
      for (int j = 0; j < 2; ++j)
        da[m][j][k] = d1([&](double t) { Vec<2> q = x; q[k] = t; return a(q)[m][j]; }, x[k], h);
  const Mat<2> ai = finsler::inverse<2, double>(a(x));
  finsler::Arr3<2> G;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double s = 0;
        for (int m = 0; m < 2; ++m) s += ai[i][m] * (da[m][j][k] + da[m][k][j] - da[j][k][m]);
        G[i][j][k] = 0.5 * s;
      }
  return G;
}

// Gauss curvature of a e^{2u} delta by a spectral Laplacian of u sampled on
// an n x n periodic grid of period 2 pi: K = -e^{-2u} lap u.
std::vector<double> conformal_gauss_curvature(const std::function<double(double, double)>& u, int n);

}  // namespace oracle
