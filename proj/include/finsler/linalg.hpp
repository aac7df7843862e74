#pragma once

// Fixed-size dense helpers for the n x n blocks that show up in every
// Finsler computation. Scalar type is generic so the same code runs on
// doubles and on Taylor jets.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace finsler {

template <int N, class T = double>
using Vec = std::array<T, N>;

template <int N, class T = double>
using Mat = std::array<std::array<T, N>, N>;

template <int N, class T = double>
using Arr3 = std::array<Mat<N, T>, N>;

template <int N, class T = double>
using Arr4 = std::array<Arr3<N, T>, N>;

template <int N, class T>
T determinant(const Mat<N, T>& a) {
  static_assert(N == 2 || N == 3, "only n = 2, 3 supported");
  if constexpr (N == 2) {
    return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  } else {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  }
}

// Adjugate over determinant. Caller is responsible for checking det != 0.
template <int N, class T>
Mat<N, T> inverse(const Mat<N, T>& a) {
  static_assert(N == 2 || N == 3, "only n = 2, 3 supported");
  const T det = determinant<N, T>(a);
  const T inv = T(1.0) / det;
  Mat<N, T> r;
  if constexpr (N == 2) {
    r[0][0] = a[1][1] * inv;
    r[0][1] = -(a[0][1] * inv);
    r[1][0] = -(a[1][0] * inv);
    r[1][1] = a[0][0] * inv;
  } else {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
        const int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
        r[i][j] = (a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]) * inv;
      }
    }
  }
  return r;
}

// Eigenvalues of a real symmetric matrix, ascending.
template <int N>
Vec<N> symmetric_eigenvalues(const Mat<N>& a) {
  static_assert(N == 2 || N == 3, "only n = 2, 3 supported");
  Vec<N> ev;
  if constexpr (N == 2) {
    const double m = 0.5 * (a[0][0] + a[1][1]);
    const double d = 0.5 * (a[0][0] - a[1][1]);
    const double r = std::hypot(d, 0.5 * (a[0][1] + a[1][0]));
    ev = {m - r, m + r};
  } else {
    // cyclic Jacobi; converges to machine precision in a handful of sweeps
    Mat<3> m = a;
    for (int sweep = 0; sweep < 50; ++sweep) {
      const double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
      if (off < 1e-300) break;
      for (int p = 0; p < 2; ++p) {
        for (int q = p + 1; q < 3; ++q) {
          if (m[p][q] == 0.0) continue;
          const double theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
          const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
          for (int k = 0; k < 3; ++k) {
            const double mkp = m[k][p], mkq = m[k][q];
            m[k][p] = c * mkp - s * mkq;
            m[k][q] = s * mkp + c * mkq;
          }
          for (int k = 0; k < 3; ++k) {
            const double mpk = m[p][k], mqk = m[q][k];
            m[p][k] = c * mpk - s * mqk;
            m[q][k] = s * mpk + c * mqk;
          }
        }
      }
    }
    ev = {m[0][0], m[1][1], m[2][2]};
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

template <int N>
double min_eigenvalue(const Mat<N>& a) {
  return symmetric_eigenvalues<N>(a)[0];
}

template <int N>
double condition_number(const Mat<N>& a) {
  const auto ev = symmetric_eigenvalues<N>(a);
  if (ev[0] <= 0.0) return std::numeric_limits<double>::infinity();
  return ev[N - 1] / ev[0];
}

}  // namespace finsler
