#pragma once

// Truncated univariate Taylor series c_0 + c_1 t + ... + c_M t^M, used for
// angular expansions along the fiber circle.

#include <array>
#include <cmath>

namespace finsler {

template <int M>
struct Series {
  static_assert(M >= 0);
  std::array<double, M + 1> c{};

  Series() = default;
  explicit Series(double v) { c[0] = v; }

  double value() const { return c[0]; }
  // k-th derivative at t = 0
  double deriv(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }

  Series& operator+=(const Series& o) {
    for (int i = 0; i <= M; ++i) c[i] += o.c[i];
    return *this;
  }
  Series& operator-=(const Series& o) {
    for (int i = 0; i <= M; ++i) c[i] -= o.c[i];
    return *this;
  }
  Series& operator*=(double s) {
    for (double& v : c) v *= s;
    return *this;
  }
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator-(Series a) { return a *= -1.0; }
  friend Series operator*(Series a, double s) { return a *= s; }
  friend Series operator*(double s, Series a) { return a *= s; }
  friend Series operator*(const Series& a, const Series& b) {
    Series r;
    for (int i = 0; i <= M; ++i) {
      if (a.c[i] == 0.0) continue;
      for (int j = 0; i + j <= M; ++j) r.c[i + j] += a.c[i] * b.c[j];
    }
    return r;
  }
  friend Series operator/(const Series& a, const Series& b) {
    Series r;
    const double inv = 1.0 / b.c[0];
    for (int k = 0; k <= M; ++k) {
      double s = a.c[k];
      for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
      r.c[k] = s * inv;
    }
    return r;
  }

  // d/dt, one order lower
  Series<(M > 0 ? M - 1 : 0)> d() const {
    Series<(M > 0 ? M - 1 : 0)> r;
    for (int i = 0; i < M; ++i) r.c[i] = (i + 1) * c[i + 1];
    return r;
  }
  template <int M2>
  Series<M2> truncate() const {
    static_assert(M2 <= M);
    Series<M2> r;
    for (int i = 0; i <= M2; ++i) r.c[i] = c[i];
    return r;
  }
};

template <int M>
Series<M> exp(const Series<M>& a) {
  // e' = a' e
  Series<M> e;
  e.c[0] = std::exp(a.c[0]);
  for (int k = 1; k <= M; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * a.c[j] * e.c[k - j];
    e.c[k] = s / k;
  }
  return e;
}

// (cos, sin) of theta0 + t
template <int M>
std::array<Series<M>, 2> unit_circle_series(double theta0) {
  std::array<Series<M>, 2> r;
  const double cs[4] = {std::cos(theta0), -std::sin(theta0), -std::cos(theta0), std::sin(theta0)};
  double f = 1.0;
  for (int k = 0; k <= M; ++k) {
    if (k > 0) f *= k;
    r[0].c[k] = cs[k % 4] / f;
    r[1].c[k] = cs[(k + 3) % 4] / f;
  }
  return r;
}

}  // namespace finsler
