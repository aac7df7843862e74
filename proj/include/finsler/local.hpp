#pragma once

// Jet-level formulas: everything here maps a local jet of F^2 at (x, y0)
// to jets (or values) of derived objects at the same point.

#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"

namespace finsler::local {

template <int N, int K, int XC>
auto metric(const Jet<N, K, XC>& f2) {
  using G = decltype(f2.dy(0).dy(0));
  Mat<N, G> g;
  for (int i = 0; i < N; ++i) {
    const auto fi = f2.dy(i);
    for (int j = i; j < N; ++j) {
      g[i][j] = 0.5 * fi.dy(j);
      g[j][i] = g[i][j];
    }
  }
  return g;
}

template <int N, class T>
Mat<N> matrix_values(const Mat<N, T>& m) {
  Mat<N> r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) r[i][j] = m[i][j].value();
  return r;
}

template <int N, class T>
Vec<N> vector_values(const Vec<N, T>& v) {
  Vec<N> r;
  for (int i = 0; i < N; ++i) r[i] = v[i].value();
  return r;
}

// G^i = 1/4 g^{ih} (d2F^2/dy^h dx^j y^j - dF^2/dx^h), as a jet of shape (K-2, XC-1).
template <int N, int K, int XC>
Vec<N, Jet<N, K - 2, XC - 1>> spray(const Jet<N, K, XC>& f2, const Vec<N>& y0) {
  static_assert(K >= 2 && XC >= 1);
  using S = Jet<N, K - 2, XC - 1>;
  Mat<N, S> g;
  for (int i = 0; i < N; ++i) {
    const auto fi = f2.dy(i);
    for (int j = i; j < N; ++j) {
      g[i][j] = (0.5 * fi.dy(j)).template truncate<K - 2, XC - 1>();
      g[j][i] = g[i][j];
    }
  }
  const Mat<N, S> gi = inverse<N, S>(g);
  Vec<N, S> y;
  for (int j = 0; j < N; ++j) y[j] = S::variable(N + j, y0[j]);
  Vec<N, S> rhs;
  for (int h = 0; h < N; ++h) {
    S acc = -(f2.dx(h).template truncate<K - 2, XC - 1>());
    for (int j = 0; j < N; ++j) acc += f2.dx(j).dy(h).template truncate<K - 2, XC - 1>() * y[j];
    rhs[h] = acc;
  }
  Vec<N, S> G;
  for (int i = 0; i < N; ++i) {
    S acc(0.0);
    for (int h = 0; h < N; ++h) acc += gi[i][h] * rhs[h];
    G[i] = 0.25 * acc;
  }
  return G;
}

// Riemann curvature R^i_k of a spray (Berwald's formula), as jets in y.
//   R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k - dG^i/dy^j dG^j/dy^k
template <int N, int K, int XC>
Mat<N, Jet<N, K - 2, 0>> riemann(const Vec<N, Jet<N, K, XC>>& G, const Vec<N>& y0) {
  static_assert(K >= 2 && XC >= 1);
  using T = Jet<N, K - 2, 0>;
  Vec<N, T> y, g0;
  Mat<N, T> dy;  // dy[j][i] = dG^i/dy^j
  for (int j = 0; j < N; ++j) y[j] = T::variable(N + j, y0[j]);
  for (int i = 0; i < N; ++i) {
    g0[i] = G[i].template truncate<K - 2, 0>();
    for (int j = 0; j < N; ++j) dy[j][i] = G[i].dy(j).template truncate<K - 2, 0>();
  }
  Mat<N, T> R;
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < N; ++k) {
      const auto gik = G[i].dy(k);
      T acc = 2.0 * G[i].dx(k).template truncate<K - 2, 0>();
      for (int j = 0; j < N; ++j) {
        acc -= y[j] * gik.dx(j).template truncate<K - 2, 0>();
        acc += 2.0 * g0[j] * gik.dy(j).template truncate<K - 2, 0>();
        acc -= dy[j][i] * dy[k][j];
      }
      R[i][k] = acc;
    }
  }
  return R;
}

// Berwald hh-curvature H^i_jkl at the expansion point; R[i][j][k][l].
template <int N, int K, int XC>
Arr4<N> hh_curvature(const Vec<N, Jet<N, K, XC>>& G) {
  static_assert(K >= 3 && XC >= 1);
  using B = decltype(G[0].dy(0).dy(0));
  Arr3<N, B> b;  // b[i][j][l] = G^i_jl
  Mat<N> nl;     // nl[m][k] = G^m_k
  Arr3<N> bv;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const auto gij = G[i].dy(j);
      nl[i][j] = gij.value();
      for (int l = 0; l < N; ++l) {
        b[i][j][l] = gij.dy(l);
        bv[i][j][l] = b[i][j][l].value();
      }
    }
  }
  // delta_k G^i_jl = d_x^k G^i_jl - G^m_k d_y^m G^i_jl
  Arr4<N> d;  // d[i][j][l][k]
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int l = 0; l < N; ++l)
        for (int k = 0; k < N; ++k) {
          double v = b[i][j][l].dx(k).value();
          for (int m = 0; m < N; ++m) v -= nl[m][k] * b[i][j][l].dy(m).value();
          d[i][j][l][k] = v;
        }
  Arr4<N> H;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) {
          double v = d[i][j][l][k] - d[i][j][k][l];
          for (int m = 0; m < N; ++m) v += bv[m][j][l] * bv[i][m][k] - bv[m][j][k] * bv[i][m][l];
          H[i][j][k][l] = v;
        }
  return H;
}

}  // namespace finsler::local
