#pragma once

// Geodesic spray, nonlinear connection, Berwald and Cartan coefficients,
// horizontal covariant derivatives and a geodesic integrator.

#include <vector>

#include "finsler/core.hpp"

namespace finsler {

template <int N>
struct SprayData {
  Vec<N> G{};     // G^i
  Mat<N> Gj{};    // Gj[i][j] = G^i_j
  Arr3<N> Gjk{};  // Gjk[i][j][k] = G^i_jk
};

template <int N>
Vec<N> spray(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const JetOptions& opt = {});

template <int N>
Mat<N> nonlinear_connection(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                            const JetOptions& opt = {});

template <int N>
SprayData<N> berwald_coeffs(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                            const JetOptions& opt = {});

// Horizontal Cartan coefficients Gamma[i][j][k] = Gamma^i_jk.
template <int N>
Arr3<N> cartan_hcoeffs(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                       const JetOptions& opt = {});

// Everything a horizontal covariant derivative needs at one point of TM.
template <int N>
struct HorizontalFrame {
  Vec<N> x{}, y{};
  double F = 0.0;
  Mat<N> g{}, ginv{};
  Arr3<N> C{};      // C_ijk
  Mat<N> Nl{};      // Nl[i][j] = G^i_j
  Arr3<N> Gamma{};  // Gamma^i_jk
  Arr3<N> Berwald{};
};

// Frame from a local jet of F^2 with first base derivatives.
template <int N, int K, int XC>
HorizontalFrame<N> make_frame(const Jet<N, K, XC>& f2, const Vec<N>& x, const Vec<N>& y);

template <int N>
HorizontalFrame<N> horizontal_frame(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                                    const JetOptions& opt = {});

// Field components carried as first-order jets in (x, y).
template <int N>
using FieldJet = Jet<N, 1, 1>;

// Tensor of valence (upper, lower); components flattened row-major with the
// upper index first.
template <int N, class T>
struct Tensor {
  int upper = 0;
  int lower = 0;
  std::vector<T> comp;

  Tensor() = default;
  Tensor(int up, int low) : upper(up), lower(low), comp(count(up + low)) {}
  static std::size_t count(int rank) {
    std::size_t s = 1;
    for (int r = 0; r < rank; ++r) s *= N;
    return s;
  }
  int rank() const { return upper + lower; }
  T& at(std::initializer_list<int> idx) { return comp[flat(idx)]; }
  const T& at(std::initializer_list<int> idx) const { return comp[flat(idx)]; }
  static std::size_t flat(std::initializer_list<int> idx) {
    std::size_t f = 0;
    for (int i : idx) f = f * N + i;
    return f;
  }
};

template <int N>
using TensorJet = Tensor<N, FieldJet<N>>;
template <int N>
using TensorValue = Tensor<N, double>;

// Horizontal Cartan covariant derivative; the derivative direction is appended
// as the last covariant index. Valence must satisfy upper <= 1, lower <= 3,
// upper + lower <= 3.
template <int N>
TensorValue<N> h_cov_deriv(const TensorJet<N>& t, const HorizontalFrame<N>& frame);

// Contract the last covariant index with y (nabla_0 = y^i nabla_i).
template <int N>
TensorValue<N> contract_y(const TensorValue<N>& t, const Vec<N>& y);

template <int N>
struct GeodesicPath {
  std::vector<double> t;
  std::vector<Vec<N>> x, v;
  bool left_chart = false;
};

// Classical RK4 for x'' + 2 G(x, x') = 0 with a fixed step.
template <int N>
GeodesicPath<N> geodesic_integrate(const FinslerStructure<N>& fs, const Vec<N>& x0, const Vec<N>& y0,
                                   double T, double dt, const JetOptions& opt = {});

}  // namespace finsler
