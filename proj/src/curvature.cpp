#include "finsler/curvature.hpp"

#include <cmath>
#include <numbers>

namespace finsler {

template <int N>
CurvatureBundle<N> curvature_from_jet(const Jet<N, 6, 2>& f2, const Vec<N>& y) {
  CurvatureBundle<N> b;
  b.F = std::sqrt(f2.value());
  const auto gj = local::metric(f2);
  b.g = local::matrix_values<N>(gj);
  const Mat<N> gi = inverse<N, double>(b.g);
  const auto G = local::spray<N, 6, 2>(f2, y);
  b.H = local::hh_curvature<N, 4, 1>(G);
  Vec<N> u;
  for (int i = 0; i < N; ++i) u[i] = y[i] / b.F;
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l) {
      double v = 0.0;
      for (int k = 0; k < N; ++k) v += b.H[k][j][k][l];
      b.Hij[j][l] = v;
      b.Huu_tensor += v * u[j] * u[l];
    }
  const auto R = local::riemann<N, 4, 1>(G, y);
  Jet<N, 2, 0> ric(0.0);
  for (int k = 0; k < N; ++k) ric += R[k][k];
  b.ric = ric.value();
  b.Huu = b.ric / f2.value();
  for (int i = 0; i < N; ++i) {
    const auto ri = ric.dy(i);
    for (int j = i; j < N; ++j) {
      b.Htilde_ij[i][j] = 0.5 * ri.dy(j).value();
      b.Htilde_ij[j][i] = b.Htilde_ij[i][j];
    }
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) b.Htilde += gi[i][j] * b.Htilde_ij[i][j];
  return b;
}

template <int N>
CurvatureBundle<N> curvature_bundle(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                                    const JetOptions& opt) {
  const auto f2 = local_jet_sq<N, 6, 2>(fs, x, y, opt);
  require_positive<N>(local::matrix_values<N>(local::metric(f2)), x, y);
  return curvature_from_jet<N>(f2, y);
}

template <int N>
Arr4<N> hh_curvature(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const JetOptions& opt) {
  return curvature_bundle<N>(fs, x, y, opt).H;
}

template <int N>
std::pair<Mat<N>, Mat<N>> ricci_tensors(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                                        const JetOptions& opt) {
  const auto b = curvature_bundle<N>(fs, x, y, opt);
  return {b.Hij, b.Htilde_ij};
}

template <int N>
double ricci_directional_from_jet(const Jet<N, 4, 2>& f2, const Vec<N>& y) {
  const auto G = local::spray<N, 4, 2>(f2, y);
  const auto R = local::riemann<N, 2, 1>(G, y);
  double ric = 0.0;
  for (int k = 0; k < N; ++k) ric += R[k][k].value();
  return ric / f2.value();
}

template <int N>
double ricci_directional(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const JetOptions& opt) {
  const auto f2 = local_jet_sq<N, 4, 2>(fs, x, y, opt);
  require_positive<N>(local::matrix_values<N>(local::metric(f2)), x, y);
  return ricci_directional_from_jet<N>(f2, y);
}

template <int N>
HatScalars hat_scalars(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const BaseFn<N>& c_fun,
                       const JetOptions& opt) {
  const auto b = curvature_bundle<N>(fs, x, y, opt);
  const double c = c_fun ? c_fun(x) : 0.0;
  return {b.Htilde, b.Htilde - c * b.Huu};
}

template <int N>
double gem_deviation(const CurvatureBundle<N>& b) {
  const Mat<N> gi = inverse<N, double>(b.g);
  double worst = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double v = 0.0;
      for (int k = 0; k < N; ++k) v += gi[i][k] * b.Htilde_ij[k][j];
      if (i == j) v -= b.Htilde / N;
      worst = std::max(worst, std::abs(v));
    }
  return worst;
}

template <int N>
double gem_residual(const FinslerStructure<N>& fs, const Vec<N>& x, int fiber_nodes, const JetOptions& opt) {
  if (fiber_nodes < 1) throw std::invalid_argument("gem_residual needs fiber samples");
  double worst = 0.0;
  for (int k = 0; k < fiber_nodes; ++k) {
    Vec<N> y;
    const double t = 2.0 * std::numbers::pi * k / fiber_nodes;
    if constexpr (N == 2) {
      y = {std::cos(t), std::sin(t)};
    } else {
      // golden-angle spiral on the sphere
      const double z = 1.0 - (2.0 * k + 1.0) / fiber_nodes;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = k * std::numbers::pi * (3.0 - std::sqrt(5.0));
      y = {r * std::cos(phi), r * std::sin(phi), z};
    }
    worst = std::max(worst, gem_deviation<N>(curvature_bundle<N>(fs, x, y, opt)));
  }
  return worst;
}

#define FINSLER_INSTANTIATE(N)                                                                                   \
  template CurvatureBundle<N> curvature_from_jet<N>(const Jet<N, 6, 2>&, const Vec<N>&);                         \
  template CurvatureBundle<N> curvature_bundle<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&,      \
                                                  const JetOptions&);                                             \
  template Arr4<N> hh_curvature<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&, const JetOptions&); \
  template std::pair<Mat<N>, Mat<N>> ricci_tensors<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&,  \
                                                      const JetOptions&);                                         \
  template double ricci_directional_from_jet<N>(const Jet<N, 4, 2>&, const Vec<N>&);                             \
  template double ricci_directional<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&,                 \
                                       const JetOptions&);                                                        \
  template HatScalars hat_scalars<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&, const BaseFn<N>&, \
                                     const JetOptions&);                                                          \
  template double gem_deviation<N>(const CurvatureBundle<N>&);                                                   \
  template double gem_residual<N>(const FinslerStructure<N>&, const Vec<N>&, int, const JetOptions&);
FINSLER_INSTANTIATE(2)
FINSLER_INSTANTIATE(3)
#undef FINSLER_INSTANTIATE

}  // namespace finsler
