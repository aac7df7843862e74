#pragma once

// Berwald hh-curvature and the Ricci-type scalars built on it.

#include <functional>

#include "finsler/connections.hpp"

namespace finsler {

template <int N>
using BaseFn = std::function<double(const Vec<N>&)>;

template <int N>
struct CurvatureBundle {
  double F = 0.0;
  Mat<N> g{};
  Arr4<N> H{};         // H[i][j][k][l] = H^i_jkl
  Mat<N> Hij{};        // H_jl = H^k_jkl
  Mat<N> Htilde_ij{};  // 1/2 d2(H_rs y^r y^s)/dy^i dy^j
  double ric = 0.0;    // H_rs y^r y^s from the Berwald formula
  double Huu = 0.0;    // ric / F^2
  double Huu_tensor = 0.0;  // H_jl u^j u^l from the assembled hh-curvature
  double Htilde = 0.0;      // g^ij Htilde_ij
};

template <int N>
CurvatureBundle<N> curvature_bundle(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                                    const JetOptions& opt = {});

// Bundle from a local jet of F^2 with 6 fiber and 2 base orders.
template <int N>
CurvatureBundle<N> curvature_from_jet(const Jet<N, 6, 2>& f2, const Vec<N>& y);

template <int N>
Arr4<N> hh_curvature(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const JetOptions& opt = {});

template <int N>
std::pair<Mat<N>, Mat<N>> ricci_tensors(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                                        const JetOptions& opt = {});

// H(u,u) through the 4th-order jet path.
template <int N>
double ricci_directional(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                         const JetOptions& opt = {});

template <int N>
double ricci_directional_from_jet(const Jet<N, 4, 2>& f2, const Vec<N>& y);

struct HatScalars {
  double Htilde = 0.0;
  double Hhat = 0.0;  // Htilde - c(x) H(u,u)
};

template <int N>
HatScalars hat_scalars(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const BaseFn<N>& c_fun,
                       const JetOptions& opt = {});

// Mixed-tensor deviation from the Einstein condition, max |g^ik Htilde_kj - (Htilde/n) delta^i_j|.
template <int N>
double gem_deviation(const CurvatureBundle<N>& b);

// sup over fiber_nodes uniformly spaced directions (n = 2) or a fixed
// spherical design (n = 3) of gem_deviation.
template <int N>
double gem_residual(const FinslerStructure<N>& fs, const Vec<N>& x, int fiber_nodes = 64, const JetOptions& opt = {});

}  // namespace finsler
