#pragma once

// Tangent vectors of the space of Finsler metrics: Lie derivative of the
// fundamental tensor, its adjoint, codifferentials, trace splitting and the
// first-variation identities of the volume, the measure and the spray.

#include <string>
#include <vector>

#include "finsler/measure.hpp"

namespace finsler {

// Vector field on the base, one PhaseFn per component (y is ignored).
template <int N>
struct VectorField {
  std::array<PhaseFn<N>, N> comp;

  template <class Fn>
  static VectorField from(Fn fn) {
    VectorField v;
    for (int k = 0; k < N; ++k)
      v.comp[k] = PhaseFn<N>([fn, k](const auto& x, const auto&) { return fn(x)[k]; });
    return v;
  }
  Vec<N> operator()(const Vec<N>& x) const;
  Mat<N> jacobian(const Vec<N>& x) const;  // [k][i] = d_i X^k
};

enum class VariationKind { conformal, lie, family, raw };

std::string to_string(VariationKind k);

// h_ij = 1/2 d2 Psi / dy^i dy^j for a 2-homogeneous generator Psi; every such
// h is a member of the tangent space. For the Lie kind Psi = Xhat(F^2) is
// assembled from the jet of F^2 and X.
template <int N>
struct VariationField {
  VariationKind kind = VariationKind::family;
  std::string label;
  FinslerStructure<N> background;
  PhaseFn<N> psi;  // conformal and family kinds
  VectorField<N> X;  // lie kind
};

// k(x) is a PhaseFn that ignores y.
template <int N>
VariationField<N> conformal_variation(const PhaseFn<N>& k, const FinslerStructure<N>& fs);
template <int N>
VariationField<N> family_variation(const PhaseFn<N>& psi, const FinslerStructure<N>& fs, std::string label = "family");
template <int N>
VariationField<N> lie_derivative_metric(const VectorField<N>& X, const FinslerStructure<N>& fs);

// h_ij at (x, y) as first-order jets in (x, y). Analytic structures only.
template <int N>
Mat<N, FieldJet<N>> variation_jet(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y);
template <int N>
Mat<N> variation_value(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y);

// h(u,u) = Psi / F^2 (Lie kind: contracted from the jet).
template <int N>
double variation_uu(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y);

struct MembershipResidual {
  double homogeneity = 0.0;  // max |y^k d_k h_ij|
  double symmetry = 0.0;     // max |d_k h_ij - d_j h_ik|
};

template <int N>
MembershipResidual membership(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y);

// Raw arrays on the measure grid (n = 2): symmetry of d_k h_ij is tested with
// the spectral theta-derivative, d_k h_ij = h_ij' e_theta,k on |y| = 1.
MembershipResidual raw_membership(const SymField& h, const FiberGrid& fiber);

// Geometric data shared by every divergence at one point of TM.
template <int N>
struct PointGeometry {
  HorizontalFrame<N> frame;
  Arr3<N> C{};     // C_ijk
  Vec<N> I{};      // I_k = g^ij C_ijk
  Arr3<N> Cdot{};  // nabla_0 C_ijk
  Vec<N> J{};      // J^k = g^kj nabla_0 I_j
};

template <int N>
PointGeometry<N> point_geometry(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y);

// L_Xhat g_ij = nabla_i X_j + nabla_j X_i + 2 y^m nabla_m X^k C_kij
template <int N>
Mat<N> lie_covariant(const VectorField<N>& X, const PointGeometry<N>& geo);

// delta h_k = -(nabla^i h_ik - h_kj J^j + Cdot_kij h^ij + C_kij nabla_0 h^ij)
template <int N>
Vec<N> divergence_delta(const Mat<N, FieldJet<N>>& h, const PointGeometry<N>& geo);
template <int N>
Vec<N> divergence_delta(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y);

enum class FormKind { horizontal, vertical };

// Components of a 1-form on SM as jets in (x, y).
template <int N>
Vec<N, FieldJet<N>> form_jet(const std::array<PhaseFn<N>, N>& a, const Vec<N>& x, const Vec<N>& y);

// horizontal: -(nabla^j a_j - a_j J^j);  vertical: -F g^ij d a_i / dy^j
template <int N>
double codifferential(const Vec<N, FieldJet<N>>& form, FormKind kind, const PointGeometry<N>& geo);

struct TraceSplit {
  SymField conformal;
  SymField traceless;
};

// h = (tr_g h / n) g + h_perp, pointwise.
Mat<2> trace_part(const Mat<2>& h, const Mat<2>& g);
TraceSplit trace_split(const SymField& h, const MeasureField& m);

// Node fields of a variation on the measure grid.
SymField sample_variation(const VariationField<2>& h, const MeasureField& m);

struct AdjointPair {
  VectorField<2> X;
  VariationField<2> h;
  std::string label;
};

struct AdjointResult {
  std::string label;
  double lhs = 0.0;  // 1/2 (L_Xhat g, h)
  double rhs = 0.0;  // (X, delta h)
  double residual = 0.0;  // |lhs - rhs| / (1 + |rhs|)
};

// All pairs must share the background; the frame is built once per node.
std::vector<AdjointResult> adjointness(const std::vector<AdjointPair>& pairs, const BaseGrid& base,
                                       const FiberGrid& fiber);
double adjointness_residual(const VectorField<2>& X, const VariationField<2>& h, const BaseGrid& base,
                            const FiberGrid& fiber);

// Five fixed (X, h) pairs on the randers-torus background.
std::vector<AdjointPair> adjointness_corpus(const FinslerStructure<2>& background);

// F_t = sqrt(F^2 + t Psi), so g_t = g + t h exactly.
FinslerStructure<2> variation_path(const VariationField<2>& h, double t);

struct ResidualItem {
  std::string name;
  double lhs = 0.0;  // finite difference along the path
  double rhs = 0.0;  // closed form
  double residual = 0.0;
  double tol = 0.0;
  bool passed = false;
  bool richardson = false;
};

struct VariationReport {
  std::vector<ResidualItem> items;
  bool passed() const;
};

struct VariationOptions {
  double t = 1e-4;
  double tol = 1e-3;
  double tol_functional = 1e-2;
  int base_nodes = 32;
  int fiber_nodes = 32;
  int spray_samples = 16;
  int functional_base_nodes = 24;
  int functional_fiber_nodes = 32;
  bool functional = true;  // (d) needs a conformal direction
};

// (a) dV/dt vs 1/2 int tr h and (n/2) int h(u,u); (b) d rho/dt nodewise vs
// (tr h - (n/2) h(u,u)) rho; (c) dG^i_k/dt vs the covariant formula with a
// finite-difference G'; (d) conformal dI/dt vs int H(u,u) tr h.
VariationReport variation_residuals(const VariationField<2>& h, const VariationOptions& opt = {});

}  // namespace finsler
