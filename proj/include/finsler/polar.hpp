#pragma once

// Curvature of a sampled surface structure F(x, y) = |y| exp(P(x, theta(y)))
// on a periodic base grid. Every fiber quantity is carried as a Taylor series
// in the angle around each fiber node; angular derivatives of P are exact
// derivatives of its trigonometric interpolant, and base derivatives of the
// series coefficients come from the grid engine.

#include <span>
#include <vector>

#include "finsler/measure.hpp"

namespace finsler {

struct PolarOptions {
  DiffMode base = DiffMode::fd4;
  bool second_type = false;  // also H-tilde, GEM and tensor-flow deviations
};

struct PolarCurvature {
  // all arrays indexed (i0, i1, k) row-major
  std::vector<double> huu;      // H(u,u) at y = e(theta)
  std::vector<double> rho;      // Liouville density det g / F^2
  std::vector<double> min_eig;  // smallest eigenvalue of g(x, e(theta))
  std::vector<double> htilde;   // g^ij Htilde_ij
  std::vector<double> gem;      // max |g^ik Htilde_kj - (Htilde/2) delta|
  std::vector<double> tensor_gap;  // max |g^ik Htilde_kj - H(u,u) delta|
};

// Throws ConvexityError at the first node (in storage order) where g is not
// positive definite.
PolarCurvature polar_curvature(const BaseGrid& base, const FiberGrid& fiber, std::span<const double> log_f,
                               const PolarOptions& opt = {});

// d/dx^axis of a field stored (i0, i1, k), differentiating at fixed k.
std::vector<double> bundle_derivative(std::span<const double> field, const BaseGrid& base, int fiber_nodes,
                                      int axis, DiffMode mode);

}  // namespace finsler
