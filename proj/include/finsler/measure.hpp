#pragma once

// Liouville measure on the indicatrix bundle (n = 2) and integrals over SM.

#include <vector>

#include "finsler/curvature.hpp"

namespace finsler {

class ConvexityError : public std::runtime_error {
 public:
  ConvexityError(const std::string& what, Vec<2> x, double theta)
      : std::runtime_error(what), x_(x), theta_(theta) {}
  Vec<2> x() const { return x_; }
  double theta() const { return theta_; }

 private:
  Vec<2> x_;
  double theta_;
};

inline Vec<2> unit_direction(double theta) { return {std::cos(theta), std::sin(theta)}; }

// Density of the Liouville volume form in coordinates (x1, x2, theta) along
// the section y = e(theta)/F(x, e(theta)): rho = det g(x, e) / F(x, e)^2.
template <int N>
double liouville_density(const FinslerStructure<N>& fs, const Vec<N>& x, double theta);

// Same density from a fiber jet of F^2 at y = e(theta).
double liouville_density_from_jet(const Jet<2, 2, 0>& f2);

// Fiber total  sum_k rho(x, theta_k) * 2pi/nodes.
template <int N>
double fiber_measure(const FinslerStructure<N>& fs, const Vec<N>& x, int fiber_nodes);

struct MeasureField {
  BaseGrid base;
  FiberGrid fiber;
  std::vector<double> rho;  // (i0, i1, k) row-major
  std::vector<double> r;    // indicatrix radius 1/F(x, e(theta))
  std::vector<std::array<double, 3>> g;  // g_00, g_01, g_11 at (x, e(theta))
  double cell() const { return base.spacing(0) * base.spacing(1) * fiber.spacing(); }
  std::size_t size() const { return rho.size(); }
};

MeasureField build_measure(const FinslerStructure<2>& fs, const BaseGrid& base, const FiberGrid& fiber);

// sum f rho dx dtheta with a fixed pairwise summation order.
double sm_integrate(std::span<const double> f, const MeasureField& m);

struct FunctionalReport {
  double V = 0.0;       // indicatrix bundle volume
  double I = 0.0;       // integral of Hhat = Htilde - c H(u,u)
  double I_norm = 0.0;  // V^((2-n)/n) I
  double c_bar = 0.0;   // I / V
  int base_nodes = 0;
  int fiber_nodes = 0;
};

// From node fields on the measure grid; c may be empty (c = 0) or hold one
// value per node.
FunctionalReport functional_from_fields(std::span<const double> htilde, std::span<const double> huu,
                                        std::span<const double> c, const MeasureField& m, int n = 2);

// Analytic structures use the jet pipeline at every node; sampled structures
// use the polar grid engine (fd4 base derivatives unless opt.base is spectral).
FunctionalReport functional_I(const FinslerStructure<2>& fs, const BaseGrid& base, const FiberGrid& fiber,
                              const BaseFn<2>& c_fun = {}, const JetOptions& opt = {});

// Symmetric 2-form field on the measure grid: (h_00, h_01, h_11) per node.
using SymField = std::vector<std::array<double, 3>>;

// <a, b> = g^ik g^jl a_ij b_kl, integrated against the Liouville measure.
double pointwise_inner(const std::array<double, 3>& a, const std::array<double, 3>& b,
                       const std::array<double, 3>& g);
double global_inner(const SymField& a, const SymField& b, const MeasureField& m);

}  // namespace finsler
