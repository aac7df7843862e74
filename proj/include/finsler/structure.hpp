#pragma once

// Finsler structures and the jet engine that feeds every geometric module.
//
// An analytic structure wraps a generic callable F(x, y) that can be
// evaluated on doubles and on the Taylor jet types below; fiber derivatives
// are then exact, and base derivatives are either exact (analytic partials)
// or 4th-order finite differences of fiber jets. A sampled structure stores
// log F on a periodic base x fiber grid and extends it 1-homogeneously.

#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "finsler/grid.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Jet shapes used across the pipeline.
template <int N>
using CurvatureJet = Jet<N, 6, 2>;  // full curvature bundle incl. Akbar-Zadeh Ricci
template <int N>
using RicciJet = Jet<N, 4, 2>;  // Ricci-directional curvature only
template <int N>
using ConnectionJet = Jet<N, 4, 1>;  // connection, Cartan tensor and their first derivatives
template <int N>
using FiberJet6 = Jet<N, 6, 0>;
template <int N>
using FiberJet4 = Jet<N, 4, 0>;
template <int N>
using FiberJet2 = Jet<N, 2, 0>;

namespace detail {

template <int N, class T>
struct EvalSlot {
  virtual ~EvalSlot() = default;
  virtual T call(const Vec<N, T>& x, const Vec<N, T>& y) const = 0;
};

template <int N>
struct PhaseConcept : EvalSlot<N, double>,
                      EvalSlot<N, CurvatureJet<N>>,
                      EvalSlot<N, RicciJet<N>>,
                      EvalSlot<N, ConnectionJet<N>>,
                      EvalSlot<N, FiberJet6<N>>,
                      EvalSlot<N, FiberJet4<N>>,
                      EvalSlot<N, FiberJet2<N>> {};

template <int N, class Fn>
struct PhaseModel final : PhaseConcept<N> {
  explicit PhaseModel(Fn f) : fn(std::move(f)) {}
  double call(const Vec<N, double>& x, const Vec<N, double>& y) const override { return fn(x, y); }
  CurvatureJet<N> call(const Vec<N, CurvatureJet<N>>& x, const Vec<N, CurvatureJet<N>>& y) const override {
    return fn(x, y);
  }
  RicciJet<N> call(const Vec<N, RicciJet<N>>& x, const Vec<N, RicciJet<N>>& y) const override {
    return fn(x, y);
  }
  ConnectionJet<N> call(const Vec<N, ConnectionJet<N>>& x, const Vec<N, ConnectionJet<N>>& y) const override {
    return fn(x, y);
  }
  FiberJet6<N> call(const Vec<N, FiberJet6<N>>& x, const Vec<N, FiberJet6<N>>& y) const override {
    return fn(x, y);
  }
  FiberJet4<N> call(const Vec<N, FiberJet4<N>>& x, const Vec<N, FiberJet4<N>>& y) const override {
    return fn(x, y);
  }
  FiberJet2<N> call(const Vec<N, FiberJet2<N>>& x, const Vec<N, FiberJet2<N>>& y) const override {
    return fn(x, y);
  }
  Fn fn;
};

}  // namespace detail

// Type-erased function on the tangent bundle, f(x, y), evaluable on doubles
// and on every jet shape the pipeline uses. Functions of x alone simply
// ignore y.
template <int N>
class PhaseFn {
 public:
  PhaseFn() = default;
  template <class Fn>
  explicit PhaseFn(Fn fn) : impl_(std::make_shared<detail::PhaseModel<N, Fn>>(std::move(fn))) {}

  template <class T>
  T operator()(const Vec<N, T>& x, const Vec<N, T>& y) const {
    return static_cast<const detail::EvalSlot<N, T>&>(*impl_).call(x, y);
  }

  explicit operator bool() const { return static_cast<bool>(impl_); }

 private:
  std::shared_ptr<const detail::PhaseConcept<N>> impl_;
};

enum class BaseMode { analytic, fd, spectral };

struct JetOptions {
  BaseMode base = BaseMode::analytic;
  double fd_step = 1e-3;  // pointwise FD step for analytic structures
};

// log F sampled on a periodic 2-d base grid times the fiber circle.
// F(x_node, y) = |y| exp(P(theta(y))) with P the trigonometric interpolant.
class SampledLogF {
 public:
  SampledLogF(BaseGrid base, FiberGrid fiber, std::vector<double> log_f);

  const BaseGrid& base() const { return base_; }
  const FiberGrid& fiber() const { return fiber_; }
  const std::vector<double>& values() const { return log_f_; }
  std::span<const double> fiber_line(int i0, int i1) const;

  double log_f(int i0, int i1, double theta) const;
  // Fiber jet of F at a base node around direction y0.
  template <int K>
  Jet<2, K, 0> fiber_jet(int i0, int i1, const Vec<2>& y0) const;
  // Same, at y0 = e(theta_k), using cached node derivatives.
  template <int K>
  Jet<2, K, 0> fiber_jet_at_node(int i0, int i1, int k) const;
  // Locate the base node at x; throws DomainError off-node.
  std::array<int, 2> node_of(const Vec<2>& x) const;

 private:
  const std::vector<std::vector<double>>& node_derivatives(int i0, int i1) const;

  BaseGrid base_;
  FiberGrid fiber_;
  std::vector<double> log_f_;
  PeriodicSpectrum spectrum_;
  mutable std::vector<std::vector<std::vector<double>>> cache_;  // per base node, orders 0..6
  std::unique_ptr<std::once_flag[]> cache_once_;
};

template <int N>
class FinslerStructure {
 public:
  enum class Mode { analytic, grid };

  static FinslerStructure analytic(std::string name, PhaseFn<N> f,
                                   std::function<bool(const Vec<N>&)> domain = {}) {
    FinslerStructure s;
    s.name_ = std::move(name);
    s.mode_ = Mode::analytic;
    s.f_ = std::move(f);
    s.domain_ = std::move(domain);
    return s;
  }

  static FinslerStructure sampled(std::string name, std::shared_ptr<const SampledLogF> data)
    requires(N == 2)
  {
    FinslerStructure s;
    s.name_ = std::move(name);
    s.mode_ = Mode::grid;
    s.sampled_ = std::move(data);
    return s;
  }

  const std::string& name() const { return name_; }
  Mode mode() const { return mode_; }
  static constexpr int dimension() { return N; }
  const PhaseFn<N>& function() const { return f_; }
  const std::shared_ptr<const SampledLogF>& samples() const { return sampled_; }
  bool in_domain(const Vec<N>& x) const { return !domain_ || domain_(x); }

  double operator()(const Vec<N>& x, const Vec<N>& y) const;

 private:
  std::string name_;
  Mode mode_ = Mode::analytic;
  PhaseFn<N> f_;
  std::function<bool(const Vec<N>&)> domain_;
  std::shared_ptr<const SampledLogF> sampled_;
};

// Throws DomainError on the zero section or outside the chart.
template <int N>
void require_slit(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y);

// Fiber jet of F^2 at (x, y0), x fixed.
template <int N, int K>
Jet<N, K, 0> fiber_jet_sq(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y0);

// Full local jet of F^2 at (x, y0) with base derivatives up to order XC,
// exact or by finite differences according to `opt`.
template <int N, int K, int XC>
Jet<N, K, XC> local_jet_sq(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y0,
                           const JetOptions& opt = {});

// Assemble a local jet from fiber jets at base offsets (in units of `h`),
// with 4th-order central differences. `at(offsets)` returns the fiber jet.
template <int N, int K, int XC, class At>
Jet<N, K, XC> assemble_fd(const At& at, const Vec<N>& h);

struct JetRequest {
  std::array<int, 3> base{};   // multi-index in x, order <= 2
  std::array<int, 3> fiber{};  // multi-index in y, order <= 4
  bool squared = false;        // differentiate F^2 instead of F
};

// Mixed partial derivative of F (or F^2) at (x, y).
template <int N>
double fiber_jet(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const JetRequest& req,
                 const JetOptions& opt = {});

}  // namespace finsler

#include "finsler/structure_impl.hpp"
