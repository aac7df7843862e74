#pragma once

// Periodic charts, fiber angle grids, base differentiation and deterministic
// reductions.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "finsler/linalg.hpp"

namespace finsler {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BaseGrid {
  int n = 2;
  int nodes = 0;  // per axis
  std::vector<double> length;
  std::vector<bool> periodic;

  double spacing(int axis) const { return length.at(axis) / nodes; }
  double min_spacing() const;
  double coordinate(int axis, int i) const { return spacing(axis) * i; }
  std::size_t size() const;  // nodes^n
  std::size_t flat(int i0, int i1) const { return static_cast<std::size_t>(i0) * nodes + i1; }
  int wrap(int i) const { return ((i % nodes) + nodes) % nodes; }
  bool operator==(const BaseGrid&) const = default;
};

struct FiberGrid {
  int nodes = 0;

  double spacing() const;
  double angle(int k) const { return spacing() * k; }
  bool operator==(const FiberGrid&) const = default;
};

// Uniform periodic grids. n in {2, 3}, nodes >= 8, fiber_nodes >= 16 and even.
std::pair<BaseGrid, FiberGrid> build_grid(int n, int nodes, double length, int fiber_nodes);
std::pair<BaseGrid, FiberGrid> build_grid(int n, int nodes, std::span<const double> lengths,
                                          int fiber_nodes);

enum class DiffMode { fd4, spectral };

// Derivative of a base field sampled row-major on `grid` (axis 0 outermost).
// fd4 uses 4th-order periodic central differences; spectral differentiates
// the trigonometric interpolant.
std::vector<double> base_derivative(std::span<const double> field, const BaseGrid& grid, int axis,
                                    int order, DiffMode mode = DiffMode::fd4);

// 4th-order periodic central-difference weights, offsets -2..2.
inline constexpr std::array<double, 5> kFd4First = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0,
                                                    -1.0 / 12.0};
inline constexpr std::array<double, 5> kFd4Second = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0,
                                                     16.0 / 12.0, -1.0 / 12.0};

// Spectral derivatives along a periodic line of period `period`. Even-length
// input uses the symmetric (cosine) Nyquist convention, so odd derivatives
// drop the Nyquist mode.
class PeriodicSpectrum {
 public:
  explicit PeriodicSpectrum(int points, double period = 6.283185307179586476925286766559);

  int points() const { return points_; }
  // out = d^order/dt^order of the interpolant at the nodes
  void derivative(std::span<const double> in, int order, std::span<double> out) const;
  // all derivatives 0..max_order at the nodes; result[order][node]
  std::vector<std::vector<double>> derivatives(std::span<const double> in, int max_order) const;
  // interpolant (and its derivative of given order) at an arbitrary point
  double evaluate(std::span<const double> in, double t, int order = 0) const;
  // cosine and sine coefficients a_k, b_k for k = 0..points/2
  void transform(std::span<const double> in, std::vector<double>& a, std::vector<double>& b) const;
  void synthesize(const std::vector<double>& a, const std::vector<double>& b, int order,
                  std::span<double> out) const;

 private:

  int points_;
  double period_;
  std::vector<double> cos_table_, sin_table_;
};

// Pairwise (tree) summation with a fixed split order; bit-reproducible.
double pairwise_sum(std::span<const double> values);

// Low-discrepancy points in [0,1)^6 (Halton, bases 2, 3, 5, 7, 11, 13).
std::vector<std::array<double, 6>> halton_points(int count, int skip = 1);

}  // namespace finsler
