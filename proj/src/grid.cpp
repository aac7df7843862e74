#include "finsler/grid.hpp"

#include <cmath>
#include <numbers>

namespace finsler {

namespace {

void check_sizes(int n, int nodes, int fiber_nodes) {
  if (n != 2 && n != 3) throw GridError("dimension must be 2 or 3, got " + std::to_string(n));
  if (nodes < 8) throw GridError("base grid needs at least 8 nodes per axis, got " + std::to_string(nodes));
  if (fiber_nodes < 16) throw GridError("fiber grid needs at least 16 nodes, got " + std::to_string(fiber_nodes));
  if (fiber_nodes % 2 != 0) throw GridError("fiber node count must be even, got " + std::to_string(fiber_nodes));
}

}  // namespace

double BaseGrid::min_spacing() const {
  double h = spacing(0);
  for (int a = 1; a < n; ++a) h = std::min(h, spacing(a));
  return h;
}

std::size_t BaseGrid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < n; ++a) s *= static_cast<std::size_t>(nodes);
  return s;
}

double FiberGrid::spacing() const { return 2.0 * std::numbers::pi / nodes; }

std::pair<BaseGrid, FiberGrid> build_grid(int n, int nodes, double length, int fiber_nodes) {
  const std::vector<double> lengths(n > 0 ? n : 1, length);
  return build_grid(n, nodes, lengths, fiber_nodes);
}

std::pair<BaseGrid, FiberGrid> build_grid(int n, int nodes, std::span<const double> lengths,
                                          int fiber_nodes) {
  check_sizes(n, nodes, fiber_nodes);
  if (static_cast<int>(lengths.size()) != n) throw GridError("one axis length per dimension required");
  for (double l : lengths) {
    if (!(l > 0.0) || !std::isfinite(l)) throw GridError("axis lengths must be positive");
  }
  BaseGrid b;
  b.n = n;
  b.nodes = nodes;
  b.length.assign(lengths.begin(), lengths.end());
  b.periodic.assign(n, true);
  return {b, FiberGrid{fiber_nodes}};
}

std::vector<double> base_derivative(std::span<const double> field, const BaseGrid& grid, int axis,
                                    int order, DiffMode mode) {
  if (field.size() != grid.size()) throw GridError("field size does not match the base grid");
  if (axis < 0 || axis >= grid.n) throw GridError("axis out of range");
  if (order != 1 && order != 2) throw GridError("base derivative order must be 1 or 2");
  if (!grid.periodic[axis]) throw GridError("periodic differentiation requested on a non-periodic axis");

  const int m = grid.nodes;
  std::size_t stride = 1;
  for (int a = grid.n - 1; a > axis; --a) stride *= m;
  const std::size_t block = stride * m;
  std::vector<double> out(field.size());

  if (mode == DiffMode::fd4) {
    const double h = grid.spacing(axis);
    const auto& w = order == 1 ? kFd4First : kFd4Second;
    const double scale = order == 1 ? 1.0 / h : 1.0 / (h * h);
    for (std::size_t base = 0; base < field.size(); base += block) {
      for (std::size_t s = 0; s < stride; ++s) {
        for (int i = 0; i < m; ++i) {
          double acc = 0.0;
          for (int o = -2; o <= 2; ++o) acc += w[o + 2] * field[base + grid.wrap(i + o) * stride + s];
          out[base + i * stride + s] = acc * scale;
        }
      }
    }
  } else {
    PeriodicSpectrum spec(m, grid.length[axis]);
    std::vector<double> line(m), dline(m);
    for (std::size_t base = 0; base < field.size(); base += block) {
      for (std::size_t s = 0; s < stride; ++s) {
        for (int i = 0; i < m; ++i) line[i] = field[base + i * stride + s];
        spec.derivative(line, order, dline);
        for (int i = 0; i < m; ++i) out[base + i * stride + s] = dline[i];
      }
    }
  }
  return out;
}

PeriodicSpectrum::PeriodicSpectrum(int points, double period) : points_(points), period_(period) {
  if (points < 2) throw GridError("spectral line needs at least two points");
  const int kmax = points / 2;
  cos_table_.resize(static_cast<std::size_t>(kmax + 1) * points);
  sin_table_.resize(cos_table_.size());
  for (int k = 0; k <= kmax; ++k)
    for (int j = 0; j < points; ++j) {
      const double a = 2.0 * std::numbers::pi * ((static_cast<long long>(k) * j) % points) / points;
      cos_table_[k * points + j] = std::cos(a);
      sin_table_[k * points + j] = std::sin(a);
    }
}

// Real Fourier coefficients: f(t) = a0 + sum_k a_k cos(k w t) + b_k sin(k w t),
// with a[N/2] halved for even N (symmetric Nyquist term).
void PeriodicSpectrum::transform(std::span<const double> in, std::vector<double>& a,
                                 std::vector<double>& b) const {
  const int n = points_;
  const int kmax = n / 2;
  a.assign(kmax + 1, 0.0);
  b.assign(kmax + 1, 0.0);
  for (int k = 0; k <= kmax; ++k) {
    const double* c = &cos_table_[k * n];
    const double* sn = &sin_table_[k * n];
    double sa = 0.0, sb = 0.0;
    for (int j = 0; j < n; ++j) {
      sa += in[j] * c[j];
      sb += in[j] * sn[j];
    }
    const double norm = (k == 0 || (n % 2 == 0 && k == kmax)) ? 1.0 / n : 2.0 / n;
    a[k] = sa * norm;
    b[k] = sb * norm;
  }
  if (n % 2 == 0) b[kmax] = 0.0;
}

void PeriodicSpectrum::derivative(std::span<const double> in, int order, std::span<double> out) const {
  std::vector<double> a, b;
  transform(in, a, b);
  synthesize(a, b, order, out);
}

void PeriodicSpectrum::synthesize(const std::vector<double>& a, const std::vector<double>& b, int order,
                                  std::span<double> out) const {
  const int n = points_;
  const int kmax = n / 2;
  const double w = 2.0 * std::numbers::pi / period_;
  // d^p/dt^p [a cos(kwt) + b sin(kwt)] = (kw)^p [a cos(kwt + p pi/2) + b sin(kwt + p pi/2)]
  std::vector<double> ca(kmax + 1), cb(kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    const double f = std::pow(k * w, order);
    double ak = a[k], bk = b[k];
    if (n % 2 == 0 && k == kmax && order % 2 == 1) ak = bk = 0.0;
    // rotate (a, b) by p quarter turns
    for (int r = 0; r < order % 4; ++r) {
      const double na = bk, nb = -ak;
      ak = na;
      bk = nb;
    }
    ca[k] = f * ak;
    cb[k] = f * bk;
  }
  if (order > 0) ca[0] = cb[0] = 0.0;
  for (int j = 0; j < n; ++j) out[j] = ca[0];
  for (int k = 1; k <= kmax; ++k) {
    const double* c = &cos_table_[k * n];
    const double* sn = &sin_table_[k * n];
    const double ak = ca[k], bk = cb[k];
    for (int j = 0; j < n; ++j) out[j] += ak * c[j] + bk * sn[j];
  }
}

std::vector<std::vector<double>> PeriodicSpectrum::derivatives(std::span<const double> in,
                                                               int max_order) const {
  std::vector<std::vector<double>> r(max_order + 1, std::vector<double>(points_));
  std::vector<double> a, b;
  transform(in, a, b);
  for (int p = 0; p <= max_order; ++p) synthesize(a, b, p, r[p]);
  return r;
}

double PeriodicSpectrum::evaluate(std::span<const double> in, double t, int order) const {
  std::vector<double> a, b;
  transform(in, a, b);
  const int kmax = points_ / 2;
  const double w = 2.0 * std::numbers::pi / period_;
  double s = order == 0 ? a[0] : 0.0;
  for (int k = 1; k <= kmax; ++k) {
    const double ph = k * w * t + order * std::numbers::pi / 2.0;
    s += std::pow(k * w, order) * (a[k] * std::cos(ph) + b[k] * std::sin(ph));
  }
  return s;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<std::array<double, 6>> halton_points(int count, int skip) {
  constexpr int bases[6] = {2, 3, 5, 7, 11, 13};
  std::vector<std::array<double, 6>> pts(count);
  for (int i = 0; i < count; ++i) {
    for (int d = 0; d < 6; ++d) {
      double f = 1.0, r = 0.0;
      int idx = i + skip;
      while (idx > 0) {
        f /= bases[d];
        r += f * (idx % bases[d]);
        idx /= bases[d];
      }
      pts[i][d] = r;
    }
  }
  return pts;
}

}  // namespace finsler
