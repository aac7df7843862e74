#include "finsler/measure.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "finsler/parallel.hpp"
#include "finsler/polar.hpp"

namespace finsler {

double liouville_density_from_jet(const Jet<2, 2, 0>& f2) {
  const Mat<2> g = local::matrix_values<2>(local::metric(f2));
  return determinant<2, double>(g) / f2.value();
}

namespace {

void check_density(double rho, const Mat<2>& g, const Vec<2>& x, double theta) {
  const double scale = std::max(std::abs(g[0][0]), std::abs(g[1][1]));
  if (!(rho >= -1e-12 * scale) || min_eigenvalue<2>(g) < -1e-12 * scale) {
    std::ostringstream os;
    os << "convexity lost at x=(" << x[0] << "," << x[1] << ") theta=" << theta;
    throw ConvexityError(os.str(), x, theta);
  }
}

}  // namespace

template <int N>
double liouville_density(const FinslerStructure<N>& fs, const Vec<N>& x, double theta) {
  static_assert(N == 2, "the Liouville density is implemented for surfaces");
  const Vec<2> e = unit_direction(theta);
  require_slit<2>(fs, x, e);
  const auto f2 = fiber_jet_sq<2, 2>(fs, x, e);
  const Mat<2> g = local::matrix_values<2>(local::metric(f2));
  const double rho = determinant<2, double>(g) / f2.value();
  check_density(rho, g, x, theta);
  return rho;
}

template <int N>
double fiber_measure(const FinslerStructure<N>& fs, const Vec<N>& x, int fiber_nodes) {
  if (fiber_nodes < 1) throw std::invalid_argument("fiber_measure needs nodes");
  std::vector<double> v(fiber_nodes);
  const double dt = 2.0 * std::numbers::pi / fiber_nodes;
  for (int k = 0; k < fiber_nodes; ++k) v[k] = liouville_density<N>(fs, x, k * dt);
  return pairwise_sum(v) * dt;
}

MeasureField build_measure(const FinslerStructure<2>& fs, const BaseGrid& base, const FiberGrid& fiber) {
  if (base.n != 2) throw GridError("measure fields need a two-dimensional base");
  MeasureField m;
  m.base = base;
  m.fiber = fiber;
  const int nx = base.nodes, nt = fiber.nodes;
  m.rho.resize(base.size() * nt);
  m.r.resize(m.rho.size());
  const bool sampled = fs.mode() == FinslerStructure<2>::Mode::grid;
  if (sampled && !(fs.samples()->base() == base && fs.samples()->fiber() == fiber))
    throw GridError("sampled structure lives on a different grid");
  m.g.resize(m.rho.size());
  parallel_for(m.rho.size(), [&](std::size_t idx) {
    const std::size_t b = idx / nt;
    const int i0 = static_cast<int>(b / nx), i1 = static_cast<int>(b % nx), k = static_cast<int>(idx % nt);
    const Vec<2> x{base.coordinate(0, i0), base.coordinate(1, i1)};
    const double th = fiber.angle(k);
    Jet<2, 2, 0> f2;
    if (sampled) {
      const auto f = fs.samples()->fiber_jet_at_node<2>(i0, i1, k);
      f2 = f * f;
    } else {
      f2 = fiber_jet_sq<2, 2>(fs, x, unit_direction(th));
    }
    const Mat<2> g = local::matrix_values<2>(local::metric(f2));
    const double rho = determinant<2, double>(g) / f2.value();
    check_density(rho, g, x, th);
    m.rho[idx] = rho;
    m.r[idx] = 1.0 / std::sqrt(f2.value());
    m.g[idx] = {g[0][0], g[0][1], g[1][1]};
  });
  return m;
}

double sm_integrate(std::span<const double> f, const MeasureField& m) {
  if (f.size() != m.rho.size()) throw GridError("field does not match the measure grid");
  std::vector<double> w(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) w[i] = f[i] * m.rho[i];
  return pairwise_sum(w) * m.cell();
}

FunctionalReport functional_from_fields(std::span<const double> htilde, std::span<const double> huu,
                                        std::span<const double> c, const MeasureField& m, int n) {
  if (htilde.size() != m.size() || huu.size() != m.size() || (!c.empty() && c.size() != m.size()))
    throw GridError("curvature fields do not match the measure grid");
  std::vector<double> hhat(m.size()), one(m.size(), 1.0);
  for (std::size_t i = 0; i < m.size(); ++i) hhat[i] = htilde[i] - (c.empty() ? 0.0 : c[i] * huu[i]);
  FunctionalReport r;
  r.V = sm_integrate(one, m);
  r.I = sm_integrate(hhat, m);
  r.I_norm = std::pow(r.V, (2.0 - n) / n) * r.I;
  r.c_bar = r.I / r.V;
  r.base_nodes = m.base.nodes;
  r.fiber_nodes = m.fiber.nodes;
  return r;
}

FunctionalReport functional_I(const FinslerStructure<2>& fs, const BaseGrid& base, const FiberGrid& fiber,
                              const BaseFn<2>& c_fun, const JetOptions& opt) {
  const MeasureField m = build_measure(fs, base, fiber);
  const int nx = base.nodes, nt = fiber.nodes;
  std::vector<double> htilde(m.size()), huu(m.size()), c;
  if (fs.mode() == FinslerStructure<2>::Mode::grid) {
    PolarOptions po;
    po.base = opt.base == BaseMode::spectral ? DiffMode::spectral : DiffMode::fd4;
    po.second_type = true;
    auto pc = polar_curvature(base, fiber, fs.samples()->values(), po);
    htilde = std::move(pc.htilde);
    huu = std::move(pc.huu);
  } else {
    parallel_for(m.size(), [&](std::size_t idx) {
      const std::size_t b = idx / nt;
      const Vec<2> x{base.coordinate(0, static_cast<int>(b / nx)), base.coordinate(1, static_cast<int>(b % nx))};
      const auto cb = curvature_bundle<2>(fs, x, unit_direction(fiber.angle(static_cast<int>(idx % nt))), opt);
      htilde[idx] = cb.Htilde;
      huu[idx] = cb.Huu;
    });
  }
  if (c_fun) {
    c.resize(m.size());
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
      const std::size_t b = idx / nt;
      c[idx] = c_fun({base.coordinate(0, static_cast<int>(b / nx)), base.coordinate(1, static_cast<int>(b % nx))});
    }
  }
  return functional_from_fields(htilde, huu, c, m, 2);
}

double pointwise_inner(const std::array<double, 3>& a, const std::array<double, 3>& b,
                       const std::array<double, 3>& g) {
  const double det = g[0] * g[2] - g[1] * g[1];
  const double gi[2][2] = {{g[2] / det, -g[1] / det}, {-g[1] / det, g[0] / det}};
  const double A[2][2] = {{a[0], a[1]}, {a[1], a[2]}};
  const double B[2][2] = {{b[0], b[1]}, {b[1], b[2]}};
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) s += gi[i][k] * gi[j][l] * A[i][j] * B[k][l];
  return s;
}

double global_inner(const SymField& a, const SymField& b, const MeasureField& m) {
  if (a.size() != m.size() || b.size() != m.size()) throw GridError("2-form fields do not match the measure grid");
  std::vector<double> v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) v[i] = pointwise_inner(a[i], b[i], m.g[i]);
  return sm_integrate(v, m);
}

template double liouville_density<2>(const FinslerStructure<2>&, const Vec<2>&, double);
template double fiber_measure<2>(const FinslerStructure<2>&, const Vec<2>&, int);

}  // namespace finsler
