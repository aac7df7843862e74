#include "finsler/polar.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

#include "finsler/series.hpp"

namespace finsler {

std::vector<double> bundle_derivative(std::span<const double> field, const BaseGrid& base, int fiber_nodes,
                                      int axis, DiffMode mode) {
  if (base.n != 2) throw GridError("bundle fields need a two-dimensional base");
  const int m = base.nodes;
  if (field.size() != base.size() * fiber_nodes) throw GridError("bundle field does not match the grid");
  std::vector<double> out(field.size());
  if (mode == DiffMode::fd4) {
    const double inv = 1.0 / base.spacing(axis);
#pragma omp parallel for schedule(static)
    for (int i0 = 0; i0 < m; ++i0) {
      for (int i1 = 0; i1 < m; ++i1) {
        std::size_t r[5];
        for (int o = -2; o <= 2; ++o)
          r[o + 2] = (axis == 0 ? base.flat(base.wrap(i0 + o), i1) : base.flat(i0, base.wrap(i1 + o))) * fiber_nodes;
        const std::size_t row = base.flat(i0, i1) * fiber_nodes;
        for (int k = 0; k < fiber_nodes; ++k) {
          const double v = kFd4First[0] * field[r[0] + k] + kFd4First[1] * field[r[1] + k] +
                           kFd4First[3] * field[r[3] + k] + kFd4First[4] * field[r[4] + k];
          out[row + k] = v * inv;
        }
      }
    }
  } else {
    PeriodicSpectrum spec(m, base.length[axis]);
    const int lines = m * fiber_nodes;
#pragma omp parallel for schedule(static)
    for (int l = 0; l < lines; ++l) {
      const int o = l / fiber_nodes, k = l % fiber_nodes;
      std::vector<double> line(m), d(m);
      auto at = [&](int i) {
        return axis == 0 ? (static_cast<std::size_t>(i) * m + o) * fiber_nodes + k
                         : (static_cast<std::size_t>(o) * m + i) * fiber_nodes + k;
      };
      for (int i = 0; i < m; ++i) line[i] = field[at(i)];
      spec.derivative(line, 1, d);
      for (int i = 0; i < m; ++i) out[at(i)] = d[i];
    }
  }
  return out;
}

namespace {

struct Violation {
  std::size_t index = std::numeric_limits<std::size_t>::max();
};

template <int M>
void evaluate(const BaseGrid& base, const FiberGrid& fiber, std::span<const double> log_f, const PolarOptions& opt,
              PolarCurvature& out) {
  const int nx = base.nodes, nt = fiber.nodes;
  const std::size_t nb = base.size(), total = nb * nt;
  const PeriodicSpectrum spec(nt);

  // angular derivatives of P, pd[m][node]
  std::vector<std::vector<double>> pd(M + 1, std::vector<double>(total));
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < nb; ++b) {
    const auto d = spec.derivatives(log_f.subspan(b * nt, nt), M);
    for (int m = 0; m <= M; ++m) std::copy(d[m].begin(), d[m].end(), pd[m].begin() + b * nt);
  }
  std::vector<std::array<Series<M>, 2>> er(nt);
  for (int k = 0; k < nt; ++k) er[k] = unit_circle_series<M>(fiber.angle(k));
  std::array<double, M + 1> inv_fact{};
  inv_fact[0] = 1.0;
  for (int m = 1; m <= M; ++m) inv_fact[m] = inv_fact[m - 1] / m;

  auto e_series = [&](std::size_t idx) {
    Series<M> p;
    for (int m = 0; m <= M; ++m) p.c[m] = 2.0 * pd[m][idx] * inv_fact[m];
    return exp(p);
  };

  // coefficients of E = F^2 on the unit circle, then their base derivatives
  std::vector<std::vector<double>> ec(M, std::vector<double>(total));
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < total; ++i) {
    const auto e = e_series(i);
    for (int m = 0; m < M; ++m) ec[m][i] = e.c[m];
  }
  std::array<std::vector<std::vector<double>>, 2> dec;
  for (int a = 0; a < 2; ++a)
    for (int m = 0; m < M; ++m) dec[a].push_back(bundle_derivative(ec[m], base, nt, a, opt.base));
  ec.clear();

  // spray G^i = r^2 Gamma^i(theta) and D = dG^k/dy^k = r D(theta)
  constexpr int MS = M - 2, MD = M - 3, MR = M - 4;
  std::array<std::vector<std::vector<double>>, 2> gam;
  for (auto& v : gam) v.assign(MS, std::vector<double>(total));
  std::vector<std::vector<double>> dd(MD + 1, std::vector<double>(total));
  out.min_eig.assign(total, 0.0);
  out.rho.assign(total, 0.0);
  std::vector<std::array<double, 3>> g0(total);
  Violation first;
#pragma omp parallel
  {
    Violation local;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < total; ++i) {
      const int k = static_cast<int>(i % nt);
      const auto& e = er[k];
      const auto E = e_series(i);
      const auto Ed = E.d();  // order M-1
      using S1 = Series<M - 1>;
      using S2 = Series<M - 2>;
      const std::array<S1, 2> r1{e[0].template truncate<M - 1>(), e[1].template truncate<M - 1>()};
      const std::array<S1, 2> t1{-e[1].template truncate<M - 1>(), e[0].template truncate<M - 1>()};
      std::array<S1, 2> w;
      for (int h = 0; h < 2; ++h) w[h] = 2.0 * E.template truncate<M - 1>() * r1[h] + Ed * t1[h];
      const std::array<S2, 2> r2{r1[0].template truncate<M - 2>(), r1[1].template truncate<M - 2>()};
      const std::array<S2, 2> t2{t1[0].template truncate<M - 2>(), t1[1].template truncate<M - 2>()};
      S2 g[2][2];
      for (int h = 0; h < 2; ++h) {
        const S2 wh = w[h].template truncate<M - 2>();
        const S2 wd = w[h].d();
        for (int j = 0; j < 2; ++j) g[h][j] = 0.5 * (wh * r2[j] + wd * t2[j]);
      }
      g[0][1] = 0.5 * (g[0][1] + g[1][0]);
      g[1][0] = g[0][1];
      const double a = g[0][0].value(), bb = g[0][1].value(), c = g[1][1].value();
      const double mean = 0.5 * (a + c), rad = std::sqrt(0.25 * (a - c) * (a - c) + bb * bb);
      const double lmin = mean - rad, lmax = mean + rad;
      out.min_eig[i] = lmin;
      if (!(lmin > kSingularThreshold * std::max(1.0, std::abs(lmax)))) {
        local.index = std::min(local.index, i);
        continue;
      }
      out.rho[i] = (a * c - bb * bb) / E.value();
      g0[i] = {a, bb, c};
      std::array<S1, 2> dE;
      for (int j = 0; j < 2; ++j)
        for (int m = 0; m < M; ++m) dE[j].c[m] = dec[j][m][i];
      std::array<S2, 2> rhs;
      for (int h = 0; h < 2; ++h) {
        S2 acc = -dE[h].template truncate<M - 2>();
        for (int j = 0; j < 2; ++j)
          acc += r2[j] * (2.0 * dE[j].template truncate<M - 2>() * r2[h] + dE[j].d() * t2[h]);
        rhs[h] = acc;
      }
      const S2 det = g[0][0] * g[1][1] - g[0][1] * g[0][1];
      std::array<S2, 2> G;
      G[0] = 0.25 * ((g[1][1] * rhs[0] - g[0][1] * rhs[1]) / det);
      G[1] = 0.25 * ((g[0][0] * rhs[1] - g[0][1] * rhs[0]) / det);
      using S3 = Series<MD>;
      S3 D;
      for (int j = 0; j < 2; ++j)
        D += 2.0 * G[j].template truncate<MD>() * r2[j].template truncate<MD>() + G[j].d() * t2[j].template truncate<MD>();
      for (int j = 0; j < 2; ++j)
        for (int m = 0; m < MS; ++m) gam[j][m][i] = G[j].c[m];
      for (int m = 0; m <= MD; ++m) dd[m][i] = D.c[m];
    }
#pragma omp critical
    first.index = std::min(first.index, local.index);
  }
  if (first.index != std::numeric_limits<std::size_t>::max()) {
    const std::size_t b = first.index / nt;
    const Vec<2> x{base.coordinate(0, static_cast<int>(b / nx)), base.coordinate(1, static_cast<int>(b % nx))};
    const double th = fiber.angle(static_cast<int>(first.index % nt));
    std::ostringstream os;
    os << "convexity lost at x=(" << x[0] << "," << x[1] << ") theta=" << th
       << " min eigenvalue=" << out.min_eig[first.index];
    throw ConvexityError(os.str(), x, th);
  }

  // base derivatives: d_k Gamma^k summed, and d_j D for j = 0, 1
  std::vector<std::vector<double>> divg(MR + 1), dD0(MR + 1), dD1(MR + 1);
  for (int m = 0; m <= MR; ++m) {
    divg[m] = bundle_derivative(gam[0][m], base, nt, 0, opt.base);
    const auto t = bundle_derivative(gam[1][m], base, nt, 1, opt.base);
    for (std::size_t i = 0; i < total; ++i) divg[m][i] += t[i];
    dD0[m] = bundle_derivative(dd[m], base, nt, 0, opt.base);
    dD1[m] = bundle_derivative(dd[m], base, nt, 1, opt.base);
  }

  out.huu.assign(total, 0.0);
  if (opt.second_type) {
    out.htilde.assign(total, 0.0);
    out.gem.assign(total, 0.0);
    out.tensor_gap.assign(total, 0.0);
  }
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < total; ++i) {
    const int k = static_cast<int>(i % nt);
    using S3 = Series<MD>;
    using S4 = Series<MR>;
    const auto& e = er[k];
    const std::array<S3, 2> r3{e[0].template truncate<MD>(), e[1].template truncate<MD>()};
    const std::array<S3, 2> t3{-e[1].template truncate<MD>(), e[0].template truncate<MD>()};
    std::array<S3, 2> G;
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m <= MD; ++m) G[j].c[m] = gam[j][m][i];
    S3 D;
    for (int m = 0; m <= MD; ++m) D.c[m] = dd[m][i];
    S4 dg, d0, d1;
    for (int m = 0; m <= MR; ++m) {
      dg.c[m] = divg[m][i];
      d0.c[m] = dD0[m][i];
      d1.c[m] = dD1[m][i];
    }
    std::array<S4, 2> r4{r3[0].template truncate<MR>(), r3[1].template truncate<MR>()};
    std::array<S4, 2> t4{t3[0].template truncate<MR>(), t3[1].template truncate<MR>()};
    const S4 D4 = D.template truncate<MR>();
    const S4 Dd = D.d();
    S4 ric = 2.0 * dg - (r4[0] * d0 + r4[1] * d1);
    for (int j = 0; j < 2; ++j) ric += 2.0 * G[j].template truncate<MR>() * (D4 * r4[j] + Dd * t4[j]);
    S4 Nm[2][2];  // Nm[k][j] = dG^k/dy^j
    for (int a = 0; a < 2; ++a)
      for (int j = 0; j < 2; ++j) Nm[a][j] = 2.0 * G[a].template truncate<MR>() * r4[j] + G[a].d() * t4[j];
    for (int a = 0; a < 2; ++a)
      for (int j = 0; j < 2; ++j) ric -= Nm[a][j] * Nm[j][a];
    const double E0 = std::exp(2.0 * pd[0][i]);
    out.huu[i] = ric.value() / E0;
    if constexpr (MR >= 2) {
      if (opt.second_type) {
        // Htilde_hj = 1/2 d2(r^2 ric(theta)) / dy^h dy^j at r = 1
        const Series<2> R = ric.template truncate<2>();
        std::array<Series<1>, 2> v;
        for (int h = 0; h < 2; ++h)
          v[h] = 2.0 * R.template truncate<1>() * r4[h].template truncate<1>() + R.d() * t4[h].template truncate<1>();
        double ht[2][2];
        for (int h = 0; h < 2; ++h)
          for (int j = 0; j < 2; ++j) ht[h][j] = 0.5 * (v[h].value() * r4[j].value() + v[h].d().value() * t4[j].value());
        const double sym = 0.5 * (ht[0][1] + ht[1][0]);
        ht[0][1] = ht[1][0] = sym;
        const auto& gg = g0[i];
        const double det = gg[0] * gg[2] - gg[1] * gg[1];
        const double gi[2][2] = {{gg[2] / det, -gg[1] / det}, {-gg[1] / det, gg[0] / det}};
        double mix[2][2];
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) mix[a][b] = gi[a][0] * ht[0][b] + gi[a][1] * ht[1][b];
        const double tr = mix[0][0] + mix[1][1];
        out.htilde[i] = tr;
        double gem = 0.0, gap = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            gem = std::max(gem, std::abs(mix[a][b] - (a == b ? tr / 2 : 0.0)));
            gap = std::max(gap, std::abs(mix[a][b] - (a == b ? out.huu[i] : 0.0)));
          }
        out.gem[i] = gem;
        out.tensor_gap[i] = gap;
      }
    }
  }
}

}  // namespace

PolarCurvature polar_curvature(const BaseGrid& base, const FiberGrid& fiber, std::span<const double> log_f,
                               const PolarOptions& opt) {
  if (base.n != 2) throw GridError("polar curvature needs a two-dimensional base");
  for (bool p : base.periodic)
    if (!p) throw GridError("polar curvature needs a periodic base");
  if (log_f.size() != base.size() * fiber.nodes) throw GridError("log F array does not match the grid");
  PolarCurvature out;
  if (opt.second_type)
    evaluate<6>(base, fiber, log_f, opt, out);
  else
    evaluate<4>(base, fiber, log_f, opt, out);
  return out;
}

}  // namespace finsler
