#include <cmath>
#include <numbers>

#include "doctest.h"
#include "finsler/variations.hpp"
#include "finsler/zoo.hpp"
#include "oracles.hpp"
#include "structures.hpp"

using namespace finsler;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec<2> dir(double t) { return {std::cos(t), std::sin(t)}; }

VectorField<2> trig_field() {
  return VectorField<2>::from([](const auto& x) {
    using std::cos;
    using std::sin;
    using T = std::decay_t<decltype(x[0])>;
    return Vec<2, T>{sin(x[1]) + 0.3 * cos(x[0]), 0.5 * cos(x[0] - x[1])};
  });
}

Vec<2> trig_value(const Vec<2>& x) { return {std::sin(x[1]) + 0.3 * std::cos(x[0]), 0.5 * std::cos(x[0] - x[1])}; }

PhaseFn<2> k_fun() {
  return PhaseFn<2>([](const auto& x, const auto&) {
    using std::cos;
    using std::sin;
    return 0.4 + sin(x[0]) * cos(2.0 * x[1]);
  });
}

// h_ij = a_ij(x), y-independent.
PhaseFn<2> quadratic_psi() {
  return PhaseFn<2>([](const auto& x, const auto& y) {
    using std::cos;
    using std::sin;
    return cos(x[0]) * y[0] * y[0] + 0.6 * sin(x[1]) * y[0] * y[1] + (0.5 + sin(x[0] + x[1])) * y[1] * y[1];
  });
}

Mat<2> quadratic_h(const Vec<2>& x) {
  const double o = 0.3 * std::sin(x[1]);
  return Mat<2>{{{std::cos(x[0]), o}, {o, 0.5 + std::sin(x[0] + x[1])}}};
}

Mat<2> g_at(const FinslerStructure<2>& fs, const Vec<2>& x, const Vec<2>& y) {
  return fundamental_tensor<2>(fs, x, y).matrix();
}

// Time-t flow of X by RK4.
Vec<2> flow(const std::function<Vec<2>(const Vec<2>&)>& X, Vec<2> x, double t, int steps = 16) {
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    auto add = [](const Vec<2>& a, const Vec<2>& b, double c) { return Vec<2>{a[0] + c * b[0], a[1] + c * b[1]}; };
    const Vec<2> k1 = X(x), k2 = X(add(x, k1, h / 2)), k3 = X(add(x, k2, h / 2)), k4 = X(add(x, k3, h));
    for (int i = 0; i < 2; ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return x;
}

// g of the structure pulled back by the flow of the complete lift.
Mat<2> pulled_metric(const FinslerStructure<2>& fs, const std::function<Vec<2>(const Vec<2>&)>& X, const Vec<2>& x,
                     const Vec<2>& y, double t) {
  const double e = 1e-5;
  Mat<2> D;
  for (int j = 0; j < 2; ++j) {
    Vec<2> xp = x, xm = x;
    xp[j] += e;
    xm[j] -= e;
    const Vec<2> fp = flow(X, xp, t), fm = flow(X, xm, t);
    for (int i = 0; i < 2; ++i) D[i][j] = (fp[i] - fm[i]) / (2 * e);
  }
  const Vec<2> yt{D[0][0] * y[0] + D[0][1] * y[1], D[1][0] * y[0] + D[1][1] * y[1]};
  const Mat<2> g = g_at(fs, flow(X, x, t), yt);
  Mat<2> r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) r[i][j] += D[a][i] * g[a][b] * D[b][j];
  return r;
}

double max_abs_diff(const Mat<2>& a, const Mat<2>& b) {
  double w = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) w = std::max(w, std::abs(a[i][j] - b[i][j]));
  return w;
}

}  // namespace

TEST_CASE("conformal variation: trace, h(u,u) and membership") {
  const auto e = get_entry("randers-torus");
  const auto h = conformal_variation<2>(k_fun(), e.structure);
  const auto one = conformal_variation<2>(PhaseFn<2>([](const auto&, const auto&) { return 1.0; }), e.structure);
  for (const auto& p : halton_points(10, 3)) {
    const Vec<2> x{kTwoPi * p[0], kTwoPi * p[1]};
    const Vec<2> y = dir(kTwoPi * p[2]);
    const double k = 0.4 + std::sin(x[0]) * std::cos(2 * x[1]);
    const Mat<2> g = g_at(e.structure, x, y), gi = inverse<2, double>(g);
    const Mat<2> v = variation_value<2>(h, x, y), v1 = variation_value<2>(one, x, y);
    double tr = 0.0, tr1 = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        tr += gi[a][b] * v[a][b];
        tr1 += gi[a][b] * v1[a][b];
      }
    CHECK(tr == doctest::Approx(2 * k).epsilon(1e-10));
    CHECK(tr1 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(variation_uu<2>(h, x, y) == doctest::Approx(k).epsilon(1e-10));
    const auto mr = membership<2>(h, x, y);
    CHECK(mr.homogeneity <= 1e-10);
    CHECK(mr.symmetry <= 1e-10);
  }
}

TEST_CASE("Lie derivative: Killing fields of the flat torus") {
  const auto e = get_entry("euclidean");
  const auto X = VectorField<2>::from([](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return Vec<2, T>{T(0.7) + 0.0 * x[0], T(-1.2) + 0.0 * x[1]};
  });
  const auto L = lie_derivative_metric<2>(X, e.structure);
  const Vec<2> x{0.4, 2.2};
  const Vec<2> y = dir(0.9);
  CHECK(max_abs_diff(variation_value<2>(L, x, y), Mat<2>{}) <= 1e-14);
  CHECK(max_abs_diff(local::matrix_values<2>(variation_jet<2>(L, x, y)), Mat<2>{}) <= 1e-14);
}

TEST_CASE("Lie derivative: Riemannian Killing-operator oracle") {
  const auto fs = teststruct::make("skew", teststruct::SkewRiemann{});
  const auto L = lie_derivative_metric<2>(trig_field(), fs);
  for (const auto& p : halton_points(8, 5)) {
    const Vec<2> x{kTwoPi * p[0], kTwoPi * p[1]};
    const Vec<2> y = dir(kTwoPi * p[2]);
    const auto Gam = oracle::christoffel(teststruct::SkewRiemann::metric, x);
    const Mat<2> a = teststruct::SkewRiemann::metric(x);
    Mat<2> nab;  // nab[i][k] = nabla_i X^k
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) {
        nab[i][k] = oracle::d1([&](double t) { Vec<2> q = x; q[i] = t; return trig_value(q)[k]; }, x[i], 1e-3);
        for (int m = 0; m < 2; ++m) nab[i][k] += Gam[k][i][m] * trig_value(x)[m];
      }
    Mat<2> ref{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) ref[i][j] += a[j][k] * nab[i][k] + a[i][k] * nab[j][k];
    CHECK(max_abs_diff(variation_value<2>(L, x, y), ref) <= 1e-7);
  }
}

TEST_CASE("Lie derivative: flow-pullback and direct coordinate oracles") {
  const auto e = get_entry("randers-torus");
  const auto L = lie_derivative_metric<2>(trig_field(), e.structure);
  const std::function<Vec<2>(const Vec<2>&)> Xv = trig_value;
  for (const auto& p : halton_points(6, 7)) {
    const Vec<2> x{kTwoPi * p[0], kTwoPi * p[1]};
    const Vec<2> y = dir(kTwoPi * p[2]);
    const Mat<2> cov = variation_value<2>(L, x, y);
    const Mat<2> jet = local::matrix_values<2>(variation_jet<2>(L, x, y));
    CHECK(max_abs_diff(cov, jet) <= 1e-10);

    const double t = 1e-3;
    const Mat<2> gp = pulled_metric(e.structure, Xv, x, y, t), gm = pulled_metric(e.structure, Xv, x, y, -t);
    Mat<2> fd;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) fd[i][j] = (gp[i][j] - gm[i][j]) / (2 * t);
    CHECK(max_abs_diff(cov, fd) <= 1e-4);

    // X^k d_k g + y^m d_m X^k d_{y^k} g + g_kj d_i X^k + g_ik d_j X^k
    const Mat<2> g = g_at(e.structure, x, y);
    const Vec<2> X = trig_value(x);
    Mat<2> dX;  // dX[k][i] = d_i X^k
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        dX[k][i] = oracle::d1([&](double s) { Vec<2> q = x; q[i] = s; return trig_value(q)[k]; }, x[i], 1e-3);
    Mat<2> direct{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double v = 0.0;
        for (int k = 0; k < 2; ++k) {
          const double dxg =
              oracle::d1([&](double s) { Vec<2> q = x; q[k] = s; return g_at(e.structure, q, y)[i][j]; }, x[k], 1e-3);
          const double dyg =
              oracle::d1([&](double s) { Vec<2> q = y; q[k] = s; return g_at(e.structure, x, q)[i][j]; }, y[k], 1e-3);
          double ydX = 0.0;
          for (int m = 0; m < 2; ++m) ydX += y[m] * dX[k][m];
          v += X[k] * dxg + ydX * dyg + g[k][j] * dX[k][i] + g[i][k] * dX[k][j];
        }
        direct[i][j] = v;
      }
    CHECK(max_abs_diff(cov, direct) <= 1e-7);
    const auto mr = membership<2>(L, x, y);
    CHECK(mr.homogeneity <= 1e-10);
    CHECK(mr.symmetry <= 1e-10);
  }
}

TEST_CASE("divergence: flat constant field and Riemannian oracle") {
  {
    const auto e = get_entry("euclidean");
    const auto h = family_variation<2>(PhaseFn<2>([](const auto&, const auto& y) {
                                         return 0.3 * y[0] * y[0] - 1.1 * y[0] * y[1] + 2.0 * y[1] * y[1];
                                       }),
                                       e.structure);
    const auto d = divergence_delta<2>(h, {1.0, 2.0}, dir(0.3));
    CHECK(std::abs(d[0]) <= 1e-14);
    CHECK(std::abs(d[1]) <= 1e-14);
  }
  const auto fs = teststruct::make("skew", teststruct::SkewRiemann{});
  const auto h = family_variation<2>(quadratic_psi(), fs);
  for (const auto& p : halton_points(8, 11)) {
    const Vec<2> x{kTwoPi * p[0], kTwoPi * p[1]};
    const Vec<2> y = dir(kTwoPi * p[2]);
    const auto Gam = oracle::christoffel(teststruct::SkewRiemann::metric, x);
    const Mat<2> ai = inverse<2, double>(teststruct::SkewRiemann::metric(x));
    const Mat<2> hv = quadratic_h(x);
    Vec<2> ref{};
    for (int k = 0; k < 2; ++k) {
      double s = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int c = 0; c < 2; ++c) {
          double nch = oracle::d1([&](double t) { Vec<2> q = x; q[c] = t; return quadratic_h(q)[i][k]; }, x[c], 1e-3);
          for (int m = 0; m < 2; ++m) nch -= Gam[m][c][i] * hv[m][k] + Gam[m][c][k] * hv[i][m];
          s += ai[i][c] * nch;
        }
      ref[k] = -s;
    }
    const auto d = divergence_delta<2>(h, x, y);
    CHECK(std::abs(d[0] - ref[0]) <= 1e-6);
    CHECK(std::abs(d[1] - ref[1]) <= 1e-6);
  }
}

TEST_CASE("codifferentials") {
  const auto e = get_entry("randers-torus");
  const Vec<2> x{0.7, 4.1};
  const Vec<2> y = dir(2.2);
  const auto geo = point_geometry<2>(e.structure, x, y);
  const std::array<PhaseFn<2>, 2> zero{PhaseFn<2>([](const auto&, const auto&) { return 0.0; }),
                                       PhaseFn<2>([](const auto&, const auto&) { return 0.0; })};
  CHECK(codifferential<2>(form_jet<2>(zero, x, y), FormKind::horizontal, geo) == 0.0);
  CHECK(codifferential<2>(form_jet<2>(zero, x, y), FormKind::vertical, geo) == 0.0);

  // b_i = dF/dy^i gives -F g^ij d_j d_i F = -(n - 1)
  const double b = 0.3, eps = 0.2;
  const std::array<PhaseFn<2>, 2> dF{PhaseFn<2>([b](const auto&, const auto& y) {
                                       using std::sqrt;
                                       return y[0] / sqrt(y[0] * y[0] + y[1] * y[1]) + b;
                                     }),
                                     PhaseFn<2>([eps](const auto& x, const auto& y) {
                                       using std::sin;
                                       using std::sqrt;
                                       return y[1] / sqrt(y[0] * y[0] + y[1] * y[1]) + eps * sin(x[0]);
                                     })};
  for (const auto& p : halton_points(6, 13)) {
    const Vec<2> xs{kTwoPi * p[0], kTwoPi * p[1]};
    const Vec<2> ys = dir(kTwoPi * p[2]);
    const auto g = point_geometry<2>(e.structure, xs, ys);
    CHECK(codifferential<2>(form_jet<2>(dF, xs, ys), FormKind::vertical, g) == doctest::Approx(-1.0).epsilon(1e-12));
  }

  // Riemannian horizontal: -div a = -(1/sqrt det a) d_i(sqrt det a a^ij a_j)
  const auto fs = teststruct::make("skew", teststruct::SkewRiemann{});
  const std::array<PhaseFn<2>, 2> form{PhaseFn<2>([](const auto& x, const auto&) {
                                         using std::sin;
                                         return sin(x[0] + 2.0 * x[1]);
                                       }),
                                       PhaseFn<2>([](const auto& x, const auto&) {
                                         using std::cos;
                                         return 0.5 * cos(x[0]);
                                       })};
  auto vec = [](const Vec<2>& q) {
    const Mat<2> a = teststruct::SkewRiemann::metric(q), ai = inverse<2, double>(a);
    const double s = std::sqrt(determinant<2, double>(a));
    const double a0 = std::sin(q[0] + 2 * q[1]), a1 = 0.5 * std::cos(q[0]);
    return Vec<2>{s * (ai[0][0] * a0 + ai[0][1] * a1), s * (ai[1][0] * a0 + ai[1][1] * a1)};
  };
  for (const auto& p : halton_points(6, 17)) {
    const Vec<2> xs{kTwoPi * p[0], kTwoPi * p[1]};
    const Vec<2> ys = dir(kTwoPi * p[2]);
    double div = 0.0;
    for (int i = 0; i < 2; ++i)
      div += oracle::d1([&](double t) { Vec<2> q = xs; q[i] = t; return vec(q)[i]; }, xs[i], 1e-3);
    div /= std::sqrt(determinant<2, double>(teststruct::SkewRiemann::metric(xs)));
    const auto g = point_geometry<2>(fs, xs, ys);
    CHECK(codifferential<2>(form_jet<2>(form, xs, ys), FormKind::horizontal, g) == doctest::Approx(-div).epsilon(1e-7));
  }
}

TEST_CASE("trace split is an orthogonal projection") {
  const auto e = get_entry("randers-torus");
  const auto [base, fiber] = build_grid(2, 12, kTwoPi, 16);
  const MeasureField m = build_measure(e.structure, base, fiber);
  const auto kg = sample_variation(conformal_variation<2>(k_fun(), e.structure), m);
  const auto s0 = trace_split(kg, m);
  double w = 0.0;
  for (std::size_t i = 0; i < kg.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      w = std::max(w, std::abs(s0.conformal[i][c] - kg[i][c]));
      w = std::max(w, std::abs(s0.traceless[i][c]));
    }
  CHECK(w <= 1e-12);

  const auto h = sample_variation(family_variation<2>(quadratic_psi(), e.structure), m);
  const auto s = trace_split(h, m);
  const double hh = global_inner(h, h, m);
  CHECK(std::abs(global_inner(s.conformal, s.traceless, m)) <= 1e-10 * hh);
  const auto s2 = trace_split(s.traceless, m);
  double w2 = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      w2 = std::max(w2, std::abs(s2.conformal[i][c]));
      w2 = std::max(w2, std::abs(s2.traceless[i][c] - s.traceless[i][c]));
    }
  CHECK(w2 <= 1e-12);
}

TEST_CASE("raw membership residual separates members from arbitrary arrays") {
  const auto e = get_entry("randers-torus");
  const auto [base, fiber] = build_grid(2, 8, kTwoPi, 32);
  const MeasureField m = build_measure(e.structure, base, fiber);
  auto h = sample_variation(family_variation<2>(quadratic_psi(), e.structure), m);
  CHECK(raw_membership(h, fiber).symmetry <= 1e-10);
  auto hk = sample_variation(conformal_variation<2>(k_fun(), e.structure), m);
  CHECK(raw_membership(hk, fiber).symmetry <= 1e-8);
  for (std::size_t i = 0; i < h.size(); ++i) h[i][0] += 0.1 * std::cos(fiber.angle(static_cast<int>(i % 32)));
  CHECK(raw_membership(h, fiber).symmetry >= 1e-2);
}

TEST_CASE("adjointness of the Lie derivative and delta") {
  const auto e = get_entry("randers-torus");
  const auto [base, fiber] = build_grid(2, 16, kTwoPi, 16);
  const auto zeroX = VectorField<2>::from([](const auto& x) {
    using T = std::decay_t<decltype(x[0])>;
    return Vec<2, T>{0.0 * x[0], 0.0 * x[1]};
  });
  const auto h = family_variation<2>(quadratic_psi(), e.structure);
  CHECK(adjointness_residual(zeroX, h, base, fiber) == 0.0);

  const auto h2 = family_variation<2>(PhaseFn<2>([p = quadratic_psi()](const auto& x, const auto& y) {
                                        return 2.0 * p(x, y);
                                      }),
                                      e.structure);
  const auto r = adjointness({{trig_field(), h, "h"}, {trig_field(), h2, "2h"}}, base, fiber);
  CHECK(r[1].lhs == doctest::Approx(2 * r[0].lhs).epsilon(1e-12));
  CHECK(r[1].rhs == doctest::Approx(2 * r[0].rhs).epsilon(1e-12));

  const auto corpus = adjointness(adjointness_corpus(e.structure), base, fiber);
  for (const auto& c : corpus) {
    INFO(c.label, " lhs ", c.lhs, " rhs ", c.rhs);
    CHECK(c.residual <= 1e-3);
    CHECK(std::abs(c.rhs) >= 1e-2);
  }
  const auto flat = get_entry("euclidean");
  const auto hf = family_variation<2>(PhaseFn<2>([f = flat.structure.function()](const auto& x, const auto& y) {
                                        using std::cos;
                                        return 2.0 * f(x, y) * (0.2 * cos(x[1]) * y[0]);
                                      }),
                                      flat.structure);
  CHECK(adjointness_residual(trig_field(), hf, base, fiber) <= 1e-3);
}

TEST_CASE("variation identities along metric paths") {
  VariationOptions opt;
  opt.base_nodes = 16;
  opt.fiber_nodes = 32;
  opt.functional = false;
  SUBCASE("Randers direction on a flat background") {
    const auto flat = get_entry("euclidean");
    const auto h = family_variation<2>(PhaseFn<2>([f = flat.structure.function()](const auto& x, const auto& y) {
                                         using std::cos;
                                         using std::sin;
                                         return 2.0 * f(x, y) * (0.2 * cos(x[1]) * y[0] + 0.1 * sin(x[0]) * y[1]);
                                       }),
                                       flat.structure);
    const auto rep = variation_residuals(h, opt);
    for (const auto& it : rep.items) {
      INFO(it.name, " lhs ", it.lhs, " rhs ", it.rhs, " residual ", it.residual);
      CHECK(it.passed);
    }
  }
  SUBCASE("conformal and quadratic directions on the Randers torus") {
    const auto e = get_entry("randers-torus");
    for (const auto& h : {conformal_variation<2>(k_fun(), e.structure), family_variation<2>(quadratic_psi(), e.structure)}) {
      const auto rep = variation_residuals(h, opt);
      for (const auto& it : rep.items) {
        INFO(h.label, ": ", it.name, " lhs ", it.lhs, " rhs ", it.rhs, " residual ", it.residual);
        CHECK(it.passed);
      }
    }
  }
  SUBCASE("zero direction") {
    const auto e = get_entry("randers-torus");
    const auto h = family_variation<2>(PhaseFn<2>([](const auto&, const auto&) { return 0.0; }), e.structure);
    const auto rep = variation_residuals(h, opt);
    for (const auto& it : rep.items) CHECK(it.residual == 0.0);
  }
}

TEST_CASE("conformal first variation of the second-type functional on a surface") {
  // int Htilde eta is a multiple of the Euler characteristic in two dimensions,
  // so its derivative vanishes while int H(u,u) tr h eta does not.
  const auto e = get_entry("conformal-torus");
  VariationOptions opt;
  opt.base_nodes = 12;
  opt.fiber_nodes = 16;
  opt.functional_base_nodes = 16;
  opt.functional_fiber_nodes = 16;
  const auto k = PhaseFn<2>([](const auto& x, const auto&) {
    using std::cos;
    using std::sin;
    return 0.4 + sin(x[0]) * cos(x[1]);
  });
  const auto rep = variation_residuals(conformal_variation<2>(k, e.structure), opt);
  const auto& d = rep.items.back();
  REQUIRE(d.name.find("dI/dt") != std::string::npos);
  MESSAGE("dI/dt = ", d.lhs, ", int H tr h = ", d.rhs, ", residual ", d.residual);
  CHECK(std::abs(d.lhs) <= 1e-6);
  CHECK(std::abs(d.rhs) >= 1e-2);
  CHECK_FALSE(d.passed);
}
