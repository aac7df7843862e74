#include "finsler/variations.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "finsler/parallel.hpp"

namespace finsler {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <int N>
using J41 = Jet<N, 4, 1>;
template <int N>
using J42 = Jet<N, 4, 2>;
template <int N>
using J31 = Jet<N, 3, 1>;

template <int N, class J>
void jet_point(const Vec<N>& x, const Vec<N>& y, Vec<N, J>& xs, Vec<N, J>& ys) {
  for (int i = 0; i < N; ++i) {
    xs[i] = J::variable(i, x[i]);
    ys[i] = J::variable(N + i, y[i]);
  }
}

template <int N>
void require_analytic(const FinslerStructure<N>& fs) {
  if (fs.mode() != FinslerStructure<N>::Mode::analytic)
    throw std::invalid_argument("variations need an analytic background structure");
}

template <int N>
Mat<N, FieldJet<N>> jet_from_f2(const VariationField<N>& h, const J42<N>& f2, const Vec<N>& x, const Vec<N>& y) {
  Mat<N, FieldJet<N>> r;
  switch (h.kind) {
    case VariationKind::conformal:
    case VariationKind::family: {
      Vec<N, J41<N>> xs, ys;
      jet_point<N>(x, y, xs, ys);
      const J41<N> psi = h.psi(xs, ys);
      for (int i = 0; i < N; ++i) {
        const auto pi = psi.dy(i);
        for (int j = 0; j < N; ++j) r[i][j] = (0.5 * pi.dy(j)).template truncate<1, 1>();
      }
      return r;
    }
    case VariationKind::lie: {
      Vec<N, J42<N>> xs, ys;
      jet_point<N>(x, y, xs, ys);
      J31<N> psi(0.0);
      for (int k = 0; k < N; ++k) {
        const J42<N> Xk = h.X.comp[k](xs, ys);
        const J31<N> fy = f2.dy(k).template truncate<3, 1>();
        psi += Xk.template truncate<3, 1>() * f2.dx(k);
        for (int m = 0; m < N; ++m) psi += J31<N>::variable(N + m, y[m]) * Xk.dx(m) * fy;
      }
      for (int i = 0; i < N; ++i) {
        const auto pi = psi.dy(i);
        for (int j = 0; j < N; ++j) r[i][j] = 0.5 * pi.dy(j);
      }
      return r;
    }
    case VariationKind::raw:
      break;
  }
  throw std::invalid_argument("raw variations have no jet; use the sampled residual checks");
}

template <int N>
PointGeometry<N> geometry_from_f2(const J42<N>& f2, const Vec<N>& x, const Vec<N>& y) {
  PointGeometry<N> geo;
  geo.frame = make_frame<N, 4, 2>(f2, x, y);
  const auto g2 = local::metric(f2);  // (2, 2) jets
  Mat<N, FieldJet<N>> g;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) g[i][j] = g2[i][j].template truncate<1, 1>();
  const Mat<N, FieldJet<N>> gi = inverse<N, FieldJet<N>>(g);
  TensorJet<N> C(0, 3), I(0, 1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const FieldJet<N> c = 0.5 * g2[i][j].dy(k);
        C.at({i, j, k}) = c;
        geo.C[i][j][k] = c.value();
      }
  for (int k = 0; k < N; ++k) {
    FieldJet<N> acc(0.0);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) acc += gi[i][j] * C.at({i, j, k});
    I.at({k}) = acc;
    geo.I[k] = acc.value();
  }
  const auto dC = contract_y<N>(h_cov_deriv<N>(C, geo.frame), y);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) geo.Cdot[i][j][k] = dC.at({i, j, k});
  const auto dI = contract_y<N>(h_cov_deriv<N>(I, geo.frame), y);
  for (int k = 0; k < N; ++k) {
    double v = 0.0;
    for (int j = 0; j < N; ++j) v += geo.frame.ginv[k][j] * dI.at({j});
    geo.J[k] = v;
  }
  return geo;
}

template <int N>
J42<N> f2_jet(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y) {
  require_analytic<N>(fs);
  return local_jet_sq<N, 4, 2>(fs, x, y, JetOptions{});
}

template <int N>
Mat<N> raise2(const Mat<N>& h, const Mat<N>& gi) {
  Mat<N> r{};
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double v = 0.0;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) v += gi[i][a] * gi[j][b] * h[a][b];
      r[i][j] = v;
    }
  return r;
}

template <int N>
double inner2(const Mat<N>& a, const Mat<N>& b, const Mat<N>& gi) {
  const Mat<N> au = raise2<N>(a, gi);
  double s = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) s += au[i][j] * b[i][j];
  return s;
}

template <int N>
Mat<N> values(const Mat<N, FieldJet<N>>& h) {
  return local::matrix_values<N>(h);
}

Vec<2> node_x(const BaseGrid& base, std::size_t b) {
  const int nx = base.nodes;
  return {base.coordinate(0, static_cast<int>(b / nx)), base.coordinate(1, static_cast<int>(b % nx))};
}

Mat<2> sym_matrix(const std::array<double, 3>& s) { return Mat<2>{{{s[0], s[1]}, {s[1], s[2]}}}; }

}  // namespace

std::string to_string(VariationKind k) {
  switch (k) {
    case VariationKind::conformal:
      return "conformal";
    case VariationKind::lie:
      return "lie";
    case VariationKind::family:
      return "family";
    case VariationKind::raw:
      return "raw";
  }
  return "unknown";
}

template <int N>
Vec<N> VectorField<N>::operator()(const Vec<N>& x) const {
  Vec<N> r{};
  const Vec<N> y{};
  for (int k = 0; k < N; ++k) r[k] = comp[k](x, y);
  return r;
}

template <int N>
Mat<N> VectorField<N>::jacobian(const Vec<N>& x) const {
  using J = J41<N>;
  Vec<N, J> xs, ys;
  for (int i = 0; i < N; ++i) {
    xs[i] = J::variable(i, x[i]);
    ys[i] = J(0.0);
  }
  Mat<N> r{};
  for (int k = 0; k < N; ++k) {
    const J v = comp[k](xs, ys);
    for (int i = 0; i < N; ++i) r[k][i] = v.dx(i).value();
  }
  return r;
}

template <int N>
VariationField<N> conformal_variation(const PhaseFn<N>& k, const FinslerStructure<N>& fs) {
  require_analytic<N>(fs);
  VariationField<N> v;
  v.kind = VariationKind::conformal;
  v.label = "conformal";
  v.background = fs;
  v.psi = PhaseFn<N>([k, f = fs.function()](const auto& x, const auto& y) {
    const auto F = f(x, y);
    return k(x, y) * F * F;
  });
  return v;
}

template <int N>
VariationField<N> family_variation(const PhaseFn<N>& psi, const FinslerStructure<N>& fs, std::string label) {
  require_analytic<N>(fs);
  VariationField<N> v;
  v.kind = VariationKind::family;
  v.label = std::move(label);
  v.background = fs;
  v.psi = psi;
  return v;
}

template <int N>
VariationField<N> lie_derivative_metric(const VectorField<N>& X, const FinslerStructure<N>& fs) {
  require_analytic<N>(fs);
  VariationField<N> v;
  v.kind = VariationKind::lie;
  v.label = "lie";
  v.background = fs;
  v.X = X;
  return v;
}

template <int N>
Mat<N, FieldJet<N>> variation_jet(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y) {
  require_slit<N>(h.background, x, y);
  if (h.kind == VariationKind::lie) return jet_from_f2<N>(h, f2_jet<N>(h.background, x, y), x, y);
  return jet_from_f2<N>(h, J42<N>(0.0), x, y);
}

template <int N>
Mat<N> variation_value(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y) {
  if (h.kind == VariationKind::lie) {
    const auto geo = point_geometry<N>(h.background, x, y);
    return lie_covariant<N>(h.X, geo);
  }
  return values<N>(variation_jet<N>(h, x, y));
}

template <int N>
double variation_uu(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y) {
  const Mat<N> v = values<N>(variation_jet<N>(h, x, y));
  const double F = h.background(x, y);
  double s = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) s += v[i][j] * y[i] * y[j];
  return s / (F * F);
}

template <int N>
MembershipResidual membership(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y) {
  const auto hj = variation_jet<N>(h, x, y);
  MembershipResidual r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double e = 0.0;
      for (int k = 0; k < N; ++k) {
        e += y[k] * hj[i][j].dy(k).value();
        r.symmetry = std::max(r.symmetry, std::abs(hj[i][j].dy(k).value() - hj[i][k].dy(j).value()));
      }
      r.homogeneity = std::max(r.homogeneity, std::abs(e));
    }
  return r;
}

MembershipResidual raw_membership(const SymField& h, const FiberGrid& fiber) {
  const int nt = fiber.nodes;
  if (nt <= 0 || h.size() % nt != 0) throw GridError("raw field does not match the fiber grid");
  const PeriodicSpectrum spec(nt);
  const std::size_t lines = h.size() / nt;
  MembershipResidual r;
  std::vector<double> in(nt), d00(nt), d01(nt), d11(nt);
  for (std::size_t b = 0; b < lines; ++b) {
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < nt; ++k) in[k] = h[b * nt + k][c];
      spec.derivative(in, 1, c == 0 ? std::span<double>(d00) : c == 1 ? std::span<double>(d01) : std::span<double>(d11));
    }
    for (int k = 0; k < nt; ++k) {
      const double th = fiber.angle(k);
      const double e0 = -std::sin(th), e1 = std::cos(th);
      r.symmetry = std::max(r.symmetry, std::abs(d00[k] * e1 - d01[k] * e0));
      r.symmetry = std::max(r.symmetry, std::abs(d01[k] * e1 - d11[k] * e0));
    }
  }
  return r;
}

template <int N>
PointGeometry<N> point_geometry(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y) {
  return geometry_from_f2<N>(f2_jet<N>(fs, x, y), x, y);
}

template <int N>
Mat<N> lie_covariant(const VectorField<N>& X, const PointGeometry<N>& geo) {
  const auto& fr = geo.frame;
  const Vec<N> xv = X(fr.x);
  const Mat<N> dX = X.jacobian(fr.x);
  Mat<N> nabla;  // nabla[i][k] = nabla_i X^k
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) {
      double v = dX[k][i];
      for (int m = 0; m < N; ++m) v += fr.Gamma[k][i][m] * xv[m];
      nabla[i][k] = v;
    }
  Vec<N> n0{};  // y^m nabla_m X^k
  for (int k = 0; k < N; ++k)
    for (int m = 0; m < N; ++m) n0[k] += fr.y[m] * nabla[m][k];
  Mat<N> L{};
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      double v = 0.0;
      for (int k = 0; k < N; ++k) v += fr.g[j][k] * nabla[i][k] + fr.g[i][k] * nabla[j][k] + 2.0 * n0[k] * geo.C[k][i][j];
      L[i][j] = v;
    }
  return L;
}

template <int N>
Vec<N> divergence_delta(const Mat<N, FieldJet<N>>& h, const PointGeometry<N>& geo) {
  const auto& fr = geo.frame;
  TensorJet<N> t(0, 2);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) t.at({a, b}) = h[a][b];
  const auto T = h_cov_deriv<N>(t, fr);  // T_abc = nabla_c h_ab
  Mat<N> hv, dh0{};
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      hv[a][b] = h[a][b].value();
      for (int c = 0; c < N; ++c) dh0[a][b] += T.at({a, b, c}) * fr.y[c];
    }
  const Mat<N> hu = raise2<N>(hv, fr.ginv), dh0u = raise2<N>(dh0, fr.ginv);
  Vec<N> r{};
  for (int k = 0; k < N; ++k) {
    double v = 0.0;
    for (int i = 0; i < N; ++i)
      for (int c = 0; c < N; ++c) v += fr.ginv[i][c] * T.at({i, k, c});
    for (int j = 0; j < N; ++j) v -= hv[k][j] * geo.J[j];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) v += geo.Cdot[k][i][j] * hu[i][j] + geo.C[k][i][j] * dh0u[i][j];
    r[k] = -v;
  }
  return r;
}

template <int N>
Vec<N> divergence_delta(const VariationField<N>& h, const Vec<N>& x, const Vec<N>& y) {
  require_slit<N>(h.background, x, y);
  const auto f2 = f2_jet<N>(h.background, x, y);
  return divergence_delta<N>(jet_from_f2<N>(h, f2, x, y), geometry_from_f2<N>(f2, x, y));
}

template <int N>
Vec<N, FieldJet<N>> form_jet(const std::array<PhaseFn<N>, N>& a, const Vec<N>& x, const Vec<N>& y) {
  Vec<N, J41<N>> xs, ys;
  jet_point<N>(x, y, xs, ys);
  Vec<N, FieldJet<N>> r;
  for (int i = 0; i < N; ++i) r[i] = a[i](xs, ys).template truncate<1, 1>();
  return r;
}

template <int N>
double codifferential(const Vec<N, FieldJet<N>>& form, FormKind kind, const PointGeometry<N>& geo) {
  const auto& fr = geo.frame;
  if (kind == FormKind::vertical) {
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) s += fr.ginv[i][j] * form[i].dy(j).value();
    return -fr.F * s;
  }
  if (kind != FormKind::horizontal) throw std::invalid_argument("unknown codifferential kind");
  TensorJet<N> t(0, 1);
  for (int j = 0; j < N; ++j) t.at({j}) = form[j];
  const auto D = h_cov_deriv<N>(t, fr);  // D_ji = nabla_i a_j
  double s = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) s += fr.ginv[i][j] * D.at({j, i});
  for (int j = 0; j < N; ++j) s -= form[j].value() * geo.J[j];
  return -s;
}

Mat<2> trace_part(const Mat<2>& h, const Mat<2>& g) {
  const Mat<2> gi = inverse<2, double>(g);
  double tr = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) tr += gi[i][j] * h[i][j];
  Mat<2> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = 0.5 * tr * g[i][j];
  return r;
}

TraceSplit trace_split(const SymField& h, const MeasureField& m) {
  if (h.size() != m.size()) throw GridError("variation field does not match the measure grid");
  TraceSplit s;
  s.conformal.resize(h.size());
  s.traceless.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Mat<2> c = trace_part(sym_matrix(h[i]), sym_matrix(m.g[i]));
    s.conformal[i] = {c[0][0], c[0][1], c[1][1]};
    s.traceless[i] = {h[i][0] - c[0][0], h[i][1] - c[0][1], h[i][2] - c[1][1]};
  }
  return s;
}

SymField sample_variation(const VariationField<2>& h, const MeasureField& m) {
  SymField out(m.size());
  const int nt = m.fiber.nodes;
  parallel_for(m.size(), [&](std::size_t idx) {
    const Vec<2> x = node_x(m.base, idx / nt);
    const Mat<2> v = variation_value<2>(h, x, unit_direction(m.fiber.angle(static_cast<int>(idx % nt))));
    out[idx] = {v[0][0], v[0][1], v[1][1]};
  });
  return out;
}

std::vector<AdjointResult> adjointness(const std::vector<AdjointPair>& pairs, const BaseGrid& base,
                                       const FiberGrid& fiber) {
  if (pairs.empty()) return {};
  const auto& bg = pairs.front().h.background;
  require_analytic<2>(bg);
  const MeasureField m = build_measure(bg, base, fiber);
  const std::size_t P = pairs.size();
  const int nt = fiber.nodes;
  std::vector<std::vector<double>> lf(P, std::vector<double>(m.size())), rf = lf;
  parallel_for(m.size(), [&](std::size_t idx) {
    const Vec<2> x = node_x(base, idx / nt);
    const Vec<2> y = unit_direction(fiber.angle(static_cast<int>(idx % nt)));
    const auto f2 = f2_jet<2>(bg, x, y);
    const auto geo = geometry_from_f2<2>(f2, x, y);
    for (std::size_t p = 0; p < P; ++p) {
      const auto hj = jet_from_f2<2>(pairs[p].h, f2, x, y);
      const Mat<2> L = lie_covariant<2>(pairs[p].X, geo);
      lf[p][idx] = 0.5 * inner2<2>(L, values<2>(hj), geo.frame.ginv);
      const Vec<2> d = divergence_delta<2>(hj, geo);
      const Vec<2> X = pairs[p].X(x);
      rf[p][idx] = X[0] * d[0] + X[1] * d[1];
    }
  });
  std::vector<AdjointResult> out(P);
  for (std::size_t p = 0; p < P; ++p) {
    out[p].label = pairs[p].label;
    out[p].lhs = sm_integrate(lf[p], m);
    out[p].rhs = sm_integrate(rf[p], m);
    out[p].residual = std::abs(out[p].lhs - out[p].rhs) / (1.0 + std::abs(out[p].rhs));
  }
  return out;
}

double adjointness_residual(const VectorField<2>& X, const VariationField<2>& h, const BaseGrid& base,
                            const FiberGrid& fiber) {
  return adjointness({AdjointPair{X, h, h.label}}, base, fiber).front().residual;
}

std::vector<AdjointPair> adjointness_corpus(const FinslerStructure<2>& bg) {
  const auto f = bg.function();
  std::vector<AdjointPair> c;
  {
    auto X = VectorField<2>::from([](const auto& x) {
      using std::cos;
      using std::sin;
      using T = std::decay_t<decltype(x[0])>;
      return Vec<2, T>{sin(x[0] + x[1]) + 0.5 * sin(x[1]), sin(x[0] + x[1]) + 0.5 * cos(x[0])};
    });
    auto h = conformal_variation<2>(PhaseFn<2>([](const auto& x, const auto&) {
                                      using std::cos;
                                      return cos(x[0] + x[1]);
                                    }),
                                    bg);
    c.push_back({X, h, "conformal cos(x1+x2)"});
  }
  {
    auto X = VectorField<2>::from([](const auto& x) {
      using std::cos;
      using std::sin;
      using T = std::decay_t<decltype(x[0])>;
      return Vec<2, T>{sin(x[1]) + cos(x[0]) * sin(x[1]), cos(x[0]) + sin(x[0])};
    });
    auto h = family_variation<2>(PhaseFn<2>([f](const auto& x, const auto& y) {
                                   using std::cos;
                                   using std::sin;
                                   return 2.0 * f(x, y) * (0.2 * cos(x[1]) * y[0] + 0.1 * sin(x[0]) * y[1]);
                                 }),
                                 bg, "randers direction");
    c.push_back({X, h, h.label});
  }
  {
    auto X = VectorField<2>::from([](const auto& x) {
      using std::cos;
      using std::sin;
      using T = std::decay_t<decltype(x[0])>;
      return Vec<2, T>{0.3 + cos(x[1]), sin(2.0 * x[0]) + sin(x[0] + x[1])};
    });
    auto Y = VectorField<2>::from([](const auto& x) {
      using std::cos;
      using std::sin;
      using T = std::decay_t<decltype(x[0])>;
      return Vec<2, T>{cos(x[1]), sin(x[0] + x[1])};
    });
    c.push_back({X, lie_derivative_metric<2>(Y, bg), "lie of (cos x2, sin(x1+x2))"});
  }
  {
    auto X = VectorField<2>::from([](const auto& x) {
      using std::cos;
      using std::sin;
      using T = std::decay_t<decltype(x[0])>;
      return Vec<2, T>{sin(x[0] - x[1]), cos(x[1])};
    });
    auto h = family_variation<2>(PhaseFn<2>([](const auto& x, const auto& y) {
                                   using std::cos;
                                   using std::sin;
                                   const auto s = 0.3 * sin(x[1]);
                                   return cos(x[0]) * y[0] * y[0] + 2.0 * s * y[0] * y[1] +
                                          (0.5 + sin(x[0]) * cos(x[1])) * y[1] * y[1];
                                 }),
                                 bg, "quadratic a_ij(x)");
    c.push_back({X, h, h.label});
  }
  {
    auto X = VectorField<2>::from([](const auto& x) {
      using std::cos;
      using std::sin;
      using T = std::decay_t<decltype(x[0])>;
      return Vec<2, T>{cos(2.0 * x[1]), sin(x[0]) * cos(x[1])};
    });
    auto h = conformal_variation<2>(PhaseFn<2>([](const auto& x, const auto&) {
                                      using std::sin;
                                      return 0.5 + sin(x[0]) * sin(x[1]);
                                    }),
                                    bg);
    c.push_back({X, h, "conformal 0.5+sin x1 sin x2"});
  }
  return c;
}

FinslerStructure<2> variation_path(const VariationField<2>& h, double t) {
  if (h.kind != VariationKind::conformal && h.kind != VariationKind::family)
    throw std::invalid_argument("metric paths are realized for conformal and family variations only");
  return FinslerStructure<2>::analytic(h.background.name() + "+t*h",
                                       PhaseFn<2>([f = h.background.function(), psi = h.psi, t](const auto& x,
                                                                                                  const auto& y) {
                                         using std::sqrt;
                                         const auto F = f(x, y);
                                         return sqrt(F * F + t * psi(x, y));
                                       }));
}

bool VariationReport::passed() const {
  for (const auto& i : items)
    if (!i.passed) return false;
  return true;
}

namespace {

double rel(double a, double b, double scale) { return std::abs(a - b) / (scale > 0.0 ? scale : 1.0); }

ResidualItem make_item(std::string name, double lhs, double rhs, double scale, double tol) {
  ResidualItem it;
  it.name = std::move(name);
  it.lhs = lhs;
  it.rhs = rhs;
  it.residual = rel(lhs, rhs, scale);
  it.tol = tol;
  it.passed = it.residual <= tol;
  return it;
}

double volume(const FinslerStructure<2>& fs, const BaseGrid& base, const FiberGrid& fiber) {
  const MeasureField m = build_measure(fs, base, fiber);
  return sm_integrate(std::vector<double>(m.size(), 1.0), m);
}

}  // namespace

VariationReport variation_residuals(const VariationField<2>& h, const VariationOptions& opt) {
  if (!(opt.t > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const auto grids = build_grid(2, opt.base_nodes, kTwoPi, opt.fiber_nodes);
  const BaseGrid& base = grids.first;
  const FiberGrid& fiber = grids.second;
  const MeasureField m0 = build_measure(h.background, base, fiber);
  const double t = opt.t;
  VariationReport rep;

  const SymField hs = sample_variation(h, m0);
  std::vector<double> tr(m0.size()), huu(m0.size());
  for (std::size_t i = 0; i < m0.size(); ++i) {
    const Mat<2> g = sym_matrix(m0.g[i]), gi = inverse<2, double>(g), hv = sym_matrix(hs[i]);
    double s = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) s += gi[a][b] * hv[a][b];
    tr[i] = s;
    const Vec<2> e = unit_direction(fiber.angle(static_cast<int>(i % fiber.nodes)));
    double q = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) q += hv[a][b] * e[a] * e[b];
    huu[i] = q * m0.r[i] * m0.r[i];
  }
  auto abs_int = [&](const std::vector<double>& f, double w) {
    std::vector<double> a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::abs(w * f[i]);
    return sm_integrate(a, m0);
  };

  // (a) volume
  {
    auto dV = [&](double s) { return (volume(variation_path(h, s), base, fiber) - volume(variation_path(h, -s), base, fiber)) / (2.0 * s); };
    const double c1 = 0.5 * sm_integrate(tr, m0), c2 = sm_integrate(huu, m0);
    const double s1 = abs_int(tr, 0.5), s2 = abs_int(huu, 1.0);
    double d = dV(t);
    for (auto [name, c, s] : {std::tuple{"dV/dt vs 1/2 int tr h", c1, s1}, std::tuple{"dV/dt vs (n/2) int h(u,u)", c2, s2}}) {
      auto it = make_item(name, d, c, s, opt.tol);
      if (!it.passed) {
        const double r = (4.0 * dV(0.5 * t) - d) / 3.0;
        it = make_item(name, r, c, s, opt.tol);
        it.richardson = true;
      }
      rep.items.push_back(it);
    }
    rep.items.push_back(make_item("1/2 int tr h vs (n/2) int h(u,u)", c1, c2, std::max(s1, s2), opt.tol));
  }

  // (b) nodewise density
  {
    auto drho = [&](double s) {
      const MeasureField p = build_measure(variation_path(h, s), base, fiber);
      const MeasureField q = build_measure(variation_path(h, -s), base, fiber);
      std::vector<double> d(p.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = (p.rho[i] - q.rho[i]) / (2.0 * s);
      return d;
    };
    std::vector<double> rhs(m0.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      rhs[i] = (tr[i] - huu[i]) * m0.rho[i];
      scale = std::max(scale, std::abs(rhs[i]));
    }
    auto worst = [&](const std::vector<double>& d) {
      double w = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) w = std::max(w, std::abs(d[i] - rhs[i]));
      return w;
    };
    const auto d = drho(t);
    ResidualItem it;
    it.name = "d rho/dt vs (tr h - (n/2) h(u,u)) rho, nodewise";
    it.lhs = worst(d);
    it.rhs = scale;
    it.residual = it.lhs / (scale > 0.0 ? scale : 1.0);
    it.tol = opt.tol;
    it.passed = it.residual <= opt.tol;
    if (!it.passed) {
      const auto d2 = drho(0.5 * t);
      std::vector<double> r(d.size());
      for (std::size_t i = 0; i < r.size(); ++i) r[i] = (4.0 * d2[i] - d[i]) / 3.0;
      it.lhs = worst(r);
      it.residual = it.lhs / (scale > 0.0 ? scale : 1.0);
      it.passed = it.residual <= opt.tol;
      it.richardson = true;
    }
    rep.items.push_back(it);
  }

  // (c) spray variation
  {
    const auto pts = halton_points(opt.spray_samples);
    const auto Fp = variation_path(h, t), Fm = variation_path(h, -t);
    double worst = 0.0, scale = 0.0;
    for (const auto& p : pts) {
      const Vec<2> x{kTwoPi * p[0], kTwoPi * p[1]};
      const Vec<2> y = unit_direction(kTwoPi * p[2]);
      const auto sp = berwald_coeffs<2>(Fp, x, y), sm = berwald_coeffs<2>(Fm, x, y);
      const auto f2 = f2_jet<2>(h.background, x, y);
      const auto geo = geometry_from_f2<2>(f2, x, y);
      const auto& fr = geo.frame;
      const auto hj = jet_from_f2<2>(h, f2, x, y);
      TensorJet<2> tj(0, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) tj.at({a, b}) = hj[a][b];
      const auto T = h_cov_deriv<2>(tj, fr);
      Vec<2> Gp;
      for (int s = 0; s < 2; ++s) Gp[s] = (sp.G[s] - sm.G[s]) / (2.0 * t);
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
          const double lhs = (sp.Gj[i][k] - sm.Gj[i][k]) / (2.0 * t);
          double r = 0.0;
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              r += 0.5 * fr.ginv[i][a] * fr.y[b] * (T.at({a, b, k}) + T.at({a, k, b}) - T.at({b, k, a}));
          for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) r -= 2.0 * fr.ginv[i][a] * geo.C[a][k][s] * Gp[s];
          worst = std::max(worst, std::abs(lhs - r));
          scale = std::max(scale, std::abs(lhs));
        }
    }
    ResidualItem it;
    it.name = "dG^i_k/dt vs covariant formula with FD G'";
    it.lhs = worst;
    it.rhs = scale;
    it.residual = worst / (scale > 0.0 ? scale : 1.0);
    it.tol = opt.tol;
    it.passed = it.residual <= opt.tol;
    rep.items.push_back(it);
  }

  // (d) functional along a conformal direction
  if (opt.functional && h.kind == VariationKind::conformal) {
    const auto fgrids = build_grid(2, opt.functional_base_nodes, kTwoPi, opt.functional_fiber_nodes);
    const BaseGrid& fb = fgrids.first;
    const FiberGrid& ff = fgrids.second;
    const MeasureField m = build_measure(h.background, fb, ff);
    const int nt = ff.nodes;
    std::vector<double> f(m.size()), fa(m.size());
    parallel_for(m.size(), [&](std::size_t idx) {
      const Vec<2> x = node_x(fb, idx / nt);
      const Vec<2> y = unit_direction(ff.angle(static_cast<int>(idx % nt)));
      const double H = ricci_directional<2>(h.background, x, y);
      const auto v = values<2>(variation_jet<2>(h, x, y));
      const Mat<2> gi = inverse<2, double>(sym_matrix(m.g[idx]));
      double s = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s += gi[a][b] * v[a][b];
      f[idx] = H * s;
      fa[idx] = std::abs(f[idx]);
    });
    const double rhs = sm_integrate(f, m), scale = sm_integrate(fa, m);
    auto dI = [&](double s) {
      return (functional_I(variation_path(h, s), fb, ff).I - functional_I(variation_path(h, -s), fb, ff).I) /
             (2.0 * s);
    };
    auto it = make_item("conformal dI/dt vs int H(u,u) tr h", dI(t), rhs, scale, opt.tol_functional);
    if (!it.passed) {
      const double r = (4.0 * dI(0.5 * t) - it.lhs) / 3.0;
      it = make_item(it.name, r, rhs, scale, opt.tol_functional);
      it.richardson = true;
    }
    rep.items.push_back(it);
  }
  return rep;
}

#define FINSLER_INSTANTIATE(N)                                                                                   \
  template struct VectorField<N>;                                                                                \
  template VariationField<N> conformal_variation<N>(const PhaseFn<N>&, const FinslerStructure<N>&);              \
  template VariationField<N> family_variation<N>(const PhaseFn<N>&, const FinslerStructure<N>&, std::string);    \
  template VariationField<N> lie_derivative_metric<N>(const VectorField<N>&, const FinslerStructure<N>&);        \
  template Mat<N, FieldJet<N>> variation_jet<N>(const VariationField<N>&, const Vec<N>&, const Vec<N>&);         \
  template Mat<N> variation_value<N>(const VariationField<N>&, const Vec<N>&, const Vec<N>&);                     \
  template double variation_uu<N>(const VariationField<N>&, const Vec<N>&, const Vec<N>&);                       \
  template MembershipResidual membership<N>(const VariationField<N>&, const Vec<N>&, const Vec<N>&);             \
  template PointGeometry<N> point_geometry<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&);         \
  template Mat<N> lie_covariant<N>(const VectorField<N>&, const PointGeometry<N>&);                              \
  template Vec<N> divergence_delta<N>(const Mat<N, FieldJet<N>>&, const PointGeometry<N>&);                      \
  template Vec<N> divergence_delta<N>(const VariationField<N>&, const Vec<N>&, const Vec<N>&);                   \
  template Vec<N, FieldJet<N>> form_jet<N>(const std::array<PhaseFn<N>, N>&, const Vec<N>&, const Vec<N>&);      \
  template double codifferential<N>(const Vec<N, FieldJet<N>>&, FormKind, const PointGeometry<N>&);
FINSLER_INSTANTIATE(2)
FINSLER_INSTANTIATE(3)
#undef FINSLER_INSTANTIATE

}  // namespace finsler
