#include "finsler/connections.hpp"

#include <cmath>

namespace finsler {

template <int N, int K, int XC>
HorizontalFrame<N> make_frame(const Jet<N, K, XC>& f2, const Vec<N>& x, const Vec<N>& y) {
  static_assert(K >= 4 && XC >= 1);
  HorizontalFrame<N> fr;
  fr.x = x;
  fr.y = y;
  fr.F = std::sqrt(f2.value());
  const auto gj = local::metric(f2);
  fr.g = local::matrix_values<N>(gj);
  require_positive<N>(fr.g, x, y);
  fr.ginv = inverse<N, double>(fr.g);
  Arr3<N> dxg;  // dxg[i][j][k] = d g_ij / dx^k
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        fr.C[i][j][k] = 0.5 * gj[i][j].dy(k).value();
        dxg[i][j][k] = gj[i][j].dx(k).value();
      }
  const auto G = local::spray<N, K, XC>(f2, y);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      const auto gij = G[i].dy(j);
      fr.Nl[i][j] = gij.value();
      for (int k = 0; k < N; ++k) fr.Berwald[i][j][k] = gij.dy(k).value();
    }
  Arr3<N> dg;  // delta_k g_ij
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        double v = dxg[i][j][k];
        for (int s = 0; s < N; ++s) v -= 2.0 * fr.Nl[s][k] * fr.C[i][j][s];
        dg[i][j][k] = v;
      }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        double v = 0.0;
        for (int m = 0; m < N; ++m) v += fr.ginv[i][m] * (dg[m][j][k] + dg[m][k][j] - dg[j][k][m]);
        fr.Gamma[i][j][k] = 0.5 * v;
      }
  return fr;
}

template <int N>
HorizontalFrame<N> horizontal_frame(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                                    const JetOptions& opt) {
  return make_frame<N>(local_jet_sq<N, 4, 1>(fs, x, y, opt), x, y);
}

template <int N>
Vec<N> spray(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const JetOptions& opt) {
  return berwald_coeffs<N>(fs, x, y, opt).G;
}

template <int N>
Mat<N> nonlinear_connection(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                            const JetOptions& opt) {
  return berwald_coeffs<N>(fs, x, y, opt).Gj;
}

template <int N>
SprayData<N> berwald_coeffs(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y,
                            const JetOptions& opt) {
  const auto f2 = local_jet_sq<N, 4, 1>(fs, x, y, opt);
  require_positive<N>(local::matrix_values<N>(local::metric(f2)), x, y);
  const auto G = local::spray<N, 4, 1>(f2, y);
  SprayData<N> s;
  for (int i = 0; i < N; ++i) {
    s.G[i] = G[i].value();
    for (int j = 0; j < N; ++j) {
      const auto gij = G[i].dy(j);
      s.Gj[i][j] = gij.value();
      for (int k = 0; k < N; ++k) s.Gjk[i][j][k] = gij.dy(k).value();
    }
  }
  return s;
}

template <int N>
Arr3<N> cartan_hcoeffs(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const JetOptions& opt) {
  return horizontal_frame<N>(fs, x, y, opt).Gamma;
}

namespace {

void check_valence(int upper, int lower) {
  if (upper < 0 || lower < 0 || upper > 1 || lower > 3 || upper + lower > 3)
    throw std::invalid_argument("h_cov_deriv supports valence up to (1,2) and symmetric 3-forms");
}

}  // namespace

template <int N>
TensorValue<N> h_cov_deriv(const TensorJet<N>& t, const HorizontalFrame<N>& fr) {
  check_valence(t.upper, t.lower);
  const int rank = t.rank();
  if (t.comp.size() != TensorJet<N>::count(rank)) throw std::invalid_argument("tensor component count mismatch");
  TensorValue<N> r(t.upper, t.lower + 1);
  std::array<int, 4> idx{};
  const std::size_t total = t.comp.size();
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    for (int s = rank - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % N);
      rem /= N;
    }
    for (int k = 0; k < N; ++k) {
      const auto& tc = t.comp[c];
      double v = tc.dx(k).value();
      for (int m = 0; m < N; ++m) v -= fr.Nl[m][k] * tc.dy(m).value();
      for (int s = 0; s < rank; ++s) {
        const bool up = s < t.upper;
        for (int m = 0; m < N; ++m) {
          auto j = idx;
          j[s] = m;
          std::size_t f = 0;
          for (int q = 0; q < rank; ++q) f = f * N + j[q];
          const double tv = t.comp[f].value();
          if (up)
            v += fr.Gamma[idx[s]][m][k] * tv;
          else
            v -= fr.Gamma[m][idx[s]][k] * tv;
        }
      }
      r.comp[c * N + k] = v;
    }
  }
  return r;
}

template <int N>
TensorValue<N> contract_y(const TensorValue<N>& t, const Vec<N>& y) {
  if (t.lower < 1) throw std::invalid_argument("contract_y needs a covariant slot");
  TensorValue<N> r(t.upper, t.lower - 1);
  for (std::size_t c = 0; c < r.comp.size(); ++c) {
    double v = 0.0;
    for (int k = 0; k < N; ++k) v += t.comp[c * N + k] * y[k];
    r.comp[c] = v;
  }
  return r;
}

template <int N>
GeodesicPath<N> geodesic_integrate(const FinslerStructure<N>& fs, const Vec<N>& x0, const Vec<N>& y0, double T,
                                   double dt, const JetOptions& opt) {
  if (!(dt > 0.0)) throw std::invalid_argument("geodesic step must be positive");
  if (!(T >= 0.0)) throw std::invalid_argument("geodesic time must be non-negative");
  require_slit<N>(fs, x0, y0);
  fundamental_tensor<N>(fs, x0, y0);
  using State = std::array<double, 2 * N>;
  auto rhs = [&](const State& s, bool& ok) {
    State d{};
    Vec<N> x, v;
    for (int i = 0; i < N; ++i) {
      x[i] = s[i];
      v[i] = s[N + i];
    }
    if (!fs.in_domain(x)) {
      ok = false;
      return d;
    }
    const Vec<N> G = spray<N>(fs, x, v, opt);
    for (int i = 0; i < N; ++i) {
      d[i] = v[i];
      d[N + i] = -2.0 * G[i];
    }
    return d;
  };
  GeodesicPath<N> p;
  State s{};
  for (int i = 0; i < N; ++i) {
    s[i] = x0[i];
    s[N + i] = y0[i];
  }
  auto record = [&](double t) {
    Vec<N> x, v;
    for (int i = 0; i < N; ++i) {
      x[i] = s[i];
      v[i] = s[N + i];
    }
    p.t.push_back(t);
    p.x.push_back(x);
    p.v.push_back(v);
  };
  record(0.0);
  const int steps = static_cast<int>(std::ceil(T / dt - 1e-12));
  for (int n = 0; n < steps; ++n) {
    const double h = std::min(dt, T - n * dt);
    bool ok = true;
    auto axpy = [](const State& a, double c, const State& b) {
      State r;
      for (int i = 0; i < 2 * N; ++i) r[i] = a[i] + c * b[i];
      return r;
    };
    const State k1 = rhs(s, ok);
    const State k2 = ok ? rhs(axpy(s, 0.5 * h, k1), ok) : State{};
    const State k3 = ok ? rhs(axpy(s, 0.5 * h, k2), ok) : State{};
    const State k4 = ok ? rhs(axpy(s, h, k3), ok) : State{};
    if (!ok) {
      p.left_chart = true;
      break;
    }
    for (int i = 0; i < 2 * N; ++i) s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    Vec<N> xe;
    for (int i = 0; i < N; ++i) xe[i] = s[i];
    if (!fs.in_domain(xe)) {
      p.left_chart = true;
      break;
    }
    record(n * dt + h);
  }
  return p;
}

#define FINSLER_INSTANTIATE(N)                                                                                     \
  template HorizontalFrame<N> make_frame<N, 4, 1>(const Jet<N, 4, 1>&, const Vec<N>&, const Vec<N>&);              \
  template HorizontalFrame<N> make_frame<N, 4, 2>(const Jet<N, 4, 2>&, const Vec<N>&, const Vec<N>&);              \
  template HorizontalFrame<N> horizontal_frame<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&,        \
                                                  const JetOptions&);                                               \
  template Vec<N> spray<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&, const JetOptions&);           \
  template Mat<N> nonlinear_connection<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&,                \
                                          const JetOptions&);                                                       \
  template SprayData<N> berwald_coeffs<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&,                \
                                          const JetOptions&);                                                       \
  template Arr3<N> cartan_hcoeffs<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&, const JetOptions&); \
  template TensorValue<N> h_cov_deriv<N>(const TensorJet<N>&, const HorizontalFrame<N>&);                          \
  template TensorValue<N> contract_y<N>(const TensorValue<N>&, const Vec<N>&);                                     \
  template GeodesicPath<N> geodesic_integrate<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&, double, \
                                                 double, const JetOptions&);
FINSLER_INSTANTIATE(2)
FINSLER_INSTANTIATE(3)
#undef FINSLER_INSTANTIATE

}  // namespace finsler
