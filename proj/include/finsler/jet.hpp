#pragma once

// Truncated multivariate Taylor arithmetic over the slit tangent bundle.
//
// A Jet<N, K, XC> holds the Taylor coefficients of a function of the 2N chart
// variables (x^1..x^N, y^1..y^N) around an expansion point, truncated to total
// degree K and to degree XC in the base variables. Coefficients are stored as
// f^(alpha)/alpha!, so products are plain convolutions. Coefficients whose
// multi-index lies inside the shape are exact: truncation never feeds lower
// orders.
//
// Variable numbering: 0..N-1 are base coordinates, N..2N-1 fiber coordinates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace finsler {

namespace detail {

constexpr int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

constexpr int jet_size(int n, int k, int xc) {
  int s = 0;
  for (int a = 0; a <= std::min(xc, k); ++a) s += binomial(a + n - 1, n - 1) * binomial(k - a + n, n);
  return s;
}

constexpr int clamp_xcap(int xc, int k) { return xc < 0 ? 0 : (xc > k ? k : xc); }

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace detail

template <int N, int K, int XC>
struct JetShape {
  static constexpr int kVars = 2 * N;
  static constexpr int kSize = detail::jet_size(N, K, XC);
  using Exponents = std::array<std::uint8_t, 2 * N>;

  struct Tables {
    std::vector<Exponents> monos;
    std::vector<int> degree;
    std::vector<int> code_to_index;
    // products grouped by output coefficient: pairs [start[k], start[k+1])
    std::vector<int> start;
    std::vector<std::uint16_t> lhs, rhs;
    std::array<int, 2 * N> unit{};  // index of the linear monomial of each variable, -1 if absent
  };

  static int code(const Exponents& e) {
    int c = 0;
    for (int v = kVars - 1; v >= 0; --v) c = c * (K + 1) + e[v];
    return c;
  }

  static int index_of(const Exponents& e) {
    int tot = 0, xdeg = 0;
    for (int v = 0; v < kVars; ++v) {
      tot += e[v];
      if (v < N) xdeg += e[v];
    }
    if (tot > K || xdeg > XC) return -1;
    return tables().code_to_index[code(e)];
  }

  static const Tables& tables() {
    static const Tables t = build();
    return t;
  }

 private:
  static void enumerate(Exponents& e, int v, int remaining, int xleft, std::vector<Exponents>& out) {
    if (v == kVars) {
      out.push_back(e);
      return;
    }
    const int cap = v < N ? std::min(remaining, xleft) : remaining;
    for (int p = 0; p <= cap; ++p) {
      e[v] = static_cast<std::uint8_t>(p);
      enumerate(e, v + 1, remaining - p, v < N ? xleft - p : xleft, out);
    }
    e[v] = 0;
  }

  static Tables build() {
    Tables t;
    Exponents e{};
    enumerate(e, 0, K, XC, t.monos);
    auto deg = [](const Exponents& m) {
      int s = 0;
      for (auto p : m) s += p;
      return s;
    };
    std::stable_sort(t.monos.begin(), t.monos.end(),
                     [&](const Exponents& a, const Exponents& b) { return deg(a) < deg(b); });
    if (static_cast<int>(t.monos.size()) != kSize) throw std::logic_error("jet shape size mismatch");
    int codes = 1;
    for (int v = 0; v < kVars; ++v) codes *= (K + 1);
    t.code_to_index.assign(codes, -1);
    t.degree.resize(kSize);
    for (int i = 0; i < kSize; ++i) {
      t.code_to_index[code(t.monos[i])] = i;
      t.degree[i] = deg(t.monos[i]);
    }
    t.unit.fill(-1);
    for (int v = 0; v < kVars; ++v) {
      Exponents u{};
      u[v] = 1;
      if (K >= 1 && (v >= N || XC >= 1)) t.unit[v] = t.code_to_index[code(u)];
    }
    std::vector<std::vector<std::pair<int, int>>> by_out(kSize);
    for (int i = 0; i < kSize; ++i) {
      for (int j = 0; j < kSize; ++j) {
        Exponents s{};
        int tot = 0, xdeg = 0;
        for (int v = 0; v < kVars; ++v) {
          s[v] = static_cast<std::uint8_t>(t.monos[i][v] + t.monos[j][v]);
          tot += s[v];
          if (v < N) xdeg += s[v];
        }
        if (tot > K || xdeg > XC) continue;
        by_out[t.code_to_index[code(s)]].emplace_back(i, j);
      }
    }
    t.start.push_back(0);
    for (int k = 0; k < kSize; ++k) {
      for (auto [i, j] : by_out[k]) {
        t.lhs.push_back(static_cast<std::uint16_t>(i));
        t.rhs.push_back(static_cast<std::uint16_t>(j));
      }
      t.start.push_back(static_cast<int>(t.lhs.size()));
    }
    return t;
  }
};

template <int N, int K, int XC = K>
class Jet {
  static_assert(K >= 0 && XC >= 0 && XC <= K, "jet shape must satisfy 0 <= XC <= K");

 public:
  static constexpr int kDim = N;
  static constexpr int kOrder = K;
  static constexpr int kXCap = XC;
  using Shape = JetShape<N, K, XC>;
  static constexpr int kSize = Shape::kSize;
  using Exponents = typename Shape::Exponents;

  std::array<double, kSize> c{};

  Jet() = default;
  Jet(double v) { c[0] = v; }  // NOLINT: constants convert implicitly

  // Independent variable `var` expanded at `value`.
  static Jet variable(int var, double value) {
    Jet r(value);
    const int u = Shape::tables().unit[var];
    if (u >= 0) r.c[u] = 1.0;
    return r;
  }

  double value() const { return c[0]; }

  double coeff(const Exponents& e) const {
    const int i = Shape::index_of(e);
    return i < 0 ? 0.0 : c[i];
  }

  // Mixed partial derivative at the expansion point.
  double partial(const Exponents& e) const {
    double f = 1.0;
    for (auto p : e) f *= detail::factorial(p);
    return coeff(e) * f;
  }

  Jet nilpotent() const {
    Jet r = *this;
    r.c[0] = 0.0;
    return r;
  }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < kSize; ++i) c[i] += o.c[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < kSize; ++i) c[i] -= o.c[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  Jet& operator+=(double s) {
    c[0] += s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) {
    for (auto& v : a.c) v = -v;
    return a;
  }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    const auto& t = Shape::tables();
    Jet r;
    for (int k = 0; k < kSize; ++k) {
      double s = 0.0;
      for (int p = t.start[k]; p < t.start[k + 1]; ++p) s += a.c[t.lhs[p]] * b.c[t.rhs[p]];
      r.c[k] = s;
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(double s, const Jet& b) { return reciprocal(b) * s; }

  // Evaluate sum_k coeffs[k] * (a - a0)^k, the composition f(a) given the
  // univariate Taylor coefficients of f at a0.
  static Jet compose(const Jet& a, const std::array<double, K + 1>& coeffs) {
    const Jet d = a.nilpotent();
    Jet r(coeffs[K]);
    for (int k = K - 1; k >= 0; --k) {
      r = r * d;
      r.c[0] += coeffs[k];
    }
    return r;
  }

  friend Jet reciprocal(const Jet& a) {
    std::array<double, K + 1> k{};
    const double inv = 1.0 / a.c[0];
    double p = inv;
    for (int i = 0; i <= K; ++i) {
      k[i] = (i % 2 == 0 ? 1.0 : -1.0) * p;
      p *= inv;
    }
    return compose(a, k);
  }

  friend Jet exp(const Jet& a) {
    std::array<double, K + 1> k{};
    const double e = std::exp(a.c[0]);
    for (int i = 0; i <= K; ++i) k[i] = e / detail::factorial(i);
    return compose(a, k);
  }

  friend Jet log(const Jet& a) {
    std::array<double, K + 1> k{};
    const double a0 = a.c[0];
    k[0] = std::log(a0);
    double p = 1.0;
    for (int i = 1; i <= K; ++i) {
      p /= a0;
      k[i] = (i % 2 == 1 ? 1.0 : -1.0) * p / i;
    }
    return compose(a, k);
  }

  friend Jet pow(const Jet& a, double e) {
    std::array<double, K + 1> k{};
    const double a0 = a.c[0];
    double binom = 1.0;
    for (int i = 0; i <= K; ++i) {
      k[i] = binom * std::pow(a0, e - i);
      binom *= (e - i) / (i + 1);
    }
    return compose(a, k);
  }

  friend Jet sqrt(const Jet& a) { return pow(a, 0.5); }

  friend Jet sin(const Jet& a) {
    std::array<double, K + 1> k{};
    const double s = std::sin(a.c[0]), co = std::cos(a.c[0]);
    const double cyc[4] = {s, co, -s, -co};
    for (int i = 0; i <= K; ++i) k[i] = cyc[i % 4] / detail::factorial(i);
    return compose(a, k);
  }

  friend Jet cos(const Jet& a) {
    std::array<double, K + 1> k{};
    const double s = std::sin(a.c[0]), co = std::cos(a.c[0]);
    const double cyc[4] = {co, -s, -co, s};
    for (int i = 0; i <= K; ++i) k[i] = cyc[i % 4] / detail::factorial(i);
    return compose(a, k);
  }

  friend Jet atan(const Jet& a) {
    // (1 + t^2) f'(t) = 1, expanded at a0
    const double a0 = a.c[0];
    const double q0 = 1.0 + a0 * a0, q1 = 2.0 * a0;
    std::array<double, K + 1> r{}, k{};
    for (int m = 0; m < K; ++m) {
      double s = (m == 0 ? 1.0 : 0.0);
      if (m >= 1) s -= q1 * r[m - 1];
      if (m >= 2) s -= r[m - 2];
      r[m] = s / q0;
    }
    k[0] = std::atan(a0);
    for (int m = 0; m < K; ++m) k[m + 1] = r[m] / (m + 1);
    return compose(a, k);
  }

  // Derivative with respect to chart variable `var`.
  template <int Var>
  auto d() const {
    constexpr bool is_base = Var < N;
    constexpr int K2 = K > 0 ? K - 1 : 0;
    constexpr int XC2 = is_base ? (XC > 0 ? XC - 1 : 0) : (XC < K2 ? XC : K2);
    Jet<N, K2, XC2> r;
    if constexpr (K == 0 || (is_base && XC == 0)) {
      return r;
    } else {
      const auto& out = Jet<N, K2, XC2>::Shape::tables();
      for (int o = 0; o < Jet<N, K2, XC2>::kSize; ++o) {
        Exponents e = out.monos[o];
        e[Var] = static_cast<std::uint8_t>(e[Var] + 1);
        r.c[o] = (e[Var]) * c[Shape::index_of(e)];
      }
      return r;
    }
  }

  // Runtime-variable derivative; same result type as d<N>() for a fiber
  // variable and d<0>() for a base one, so base and fiber are split.
  auto dy(int i) const {
    constexpr int K2 = K > 0 ? K - 1 : 0;
    constexpr int XC2 = XC < K2 ? XC : K2;
    Jet<N, K2, XC2> r;
    if constexpr (K > 0) {
      const auto& out = Jet<N, K2, XC2>::Shape::tables();
      const int var = N + i;
      for (int o = 0; o < Jet<N, K2, XC2>::kSize; ++o) {
        Exponents e = out.monos[o];
        e[var] = static_cast<std::uint8_t>(e[var] + 1);
        r.c[o] = e[var] * c[Shape::index_of(e)];
      }
    }
    return r;
  }

  auto dx(int i) const {
    constexpr int K2 = K > 0 ? K - 1 : 0;
    constexpr int XC2 = XC > 0 ? XC - 1 : 0;
    Jet<N, K2, (XC2 < K2 ? XC2 : K2)> r;
    if constexpr (K > 0 && XC > 0) {
      using Out = Jet<N, K2, (XC2 < K2 ? XC2 : K2)>;
      const auto& out = Out::Shape::tables();
      for (int o = 0; o < Out::kSize; ++o) {
        Exponents e = out.monos[o];
        e[i] = static_cast<std::uint8_t>(e[i] + 1);
        r.c[o] = e[i] * c[Shape::index_of(e)];
      }
    }
    return r;
  }

  // Drop coefficients outside a smaller shape.
  template <int K2, int XC2>
  Jet<N, K2, XC2> truncate() const {
    static_assert(K2 <= K && XC2 <= XC, "truncation can only shrink a jet");
    if constexpr (K2 == K && XC2 == XC) {
      return *this;
    } else {
      static const std::vector<int> map = [] {
        const auto& out = Jet<N, K2, XC2>::Shape::tables();
        std::vector<int> m(Jet<N, K2, XC2>::kSize);
        for (int o = 0; o < Jet<N, K2, XC2>::kSize; ++o) m[o] = Shape::index_of(out.monos[o]);
        return m;
      }();
      Jet<N, K2, XC2> r;
      for (int o = 0; o < Jet<N, K2, XC2>::kSize; ++o) r.c[o] = c[map[o]];
      return r;
    }
  }
};

// Value extraction that works for plain doubles and jets alike.
inline double value_of(double v) { return v; }
template <int N, int K, int XC>
double value_of(const Jet<N, K, XC>& j) {
  return j.value();
}

}  // namespace finsler
