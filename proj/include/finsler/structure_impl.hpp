#pragma once

#include <cmath>
#include <map>
#include <stdexcept>

namespace finsler {

template <int K>
Jet<2, K, 0> SampledLogF::fiber_jet(int i0, int i1, const Vec<2>& y0) const {
  using J = Jet<2, K, 0>;
  const double th0 = std::atan2(y0[1], y0[0]);
  const auto line = fiber_line(i0, i1);
  std::array<double, K + 1> p{};
  double fact = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) fact *= k;
    p[k] = spectrum_.evaluate(line, th0, k) / fact;
  }
  const J v0 = J::variable(2, y0[0]), v1 = J::variable(3, y0[1]);
  const double c = std::cos(th0), s = std::sin(th0);
  const J w = c * v0 + s * v1;
  const J t = c * v1 - s * v0;
  const J dth = atan(t / w);
  return sqrt(v0 * v0 + v1 * v1) * exp(J::compose(dth + th0, p));
}

template <int K>
Jet<2, K, 0> SampledLogF::fiber_jet_at_node(int i0, int i1, int k) const {
  using J = Jet<2, K, 0>;
  const auto& d = node_derivatives(i0, i1);
  std::array<double, K + 1> p{};
  double fact = 1.0;
  for (int o = 0; o <= K; ++o) {
    if (o > 0) fact *= o;
    p[o] = d[o][k] / fact;
  }
  const double th0 = fiber_.angle(k);
  const double c = std::cos(th0), s = std::sin(th0);
  const J v0 = J::variable(2, c), v1 = J::variable(3, s);
  const J w = c * v0 + s * v1;
  const J t = c * v1 - s * v0;
  const J dth = atan(t / w);
  return sqrt(v0 * v0 + v1 * v1) * exp(J::compose(dth + th0, p));
}

template <int N>
double FinslerStructure<N>::operator()(const Vec<N>& x, const Vec<N>& y) const {
  if (mode_ == Mode::analytic) return f_(x, y);
  if constexpr (N == 2) {
    const auto node = sampled_->node_of(x);
    return std::hypot(y[0], y[1]) * std::exp(sampled_->log_f(node[0], node[1], std::atan2(y[1], y[0])));
  }
  throw std::logic_error("sampled structures are two-dimensional");
}

template <int N>
void require_slit(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  if (!(s > 0.0)) throw DomainError("slit tangent bundle only: y = 0");
  if (!fs.in_domain(x)) throw DomainError("point outside the chart of " + fs.name());
}

template <int N, int K>
Jet<N, K, 0> fiber_jet_sq(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y0) {
  using J = Jet<N, K, 0>;
  if (fs.mode() == FinslerStructure<N>::Mode::grid) {
    if constexpr (N == 2) {
      const auto node = fs.samples()->node_of(x);
      const J f = fs.samples()->template fiber_jet<K>(node[0], node[1], y0);
      return f * f;
    }
  }
  Vec<N, J> xs, ys;
  for (int i = 0; i < N; ++i) {
    xs[i] = J(x[i]);
    ys[i] = J::variable(N + i, y0[i]);
  }
  const J f = fs.function()(xs, ys);
  return f * f;
}

template <int N, int K, int XC, class At>
Jet<N, K, XC> assemble_fd(const At& at, const Vec<N>& h) {
  using Out = Jet<N, K, XC>;
  using Fib = Jet<N, K, 0>;
  using Off = std::array<int, N>;
  std::map<Off, Fib> cache;
  auto get = [&](const Off& o) -> const Fib& {
    auto it = cache.find(o);
    if (it == cache.end()) it = cache.emplace(o, at(o)).first;
    return it->second;
  };

  // derivative of the fiber jet for every base multi-index a, |a| <= XC
  std::map<Off, std::array<double, Fib::kSize>> deriv;
  Off zero{};
  deriv[zero] = get(zero).c;
  if constexpr (XC >= 1) {
    for (int i = 0; i < N; ++i) {
      std::array<double, Fib::kSize> d1{}, d2{};
      for (int o = -2; o <= 2; ++o) {
        if (o == 0 && XC < 2) continue;
        Off off{};
        off[i] = o;
        const Fib& j = get(off);
        for (int m = 0; m < Fib::kSize; ++m) {
          d1[m] += kFd4First[o + 2] * j.c[m] / h[i];
          if constexpr (XC >= 2) d2[m] += kFd4Second[o + 2] * j.c[m] / (h[i] * h[i]);
        }
      }
      Off a{};
      a[i] = 1;
      deriv[a] = d1;
      if constexpr (XC >= 2) {
        a[i] = 2;
        deriv[a] = d2;
      }
    }
  }
  if constexpr (XC >= 2) {
    for (int i = 0; i < N; ++i) {
      for (int k = i + 1; k < N; ++k) {
        std::array<double, Fib::kSize> d{};
        for (int o = -2; o <= 2; ++o) {
          if (o == 0) continue;
          for (int p = -2; p <= 2; ++p) {
            if (p == 0) continue;
            Off off{};
            off[i] = o;
            off[k] = p;
            const Fib& j = get(off);
            const double w = kFd4First[o + 2] * kFd4First[p + 2] / (h[i] * h[k]);
            for (int m = 0; m < Fib::kSize; ++m) d[m] += w * j.c[m];
          }
        }
        Off a{};
        a[i] = 1;
        a[k] = 1;
        deriv[a] = d;
      }
    }
  }

  Out r;
  const auto& tab = Out::Shape::tables();
  for (int m = 0; m < Out::kSize; ++m) {
    const auto& e = tab.monos[m];
    Off a{};
    typename Fib::Exponents fe{};
    double afact = 1.0;
    for (int i = 0; i < N; ++i) {
      a[i] = e[i];
      afact *= detail::factorial(e[i]);
      fe[N + i] = e[N + i];
    }
    r.c[m] = deriv.at(a)[Fib::Shape::index_of(fe)] / afact;
  }
  return r;
}

template <int N, int K, int XC>
Jet<N, K, XC> local_jet_sq(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y0,
                           const JetOptions& opt) {
  require_slit<N>(fs, x, y0);
  if constexpr (XC == 0) {
    return fiber_jet_sq<N, K>(fs, x, y0);
  } else {
    using J = Jet<N, K, XC>;
    if (fs.mode() == FinslerStructure<N>::Mode::grid) {
      if constexpr (N == 2) {
        const auto& data = *fs.samples();
        const auto node = data.node_of(x);
        const auto& g = data.base();
        auto at = [&](const std::array<int, 2>& o) {
          const auto f = data.template fiber_jet<K>(g.wrap(node[0] + o[0]), g.wrap(node[1] + o[1]), y0);
          return f * f;
        };
        return assemble_fd<2, K, XC>(at, Vec<2>{g.spacing(0), g.spacing(1)});
      }
    }
    if (opt.base == BaseMode::analytic) {
      Vec<N, J> xs, ys;
      for (int i = 0; i < N; ++i) {
        xs[i] = J::variable(i, x[i]);
        ys[i] = J::variable(N + i, y0[i]);
      }
      const J f = fs.function()(xs, ys);
      return f * f;
    }
    Vec<N> h;
    h.fill(opt.fd_step);
    auto at = [&](const std::array<int, N>& o) {
      Vec<N> xo = x;
      for (int i = 0; i < N; ++i) xo[i] += o[i] * h[i];
      return fiber_jet_sq<N, K>(fs, xo, y0);
    };
    return assemble_fd<N, K, XC>(at, h);
  }
}

template <int N>
double fiber_jet(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y, const JetRequest& req,
                 const JetOptions& opt) {
  int kx = 0, ky = 0;
  typename CurvatureJet<N>::Exponents e{};
  for (int i = 0; i < 3; ++i) {
    if (req.base[i] < 0 || req.fiber[i] < 0) throw std::invalid_argument("negative derivative order");
    if (i >= N && (req.base[i] != 0 || req.fiber[i] != 0))
      throw std::invalid_argument("derivative index beyond the dimension");
    kx += req.base[i];
    ky += req.fiber[i];
  }
  if (kx > 2) throw std::invalid_argument("base derivative order above 2");
  if (ky > 4) throw std::invalid_argument("fiber derivative order above 4");
  if (kx + ky > 5) throw std::invalid_argument("total derivative order above 5");
  for (int i = 0; i < N; ++i) {
    e[i] = static_cast<std::uint8_t>(req.base[i]);
    e[N + i] = static_cast<std::uint8_t>(req.fiber[i]);
  }
  const auto sq = local_jet_sq<N, 6, 2>(fs, x, y, opt);
  return req.squared ? sq.partial(e) : sqrt(sq).partial(e);
}

}  // namespace finsler
