#include "finsler/zoo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "finsler/measure.hpp"

namespace finsler {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Euclidean {
  template <class T, std::size_t M>
  T operator()(const std::array<T, M>&, const std::array<T, M>& y) const {
    using std::sqrt;
    T s = y[0] * y[0];
    for (std::size_t i = 1; i < M; ++i) s += y[i] * y[i];
    return sqrt(s);
  }
};

struct AnisoQuadratic {
  template <class T>
  T operator()(const Vec<2, T>&, const Vec<2, T>& y) const {
    using std::sqrt;
    return sqrt(2.0 * y[0] * y[0] + 3.0 * y[1] * y[1]);
  }
};

struct Quartic {
  template <class T>
  T operator()(const Vec<2, T>&, const Vec<2, T>& y) const {
    using std::pow;
    const T a = y[0] * y[0], b = y[1] * y[1];
    return pow(a * a + b * b, 0.25);
  }
};

struct ConformalTorus {
  double amp;
  template <class T>
  T operator()(const Vec<2, T>& x, const Vec<2, T>& y) const {
    using std::cos;
    using std::exp;
    using std::sin;
    using std::sqrt;
    return exp(amp * sin(x[0]) * cos(x[1])) * sqrt(y[0] * y[0] + y[1] * y[1]);
  }
};

struct SpherePatch {
  double r;
  template <class T>
  T operator()(const Vec<2, T>& x, const Vec<2, T>& y) const {
    using std::sqrt;
    return 2.0 * r * sqrt(y[0] * y[0] + y[1] * y[1]) / (1.0 + x[0] * x[0] + x[1] * x[1]);
  }
};

struct RandersTorus {
  double b, eps;
  template <class T>
  T operator()(const Vec<2, T>& x, const Vec<2, T>& y) const {
    using std::sin;
    using std::sqrt;
    return sqrt(y[0] * y[0] + y[1] * y[1]) + b * y[0] + eps * sin(x[0]) * y[1];
  }
};

struct Funk {
  template <class T>
  T operator()(const Vec<2, T>& x, const Vec<2, T>& y) const {
    using std::sqrt;
    const T q = 1.0 - x[0] * x[0] - x[1] * x[1];
    const T xy = x[0] * y[0] + x[1] * y[1];
    return (sqrt(q * (y[0] * y[0] + y[1] * y[1]) + xy * xy) + xy) / q;
  }
};

double param(const ZooParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_keys(const ZooParams& p, std::initializer_list<const char*> allowed, const std::string& name) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ZooError("unknown parameter '" + k + "' for " + name);
    if (!std::isfinite(v)) throw ZooError("non-finite parameter '" + k + "' for " + name);
  }
}

template <int N>
void torus_box(ZooEntry<N>& e) {
  e.chart = ChartKind::torus;
  e.origin.fill(0.0);
  e.extent.fill(kTwoPi);
}

void self_validate(const ZooEntry<2>& e) {
  ValidityOptions opt;
  for (int a = 0; a < 2; ++a) {
    opt.origin[a] = e.origin[a];
    opt.extent[a] = e.extent[a];
  }
  const auto r = validate_structure<2>(e.structure, 32, opt);
  if (!r.passed()) throw ZooError("zoo entry " + e.name + " failed self-validation");
}

}  // namespace

std::string to_string(ChartKind c) {
  switch (c) {
    case ChartKind::torus:
      return "torus";
    case ChartKind::disk:
      return "disk";
    case ChartKind::sphere_patch:
      return "sphere-patch";
  }
  return "?";
}

std::vector<std::string> zoo_names() {
  return {"euclidean",   "aniso-quadratic", "quartic-minkowski", "conformal-torus",
          "sphere-patch", "randers-torus",  "funk-disk"};
}

ZooEntry<2> get_entry(const std::string& name, const ZooParams& params) {
  ZooEntry<2> e;
  e.name = name;
  e.params = params;
  if (name == "euclidean") {
    check_keys(params, {}, name);
    torus_box(e);
    e.structure = FinslerStructure<2>::analytic(name, PhaseFn<2>(Euclidean{}));
    e.flags = {true, true, true};
    e.riemannian_metric = [](const Vec<2>&) { return Mat<2>{{{1.0, 0.0}, {0.0, 1.0}}}; };
    e.expected_huu = [](const Vec<2>&) { return 0.0; };
    e.expected_spray = [](const Vec<2>&, const Vec<2>&) { return Vec<2>{0.0, 0.0}; };
  } else if (name == "aniso-quadratic") {
    check_keys(params, {}, name);
    torus_box(e);
    e.structure = FinslerStructure<2>::analytic(name, PhaseFn<2>(AnisoQuadratic{}));
    e.flags = {true, true, true};
    e.riemannian_metric = [](const Vec<2>&) { return Mat<2>{{{2.0, 0.0}, {0.0, 3.0}}}; };
    e.expected_huu = [](const Vec<2>&) { return 0.0; };
    e.expected_spray = [](const Vec<2>&, const Vec<2>&) { return Vec<2>{0.0, 0.0}; };
  } else if (name == "quartic-minkowski") {
    check_keys(params, {}, name);
    torus_box(e);
    e.structure = FinslerStructure<2>::analytic(name, PhaseFn<2>(Quartic{}));
    e.flags = {false, true, true};
    e.expected_huu = [](const Vec<2>&) { return 0.0; };
    e.expected_spray = [](const Vec<2>&, const Vec<2>&) { return Vec<2>{0.0, 0.0}; };
  } else if (name == "conformal-torus") {
    check_keys(params, {"amp"}, name);
    const double amp = param(params, "amp", 0.2);
    torus_box(e);
    e.params["amp"] = amp;
    e.structure = FinslerStructure<2>::analytic(name, PhaseFn<2>(ConformalTorus{amp}));
    e.flags = {true, false, false};
    e.riemannian_metric = [amp](const Vec<2>& x) {
      const double s = std::exp(2.0 * amp * std::sin(x[0]) * std::cos(x[1]));
      return Mat<2>{{{s, 0.0}, {0.0, s}}};
    };
    // K = -e^{-2u} lap u with lap u = -2u for u = amp sin x1 cos x2
    e.expected_huu = [amp](const Vec<2>& x) {
      const double u = amp * std::sin(x[0]) * std::cos(x[1]);
      return 2.0 * u * std::exp(-2.0 * u);
    };
  } else if (name == "sphere-patch") {
    check_keys(params, {"r"}, name);
    const double r = param(params, "r", 1.0);
    if (!(r > 0.0)) throw ZooError("sphere-patch radius must be positive");
    e.params["r"] = r;
    e.chart = ChartKind::sphere_patch;
    e.origin = {-1.5, -1.5};
    e.extent = {3.0, 3.0};
    e.structure = FinslerStructure<2>::analytic(name, PhaseFn<2>(SpherePatch{r}),
                                                [](const Vec<2>& x) { return x[0] * x[0] + x[1] * x[1] < 4.0; });
    e.flags = {true, false, true};
    e.riemannian_metric = [r](const Vec<2>& x) {
      const double s = 4.0 * r * r / std::pow(1.0 + x[0] * x[0] + x[1] * x[1], 2);
      return Mat<2>{{{s, 0.0}, {0.0, s}}};
    };
    e.expected_huu = [r](const Vec<2>&) { return 1.0 / (r * r); };
  } else if (name == "randers-torus") {
    check_keys(params, {"b", "eps"}, name);
    const double b = param(params, "b", 0.3), eps = param(params, "eps", 0.2);
    if (!(std::hypot(b, eps) < 1.0))
      throw ZooError("randers-torus needs sup |b(x)| = sqrt(b^2 + eps^2) < 1 for strong convexity");
    e.params["b"] = b;
    e.params["eps"] = eps;
    torus_box(e);
    e.structure = FinslerStructure<2>::analytic(name, PhaseFn<2>(RandersTorus{b, eps}));
    e.flags = {eps == 0.0 && b == 0.0, eps == 0.0, eps == 0.0};
  } else if (name == "funk-disk") {
    check_keys(params, {}, name);
    e.chart = ChartKind::disk;
    e.origin = {-0.8, -0.8};
    e.extent = {1.6, 1.6};
    e.structure = FinslerStructure<2>::analytic(name, PhaseFn<2>(Funk{}),
                                                [](const Vec<2>& x) { return x[0] * x[0] + x[1] * x[1] < 1.0; });
    e.expected_huu = [](const Vec<2>&) { return -0.25; };
    e.expected_spray = [f = e.structure](const Vec<2>& x, const Vec<2>& y) {
      const double F = f(x, y);
      return Vec<2>{0.5 * F * y[0], 0.5 * F * y[1]};
    };
  } else {
    throw ZooError("unknown zoo entry '" + name + "'");
  }
  self_validate(e);
  return e;
}

ZooEntry<3> get_entry3(const std::string& name, const ZooParams& params) {
  if (name != "euclidean") throw ZooError("only euclidean is available in dimension 3");
  check_keys(params, {}, name);
  ZooEntry<3> e;
  e.name = name;
  torus_box(e);
  e.structure = FinslerStructure<3>::analytic(name, PhaseFn<3>(Euclidean{}));
  e.flags = {true, true, true};
  e.riemannian_metric = [](const Vec<3>&) {
    Mat<3> m{};
    for (int i = 0; i < 3; ++i) m[i][i] = 1.0;
    return m;
  };
  e.expected_huu = [](const Vec<3>&) { return 0.0; };
  return e;
}

std::vector<std::string> zoo_list() {
  std::vector<std::string> out;
  for (const auto& n : zoo_names()) {
    const auto e = get_entry(n);
    std::ostringstream os;
    os << n << " 2 " << to_string(e.chart);
    std::string flags;
    if (e.flags.riemannian) flags += ",riemannian";
    if (e.flags.locally_minkowski) flags += ",locally-minkowski";
    if (e.flags.gem) flags += ",gem";
    os << ' ' << (flags.empty() ? "-" : flags.substr(1));
    out.push_back(os.str());
  }
  out.push_back("euclidean 3 torus riemannian,locally-minkowski,gem");
  return out;
}

bool ReferenceReport::passed() const {
  for (const auto& i : items)
    if (!i.passed) return false;
  return true;
}

ReferenceReport reference_check(const ZooEntry<2>& e, double tol, int samples) {
  ReferenceReport rep;
  const auto pts = halton_points(samples * 4, 7);
  std::vector<std::pair<Vec<2>, Vec<2>>> pts_xy;
  for (const auto& u : pts) {
    if (static_cast<int>(pts_xy.size()) == samples) break;
    const Vec<2> x{e.origin[0] + e.extent[0] * u[0], e.origin[1] + e.extent[1] * u[1]};
    if (!e.structure.in_domain(x)) continue;
    const double t = kTwoPi * u[2];
    pts_xy.push_back({x, {std::cos(t), std::sin(t)}});
  }
  auto add = [&](const std::string& q, double w) { rep.items.push_back({q, w, w <= tol}); };
  if (e.riemannian_metric) {
    double wg = 0.0, wc = 0.0;
    for (const auto& [x, y] : pts_xy) {
      const auto g = fundamental_tensor<2>(e.structure, x, y);
      const auto a = e.riemannian_metric(x);
      const auto c = cartan_tensor<2>(e.structure, x, y);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          wg = std::max(wg, std::abs(g(i, j) - a[i][j]));
          for (int k = 0; k < 2; ++k) wc = std::max(wc, std::abs(c(i, j, k)));
        }
    }
    add("g", wg);
    add("C", wc);
  }
  if (e.expected_spray) {
    double w = 0.0;
    for (const auto& [x, y] : pts_xy) {
      const auto G = spray<2>(e.structure, x, y);
      const auto R = e.expected_spray(x, y);
      for (int i = 0; i < 2; ++i) w = std::max(w, std::abs(G[i] - R[i]));
    }
    add("G", w);
  }
  if (e.flags.locally_minkowski) {
    double w = 0.0;
    for (const auto& [x, y] : pts_xy) {
      const auto b = berwald_coeffs<2>(e.structure, x, y);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) w = std::max(w, std::abs(b.Gjk[i][j][k]));
    }
    add("Gamma", w);
  }
  if (e.expected_huu) {
    double w = 0.0, wt = 0.0;
    for (const auto& [x, y] : pts_xy) {
      const auto b = curvature_bundle<2>(e.structure, x, y);
      w = std::max(w, std::abs(b.Huu - e.expected_huu(x)));
      if (e.flags.gem) wt = std::max(wt, std::abs(b.Htilde - 2.0 * b.Huu));
    }
    add("H(u,u)", w);
    if (e.flags.gem) add("Htilde-nH(u,u)", wt);
  }
  if (e.flags.gem) {
    double w = 0.0;
    for (std::size_t s = 0; s < std::min<std::size_t>(pts_xy.size(), 4); ++s)
      w = std::max(w, gem_residual<2>(e.structure, pts_xy[s].first, 32));
    add("gem_residual", w);
  }
  if (e.riemannian_metric) {
    double w = 0.0;
    for (std::size_t s = 0; s < std::min<std::size_t>(pts_xy.size(), 4); ++s) {
      const auto& x = pts_xy[s].first;
      const double total = fiber_measure<2>(e.structure, x, 256);
      const auto a = e.riemannian_metric(x);
      const double expect = kTwoPi * std::sqrt(determinant<2, double>(a));
      w = std::max(w, std::abs(total - expect) / expect);
    }
    add("fiber_volume", w);
  }
  return rep;
}

}  // namespace finsler
