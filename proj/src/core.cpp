#include "finsler/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {

template <int N>
std::string describe(const Vec<N>& x, const Vec<N>& y) {
  std::ostringstream os;
  os.precision(6);
  os << "x=(";
  for (int i = 0; i < N; ++i) os << (i ? "," : "") << x[i];
  os << ") y=(";
  for (int i = 0; i < N; ++i) os << (i ? "," : "") << y[i];
  os << ")";
  return os.str();
}

template <int N>
Vec<N> direction(const std::array<double, 6>& u, int first) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Vec<N> y;
  if constexpr (N == 2) {
    const double t = two_pi * u[first];
    y = {std::cos(t), std::sin(t)};
  } else {
    const double z = 2.0 * u[first] - 1.0, t = two_pi * u[first + 1];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    y = {s * std::cos(t), s * std::sin(t), z};
  }
  return y;
}

}  // namespace

template <int N>
void require_positive(const Mat<N>& g, const Vec<N>& x, const Vec<N>& y) {
  const auto ev = symmetric_eigenvalues<N>(g);
  if (!(ev[0] > kSingularThreshold * std::max(1.0, std::abs(ev[N - 1]))))
    throw SingularMetricError("fundamental tensor not positive definite at " + describe<N>(x, y), ev[0]);
}

template <int N>
SymTensor2<N> fundamental_tensor(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y) {
  const auto f2 = fiber_jet_sq<N, 2>(fs, x, y);
  require_slit<N>(fs, x, y);
  const Mat<N> g = local::matrix_values<N>(local::metric(f2));
  require_positive<N>(g, x, y);
  return SymTensor2<N>(g);
}

template <int N>
SymTensor3<N> cartan_tensor(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y) {
  require_slit<N>(fs, x, y);
  const auto f2 = fiber_jet_sq<N, 4>(fs, x, y);
  const auto g = local::metric(f2);
  require_positive<N>(local::matrix_values<N>(g), x, y);
  SymTensor3<N> c;
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j)
      for (int k = j; k < N; ++k) c(i, j, k) = 0.5 * g[i][j].dy(k).value();
  return c;
}

template <int N>
Vec<N> mean_cartan(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y) {
  const auto c = cartan_tensor<N>(fs, x, y);
  const Mat<N> gi = inverse<N, double>(fundamental_tensor<N>(fs, x, y).matrix());
  Vec<N> r{};
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) r[k] += gi[i][j] * c(i, j, k);
  return r;
}

bool ValidityReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

template <int N>
ValidityReport validate_structure(const FinslerStructure<N>& fs, int sample_count, const ValidityOptions& opt) {
  if (sample_count < 10) throw std::invalid_argument("validate_structure needs at least 10 samples");
  const auto pts = halton_points(sample_count, 1);
  double worst_f = 0.0, worst_g = 0.0, min_eig = std::numeric_limits<double>::infinity(), worst_sym = 0.0;
  int used = 0;
  for (const auto& u : pts) {
    Vec<N> x;
    if (fs.mode() == FinslerStructure<N>::Mode::grid) {
      const auto& b = fs.samples()->base();
      for (int a = 0; a < N; ++a)
        x[a] = b.coordinate(a, std::min(b.nodes - 1, static_cast<int>(u[a] * b.nodes)));
    } else {
      for (int a = 0; a < N; ++a) x[a] = opt.origin[a] + opt.extent[a] * u[a];
    }
    if (!fs.in_domain(x)) continue;
    const Vec<N> y = direction<N>(u, N);
    ++used;

    const auto f2 = fiber_jet_sq<N, 4>(fs, x, y);
    const auto f = sqrt(f2);
    const double fv = f.value();
    // (a) Euler relation and scaling of F
    double euler = -fv;
    for (int i = 0; i < N; ++i) euler += y[i] * f.dy(i).value();
    worst_f = std::max(worst_f, std::abs(euler) / fv);
    for (double lam : {0.5, 2.0, 10.0}) {
      Vec<N> ly;
      for (int i = 0; i < N; ++i) ly[i] = lam * y[i];
      worst_f = std::max(worst_f, std::abs(fs(x, ly) - lam * fv) / (lam * fv));
    }
    // (b) zero-homogeneity of g: y^k d_k g_ij and scaling
    const auto gj = local::metric(f2);
    const Mat<N> g = local::matrix_values<N>(gj);
    double gscale = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) gscale = std::max(gscale, std::abs(g[i][j]));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        double e = 0.0;
        for (int k = 0; k < N; ++k) e += y[k] * gj[i][j].dy(k).value();
        worst_g = std::max(worst_g, std::abs(e) / gscale);
      }
    for (double lam : {0.5, 2.0, 10.0}) {
      Vec<N> ly;
      for (int i = 0; i < N; ++i) ly[i] = lam * y[i];
      const Mat<N> gl = local::matrix_values<N>(local::metric(fiber_jet_sq<N, 2>(fs, x, ly)));
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) worst_g = std::max(worst_g, std::abs(gl[i][j] - g[i][j]) / gscale);
    }
    // (c) positivity
    min_eig = std::min(min_eig, symmetric_eigenvalues<N>(g)[0]);
    // (d) total symmetry of d_k g_ij
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k)
          worst_sym = std::max(worst_sym, std::abs(gj[i][j].dy(k).value() - gj[k][j].dy(i).value()) / gscale);
  }
  ValidityReport r;
  r.samples = used;
  r.checks.push_back({"homogeneity_F", used > 0 && worst_f <= opt.homogeneity_tol, worst_f});
  r.checks.push_back({"homogeneity_g", used > 0 && worst_g <= opt.homogeneity_tol, worst_g});
  r.checks.push_back({"positive_definite", used > 0 && min_eig > opt.positivity_tol, min_eig});
  r.checks.push_back({"symmetry_dg", used > 0 && worst_sym <= opt.homogeneity_tol, worst_sym});
  return r;
}

#define FINSLER_INSTANTIATE(N)                                                                           \
  template void require_positive<N>(const Mat<N>&, const Vec<N>&, const Vec<N>&);                         \
  template SymTensor2<N> fundamental_tensor<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&); \
  template SymTensor3<N> cartan_tensor<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&);      \
  template Vec<N> mean_cartan<N>(const FinslerStructure<N>&, const Vec<N>&, const Vec<N>&);               \
  template ValidityReport validate_structure<N>(const FinslerStructure<N>&, int, const ValidityOptions&);
FINSLER_INSTANTIATE(2)
FINSLER_INSTANTIATE(3)
#undef FINSLER_INSTANTIATE

}  // namespace finsler
