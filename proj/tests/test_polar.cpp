#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "finsler/polar.hpp"
#include "finsler/zoo.hpp"
#include "oracles.hpp"

using namespace finsler;

namespace {

std::vector<double> sample_log_f(const FinslerStructure<2>& fs, const BaseGrid& b, const FiberGrid& f) {
  std::vector<double> v(b.size() * f.nodes);
  for (int i0 = 0; i0 < b.nodes; ++i0)
    for (int i1 = 0; i1 < b.nodes; ++i1)
      for (int k = 0; k < f.nodes; ++k)
        v[b.flat(i0, i1) * f.nodes + k] =
            std::log(fs({b.coordinate(0, i0), b.coordinate(1, i1)}, unit_direction(f.angle(k))));
  return v;
}

}  // namespace

TEST_CASE("bundle derivative") {
  auto [b, f] = build_grid(2, 32, 2 * std::numbers::pi, 16);
  std::vector<double> v(b.size() * 16);
  for (int i0 = 0; i0 < 32; ++i0)
    for (int i1 = 0; i1 < 32; ++i1)
      for (int k = 0; k < 16; ++k) v[b.flat(i0, i1) * 16 + k] = std::sin(b.coordinate(0, i0) + k) * std::cos(2 * b.coordinate(1, i1));
  for (auto mode : {DiffMode::fd4, DiffMode::spectral}) {
    const auto d0 = bundle_derivative(v, b, 16, 0, mode);
    const auto d1 = bundle_derivative(v, b, 16, 1, mode);
    double e0 = 0, e1 = 0;
    for (int i0 = 0; i0 < 32; ++i0)
      for (int i1 = 0; i1 < 32; ++i1)
        for (int k = 0; k < 16; ++k) {
          const double x0 = b.coordinate(0, i0), x1 = b.coordinate(1, i1);
          const std::size_t i = b.flat(i0, i1) * 16 + k;
          e0 = std::max(e0, std::abs(d0[i] - std::cos(x0 + k) * std::cos(2 * x1)));
          e1 = std::max(e1, std::abs(d1[i] + 2 * std::sin(x0 + k) * std::sin(2 * x1)));
        }
    // fd4 truncation bound h^4/30 |f^(5)|
    const double h4 = std::pow(b.spacing(0), 4) / 30 * 1.01;
    CHECK(e0 <= (mode == DiffMode::fd4 ? h4 : 1e-12));
    CHECK(e1 <= (mode == DiffMode::fd4 ? 32 * h4 : 1e-12));
  }
}

TEST_CASE("polar curvature of flat and Minkowski states") {
  auto [b, f] = build_grid(2, 16, 2 * std::numbers::pi, 32);
  for (const auto& name : {"euclidean", "aniso-quadratic", "quartic-minkowski"}) {
    const auto e = get_entry(name);
    const auto lf = sample_log_f(e.structure, b, f);
    const auto pc = polar_curvature(b, f, lf, {DiffMode::fd4, true});
    for (std::size_t i = 0; i < pc.huu.size(); ++i) {
      CHECK(std::abs(pc.huu[i]) <= 1e-10);
      CHECK(std::abs(pc.htilde[i]) <= 1e-10);
    }
  }
}

TEST_CASE("polar curvature of the conformal torus vs the spectral oracle") {
  const int n = 64;
  auto [b, f] = build_grid(2, n, 2 * std::numbers::pi, 32);
  const auto e = get_entry("conformal-torus");
  const auto lf = sample_log_f(e.structure, b, f);
  const auto K = oracle::conformal_gauss_curvature([](double a, double c) { return 0.2 * std::sin(a) * std::cos(c); }, n);
  for (auto mode : {DiffMode::fd4, DiffMode::spectral}) {
    const auto pc = polar_curvature(b, f, lf, {mode, true});
    double worst = 0, worst_t = 0;
    for (std::size_t bi = 0; bi < b.size(); ++bi)
      for (int k = 0; k < f.nodes; ++k) {
        const std::size_t i = bi * f.nodes + k;
        worst = std::max(worst, std::abs(pc.huu[i] - K[bi]) / (1 + std::abs(K[bi])));
        worst_t = std::max(worst_t, std::abs(pc.htilde[i] - 2 * K[bi]));
        CHECK(pc.gem[i] <= 1e-8);
      }
    MESSAGE("conformal torus polar ", std::string(mode == DiffMode::fd4 ? "fd4" : "spectral"), " error ", worst);
    CHECK(worst <= (mode == DiffMode::fd4 ? 1e-3 : 1e-9));
    CHECK(worst_t <= (mode == DiffMode::fd4 ? 2e-3 : 1e-9));
  }
}

TEST_CASE("polar curvature of a Randers state vs the jet pipeline") {
  auto [b, f] = build_grid(2, 32, 2 * std::numbers::pi, 64);
  const auto e = get_entry("randers-torus", {{"b", 0.3}, {"eps", 0.4}});
  const auto lf = sample_log_f(e.structure, b, f);
  const auto pc = polar_curvature(b, f, lf, {DiffMode::spectral, true});
  const auto m = build_measure(e.structure, b, f);
  double wh = 0, wt = 0, wg = 0, wr = 0, spread = 0;
  for (int i0 = 0; i0 < 32; i0 += 5)
    for (int i1 = 0; i1 < 32; i1 += 7)
      for (int k = 0; k < 64; k += 9) {
        const Vec<2> x{b.coordinate(0, i0), b.coordinate(1, i1)};
        const Vec<2> y = unit_direction(f.angle(k));
        const std::size_t i = b.flat(i0, i1) * 64 + k;
        const auto cb = curvature_bundle<2>(e.structure, x, y);
        wh = std::max(wh, std::abs(pc.huu[i] - cb.Huu));
        wt = std::max(wt, std::abs(pc.htilde[i] - cb.Htilde));
        wg = std::max(wg, std::abs(pc.gem[i] - gem_deviation<2>(cb)));
        wr = std::max(wr, std::abs(pc.rho[i] - m.rho[i]));
        spread = std::max(spread, std::abs(pc.huu[i] - pc.huu[b.flat(i0, i1) * 64]));
      }
  MESSAGE("randers polar vs jet: huu ", wh, " htilde ", wt, " gem ", wg, " rho ", wr);
  CHECK(wh <= 1e-8);
  CHECK(wt <= 1e-7);
  CHECK(wg <= 1e-7);
  CHECK(wr <= 1e-12);
  CHECK(spread > 1e-3);  // theta-dependent curvature
}

TEST_CASE("polar curvature timing at 64^3") {
  auto [b, f] = build_grid(2, 64, 2 * std::numbers::pi, 64);
  const auto e = get_entry("randers-torus");
  const auto lf = sample_log_f(e.structure, b, f);
  const auto t0 = std::chrono::steady_clock::now();
  const auto pc = polar_curvature(b, f, lf);
  const auto t1 = std::chrono::steady_clock::now();
  const auto pc6 = polar_curvature(b, f, lf, {DiffMode::fd4, true});
  const auto t2 = std::chrono::steady_clock::now();
  MESSAGE("polar 64^3: H(u,u) ", std::chrono::duration<double>(t1 - t0).count(), " s, with H-tilde ",
          std::chrono::duration<double>(t2 - t1).count(), " s");
  CHECK(pc.huu.size() == pc6.huu.size());
}

TEST_CASE("polar curvature reports convexity loss") {
  auto [b, f] = build_grid(2, 16, 2 * std::numbers::pi, 32);
  std::vector<double> lf(b.size() * 32, 0.0);
  // log F = 0.9 cos(3 theta) at one node has a non-convex indicatrix
  for (int k = 0; k < 32; ++k) lf[b.flat(3, 5) * 32 + k] = 0.9 * std::cos(3 * f.angle(k));
  try {
    polar_curvature(b, f, lf);
    FAIL("expected ConvexityError");
  } catch (const ConvexityError& e) {
    CHECK(e.x()[0] == doctest::Approx(b.coordinate(0, 3)));
    CHECK(e.x()[1] == doctest::Approx(b.coordinate(1, 5)));
  }
  std::vector<double> bad(7);
  CHECK_THROWS_AS(polar_curvature(b, f, bad), GridError);
}
