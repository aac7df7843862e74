#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "finsler/curvature.hpp"
#include "finsler/zoo.hpp"
#include "oracles.hpp"
#include "structures.hpp"

using namespace finsler;

namespace {

constexpr double kPi = std::numbers::pi;

Vec<2> dir(double t) { return {std::cos(t), std::sin(t)}; }

double funk(const Vec<2>& x, const Vec<2>& y) {
  const double xx = x[0] * x[0] + x[1] * x[1];
  const double xy = x[0] * y[0] + x[1] * y[1];
  const double yy = y[0] * y[0] + y[1] * y[1];
  return (std::sqrt((1 - xx) * yy + xy * xy) + xy) / (1 - xx);
}

// Flag curvature of a projectively flat spray G = P y: K = (P^2 - P_{x^k} y^k) / F^2.
double funk_flag_oracle(const Vec<2>& x, const Vec<2>& y) {
  auto P = [&](double t) { return 0.5 * funk({x[0] + t * y[0], x[1] + t * y[1]}, y); };
  const double p = P(0.0);
  const double px = oracle::d1(P, 0.0, 1e-3);
  const double F = funk(x, y);
  return (p * p - px) / (F * F);
}

std::vector<Vec<2>> disk_points(int n, double radius) {
  std::vector<Vec<2>> r;
  for (const auto& p : halton_points(n, 1)) {
    const double s = radius * std::sqrt(p[0]), a = 2 * kPi * p[1];
    r.push_back({s * std::cos(a), s * std::sin(a)});
  }
  return r;
}

}  // namespace

TEST_CASE("flat and locally Minkowski structures have no curvature") {
  const auto fs = teststruct::make("pulled", teststruct::PulledMinkowski{});
  const auto q = get_entry("quartic-minkowski");
  const auto eu = get_entry("euclidean");
  const auto pts = halton_points(10, 3);
  for (const auto& p : pts) {
    const Vec<2> x{6 * p[0], 6 * p[1]};
    const Vec<2> y = dir(6.2 * p[2]);
    for (const auto* s : {&fs, &q.structure, &eu.structure}) {
      const auto b = curvature_bundle<2>(*s, x, y);
      double worst = 0;
      for (const auto& a : b.H)
        for (const auto& c : a)
          for (const auto& d : c)
            for (double v : d) worst = std::max(worst, std::abs(v));
      CHECK(worst <= 1e-10);
      CHECK(std::abs(b.Huu) <= 1e-10);
      CHECK(std::abs(b.Htilde) <= 1e-10);
    }
  }
}

TEST_CASE("conformal torus against the spectral Gauss curvature oracle") {
  const auto e = get_entry("conformal-torus");
  const int n = 32;
  const auto K = oracle::conformal_gauss_curvature([](double a, double b) { return 0.2 * std::sin(a) * std::cos(b); }, n);
  JetOptions fd;
  fd.base = BaseMode::fd;
  double worst = 0, worst_fd = 0, worst_tensor = 0;
  for (int i = 0; i < n; i += 3)
    for (int j = 0; j < n; j += 5) {
      const Vec<2> x{2 * kPi * i / n, 2 * kPi * j / n};
      const Vec<2> y = dir(0.37 * (i + j));
      const double k = K[i * n + j];
      const auto b = curvature_bundle<2>(e.structure, x, y);
      worst = std::max(worst, std::abs(b.Huu - k));
      worst_tensor = std::max(worst_tensor, std::abs(b.Huu_tensor - k));
      worst_fd = std::max(worst_fd, std::abs(ricci_directional<2>(e.structure, x, y, fd) - k));
      CHECK(std::abs(ricci_directional<2>(e.structure, x, y) - b.Huu) <= 1e-12);
      // sectional reduction: H^i_jkl = K (delta^i_k g_jl - delta^i_l g_jk)
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d)
            for (int f = 0; f < 2; ++f) {
              const double ref = k * ((a == d ? b.g[c][f] : 0.0) - (a == f ? b.g[c][d] : 0.0));
              CHECK(std::abs(b.H[a][c][d][f] - ref) <= 1e-6 * (1 + b.g[0][0]));
            }
    }
  CHECK(worst <= 1e-6);
  CHECK(worst_tensor <= 1e-6);
  CHECK(worst_fd <= 1e-3);
}

TEST_CASE("round sphere") {
  const auto e = get_entry("sphere-patch");
  for (const auto& x : disk_points(10, 1.5)) {
    const Vec<2> y = dir(x[0] * 3 + 1);
    const auto b = curvature_bundle<2>(e.structure, x, y);
    CHECK(b.Huu == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(b.Huu_tensor == doctest::Approx(1.0).epsilon(1e-8));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(std::abs(b.Htilde_ij[i][j] - b.g[i][j]) <= 1e-5 * (1 + b.g[0][0]));
    CHECK(b.Htilde == doctest::Approx(2.0).epsilon(1e-8));
    const auto h0 = hat_scalars<2>(e.structure, x, y, {});
    CHECK(h0.Hhat == doctest::Approx(2.0).epsilon(1e-8));
    const auto h1 = hat_scalars<2>(e.structure, x, y, [](const Vec<2>&) { return 1.0; });
    CHECK(h1.Hhat == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(gem_residual<2>(e.structure, {0.4, -0.3}) <= 1e-5);
  const auto e2 = get_entry("sphere-patch", {{"r", 2.0}});
  CHECK(ricci_directional<2>(e2.structure, {0.1, 0.2}, {1, 1}) == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("Funk disk has constant flag curvature -1/4") {
  const auto e = get_entry("funk-disk");
  const auto pts = disk_points(20, 0.8);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& x = pts[k];
    const Vec<2> y = dir(0.9 * k);
    const double orc = funk_flag_oracle(x, y);
    CHECK(std::abs(orc + 0.25) <= 1e-6);
    CHECK(std::abs(ricci_directional<2>(e.structure, x, y) - orc) <= 1e-6);
    const auto b = curvature_bundle<2>(e.structure, x, y);
    CHECK(std::abs(b.Huu - orc) <= 1e-6);
    CHECK(std::abs(b.Huu_tensor - orc) <= 1e-6);
  }
}

TEST_CASE("curvature invariants on Randers samples") {
  const auto e = get_entry("randers-torus", {{"b", 0.3}, {"eps", 0.4}});
  const auto pts = halton_points(12, 8);
  double gem = 0;
  for (const auto& p : pts) {
    const Vec<2> x{6 * p[0], 6 * p[1]};
    const Vec<2> y = dir(6.2 * p[2]);
    const auto b = curvature_bundle<2>(e.structure, x, y);
    const auto b3 = curvature_bundle<2>(e.structure, x, {3 * y[0], 3 * y[1]});
    const double scale = 1 + std::abs(b.Huu);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CHECK(b.Htilde_ij[i][j] == b.Htilde_ij[j][i]);
        CHECK(std::abs(b3.Htilde_ij[i][j] - b.Htilde_ij[i][j]) <= 1e-8 * scale);
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) CHECK(std::abs(b.H[i][j][k][l] + b.H[i][j][l][k]) <= 1e-12);
      }
    double q = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) q += b.Htilde_ij[i][j] * y[i] * y[j];
    CHECK(std::abs(q - b.ric) <= 1e-8 * (1 + std::abs(b.ric)));
    CHECK(std::abs(b.Huu_tensor - b.Huu) <= 1e-8 * scale);
    CHECK(std::abs(b3.Huu - b.Huu) <= 1e-9 * scale);
    gem = std::max(gem, gem_deviation<2>(b));
  }
  CHECK(gem > 1e-3);
}

TEST_CASE("scaling F by 2 divides H(u,u) by 4") {
  const auto e = get_entry("randers-torus");
  const auto twice = FinslerStructure<2>::analytic(
      "twice", PhaseFn<2>([](const auto& x, const auto& y) {
        using std::sin;
        using std::sqrt;
        return 2.0 * (sqrt(y[0] * y[0] + y[1] * y[1]) + 0.3 * y[0] + 0.2 * sin(x[0]) * y[1]);
      }));
  for (const auto& p : halton_points(10, 2)) {
    const Vec<2> x{6 * p[0], 6 * p[1]};
    const Vec<2> y = dir(6.2 * p[2]);
    const double a = ricci_directional<2>(e.structure, x, y);
    const double b = ricci_directional<2>(twice, x, y);
    CHECK(std::abs(b - a / 4) <= 1e-9);
  }
}

TEST_CASE("three-dimensional euclidean") {
  const auto e = get_entry3("euclidean");
  const auto b = curvature_bundle<3>(e.structure, {0.1, 0.2, 0.3}, {1.0, -0.5, 0.25});
  CHECK(std::abs(b.Huu) <= 1e-12);
  CHECK(gem_residual<3>(e.structure, {0.1, 0.2, 0.3}, 16) <= 1e-12);
}

TEST_CASE("per-point cost of the curvature pipeline") {
  const auto e = get_entry("conformal-torus");
  const auto t0 = std::chrono::steady_clock::now();
  double s = 0;
  for (int k = 0; k < 200; ++k) s += ricci_directional<2>(e.structure, {0.01 * k, 0.5}, dir(0.1 * k));
  const auto t1 = std::chrono::steady_clock::now();
  for (int k = 0; k < 50; ++k) s += curvature_bundle<2>(e.structure, {0.01 * k, 0.5}, dir(0.1 * k)).Huu;
  const auto t2 = std::chrono::steady_clock::now();
  MESSAGE("ricci_directional us/pt: ", std::chrono::duration<double, std::micro>(t1 - t0).count() / 200,
          "  curvature_bundle us/pt: ", std::chrono::duration<double, std::micro>(t2 - t1).count() / 50);
  CHECK(std::isfinite(s));
}
