#include <cmath>

#include "doctest.h"
#include "finsler/jet.hpp"

using finsler::Jet;

namespace {

using J1 = Jet<1, 6, 0>;  // one base and one fiber variable; only the fiber one is used

double fiber_partial(const J1& j, int order) {
  J1::Exponents e{};
  e[1] = static_cast<std::uint8_t>(order);
  return j.partial(e);
}

}  // namespace

TEST_CASE("jet sizes") {
  CHECK(finsler::detail::jet_size(2, 4, 2) == 53);
  CHECK(finsler::detail::jet_size(2, 6, 2) == 115);
  CHECK(Jet<2, 6, 2>::kSize == 115);
  CHECK(Jet<2, 4, 0>::kSize == 15);
}

TEST_CASE("elementary functions reproduce their Taylor coefficients") {
  const double t0 = 0.37;
  const J1 t = J1::variable(1, t0);
  const J1 e = exp(t), s = sin(t), c = cos(t), a = atan(t), l = log(t), p = pow(t, 1.5);
  for (int k = 0; k <= 6; ++k) {
    CHECK(fiber_partial(e, k) == doctest::Approx(std::exp(t0)).epsilon(1e-14));
    const double sk[4] = {std::sin(t0), std::cos(t0), -std::sin(t0), -std::cos(t0)};
    CHECK(fiber_partial(s, k) == doctest::Approx(sk[k % 4]).epsilon(1e-13));
    CHECK(fiber_partial(c, k) == doctest::Approx(sk[(k + 1) % 4]).epsilon(1e-13));
  }
  // atan' = 1/(1+t^2), atan'' = -2t/(1+t^2)^2, atan''' = (6t^2-2)/(1+t^2)^3
  const double q = 1 + t0 * t0;
  CHECK(fiber_partial(a, 1) == doctest::Approx(1 / q).epsilon(1e-14));
  CHECK(fiber_partial(a, 2) == doctest::Approx(-2 * t0 / (q * q)).epsilon(1e-14));
  CHECK(fiber_partial(a, 3) == doctest::Approx((6 * t0 * t0 - 2) / (q * q * q)).epsilon(1e-13));
  // log^(k) = (-1)^(k-1) (k-1)! / t^k
  CHECK(fiber_partial(l, 3) == doctest::Approx(2 / std::pow(t0, 3)).epsilon(1e-13));
  CHECK(fiber_partial(l, 6) == doctest::Approx(-120 / std::pow(t0, 6)).epsilon(1e-12));
  CHECK(fiber_partial(p, 2) == doctest::Approx(0.75 / std::sqrt(t0)).epsilon(1e-13));
}

TEST_CASE("multivariate products and derivative shapes") {
  using J = Jet<2, 4, 2>;
  const J x0 = J::variable(0, 0.3), x1 = J::variable(1, -0.2);
  const J y0 = J::variable(2, 1.1), y1 = J::variable(3, 0.4);
  const J f = exp(x0 * y1) * (y0 * y0 + 3.0 * y1 * y1) * sin(x1);
  const auto fy = f.dy(0);
  const auto fxy = f.dy(1).dx(0);
  // d/dy0: exp(x0 y1) * 2 y0 * sin(x1)
  CHECK(fy.value() == doctest::Approx(std::exp(0.3 * 0.4) * 2.2 * std::sin(-0.2)).epsilon(1e-14));
  // d2/dx0 dy1 of exp(x0 y1) q sin(x1), q = y0^2 + 3 y1^2, dq = dq/dy1
  const double ex = std::exp(0.12), q = 1.21 + 0.48, dq = 2.4;
  const double expect = std::sin(-0.2) * (ex * (1 + 0.12) * q + ex * 0.4 * dq);
  CHECK(fxy.value() == doctest::Approx(expect).epsilon(1e-13));
  static_assert(decltype(fxy)::kSize == Jet<2, 2, 1>::kSize);
}

TEST_CASE("truncation keeps lower orders exact") {
  using J = Jet<2, 6, 2>;
  const J y0 = J::variable(2, 0.8), y1 = J::variable(3, 0.6);
  const J r = sqrt(y0 * y0 + y1 * y1);
  using K = Jet<2, 4, 1>;
  const K s = sqrt(K::variable(2, 0.8) * K::variable(2, 0.8) + K::variable(3, 0.6) * K::variable(3, 0.6));
  const K t = r.truncate<4, 1>();
  for (int i = 0; i < K::kSize; ++i) CHECK(t.c[i] == doctest::Approx(s.c[i]).epsilon(1e-14));
}

TEST_CASE("jet arithmetic is deterministic") {
  using J = Jet<2, 6, 2>;
  const J a = J::variable(0, 0.1) * J::variable(2, 0.7) + cos(J::variable(3, 0.2));
  const J b = J::variable(0, 0.1) * J::variable(2, 0.7) + cos(J::variable(3, 0.2));
  for (int i = 0; i < J::kSize; ++i) CHECK(a.c[i] == b.c[i]);
}
