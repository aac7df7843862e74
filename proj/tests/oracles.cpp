#include "oracles.hpp"

#include <vector>

namespace oracle {

namespace {

// Second-derivative Fourier differentiation matrix on an even periodic grid
// of period 2 pi (closed form, Trefethen ch. 3).
std::vector<double> d2_matrix(int n) {
  const double h = 2 * kPi / n;
  std::vector<double> D(n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const int m = j - k;
      if (m == 0) {
        D[j * n + k] = -kPi * kPi / (3 * h * h) - 1.0 / 6.0;
      } else {
        const double s = std::sin(m * h / 2);
        D[j * n + k] = -((m % 2 == 0) ? 1.0 : -1.0) / (2 * s * s);
      }
    }
  return D;
}

}  // namespace

std::vector<double> conformal_gauss_curvature(const std::function<double(double, double)>& u, int n) {
  std::vector<double> v(n * n), lap(n * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) v[a * n + b] = u(2 * kPi * a / n, 2 * kPi * b / n);
  const auto D = d2_matrix(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0;
      for (int k = 0; k < n; ++k) s += D[a * n + k] * v[k * n + b] + D[b * n + k] * v[a * n + k];
      lap[a * n + b] = s;
    }
  for (int i = 0; i < n * n; ++i) lap[i] = -std::exp(-2 * v[i]) * lap[i];
  return lap;
}

}  // namespace oracle
