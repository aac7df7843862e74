#pragma once

// Fundamental tensor, Cartan tensor and sampled validity checks.

#include <string>
#include <vector>

#include "finsler/local.hpp"
#include "finsler/structure.hpp"

namespace finsler {

// Symmetric 2-tensor, stored as the independent upper triangle.
template <int N>
class SymTensor2 {
 public:
  static constexpr int kSize = N * (N + 1) / 2;

  SymTensor2() = default;
  explicit SymTensor2(const Mat<N>& m) {
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) (*this)(i, j) = 0.5 * (m[i][j] + m[j][i]);
  }

  double& operator()(int i, int j) { return c_[slot(i, j)]; }
  double operator()(int i, int j) const { return c_[slot(i, j)]; }
  Mat<N> matrix() const {
    Mat<N> m;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m[i][j] = (*this)(i, j);
    return m;
  }

 private:
  static int slot(int i, int j) {
    if (i > j) std::swap(i, j);
    return i * N - i * (i - 1) / 2 + (j - i);
  }
  std::array<double, kSize> c_{};
};

// Totally symmetric 3-tensor, stored by sorted index triple.
template <int N>
class SymTensor3 {
 public:
  static constexpr int kSize = N * (N + 1) * (N + 2) / 6;

  double& operator()(int i, int j, int k) { return c_[slot(i, j, k)]; }
  double operator()(int i, int j, int k) const { return c_[slot(i, j, k)]; }
  Arr3<N> array() const {
    Arr3<N> a;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) a[i][j][k] = (*this)(i, j, k);
    return a;
  }

 private:
  static int slot(int i, int j, int k) {
    if (i > j) std::swap(i, j);
    if (j > k) std::swap(j, k);
    if (i > j) std::swap(i, j);
    return k * (k + 1) * (k + 2) / 6 + j * (j + 1) / 2 + i;
  }
  std::array<double, kSize> c_{};
};

class SingularMetricError : public std::runtime_error {
 public:
  SingularMetricError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// Minimum eigenvalue below which g counts as singular.
inline constexpr double kSingularThreshold = 1e-12;

template <int N>
SymTensor2<N> fundamental_tensor(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y);

template <int N>
SymTensor3<N> cartan_tensor(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y);

// C_k = g^{ij} C_ijk
template <int N>
Vec<N> mean_cartan(const FinslerStructure<N>& fs, const Vec<N>& x, const Vec<N>& y);

// Throws SingularMetricError if g is not positive definite (relative to its scale).
template <int N>
void require_positive(const Mat<N>& g, const Vec<N>& x, const Vec<N>& y);

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // residual, or min eigenvalue for positivity
};

struct ValidityReport {
  std::vector<CheckResult> checks;
  int samples = 0;
  bool passed() const;
};

struct ValidityOptions {
  double homogeneity_tol = 1e-8;
  double positivity_tol = 1e-6;
  // sampling box for x; defaults to the unit box [0,1)^n scaled by `extent`
  Vec<3> origin{0.0, 0.0, 0.0};
  Vec<3> extent{1.0, 1.0, 1.0};
};

template <int N>
ValidityReport validate_structure(const FinslerStructure<N>& fs, int sample_count,
                                  const ValidityOptions& opt = {});

}  // namespace finsler
