#pragma once

// Named analytic Finsler structures with closed-form reference data.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finsler/curvature.hpp"

namespace finsler {

enum class ChartKind { torus, disk, sphere_patch };

std::string to_string(ChartKind c);

struct ZooFlags {
  bool riemannian = false;
  bool locally_minkowski = false;
  bool gem = false;
};

using ZooParams = std::map<std::string, double>;

template <int N>
struct ZooEntry {
  std::string name;
  ZooParams params;
  ChartKind chart = ChartKind::torus;
  Vec<N> origin{};  // sampling box for validation and tests
  Vec<N> extent{};
  FinslerStructure<N> structure;
  ZooFlags flags;
  // optional references
  std::function<Mat<N>(const Vec<N>&)> riemannian_metric;  // a_ij(x)
  std::function<double(const Vec<N>&)> expected_huu;
  std::function<Vec<N>(const Vec<N>&, const Vec<N>&)> expected_spray;
  bool periodic() const { return chart == ChartKind::torus; }
};

class ZooError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Names: euclidean, aniso-quadratic, quartic-minkowski, conformal-torus,
// sphere-patch, randers-torus, funk-disk. Unknown names and invalid
// parameters raise ZooError.
ZooEntry<2> get_entry(const std::string& name, const ZooParams& params = {});
ZooEntry<3> get_entry3(const std::string& name, const ZooParams& params = {});

std::vector<std::string> zoo_names();
// One line per entry: name, dimension, chart, flags.
std::vector<std::string> zoo_list();

struct ReferenceItem {
  std::string quantity;
  double worst = 0.0;
  bool passed = true;
};

struct ReferenceReport {
  std::vector<ReferenceItem> items;
  bool passed() const;
};

ReferenceReport reference_check(const ZooEntry<2>& entry, double tol, int samples = 16);

}  // namespace finsler
