#include "finsler/structure.hpp"

#include <cmath>

namespace finsler {

SampledLogF::SampledLogF(BaseGrid base, FiberGrid fiber, std::vector<double> log_f)
    : base_(std::move(base)),
      fiber_(fiber),
      log_f_(std::move(log_f)),
      spectrum_(fiber.nodes),
      cache_(base_.size()),
      cache_once_(std::make_unique<std::once_flag[]>(base_.size())) {
  if (base_.n != 2) throw GridError("sampled structures need a two-dimensional base");
  if (log_f_.size() != base_.size() * static_cast<std::size_t>(fiber_.nodes))
    throw GridError("log F array does not match the grid");
  for (double v : log_f_) {
    if (!std::isfinite(v)) throw GridError("non-finite log F sample");
  }
}

std::span<const double> SampledLogF::fiber_line(int i0, int i1) const {
  const std::size_t off = base_.flat(base_.wrap(i0), base_.wrap(i1)) * fiber_.nodes;
  return std::span<const double>(log_f_).subspan(off, fiber_.nodes);
}

double SampledLogF::log_f(int i0, int i1, double theta) const {
  return spectrum_.evaluate(fiber_line(i0, i1), theta, 0);
}

const std::vector<std::vector<double>>& SampledLogF::node_derivatives(int i0, int i1) const {
  const std::size_t idx = base_.flat(base_.wrap(i0), base_.wrap(i1));
  std::call_once(cache_once_[idx], [&] { cache_[idx] = spectrum_.derivatives(fiber_line(i0, i1), 6); });
  return cache_[idx];
}

std::array<int, 2> SampledLogF::node_of(const Vec<2>& x) const {
  std::array<int, 2> r{};
  for (int a = 0; a < 2; ++a) {
    const double h = base_.spacing(a);
    const double q = x[a] / h;
    const double i = std::round(q);
    if (std::abs(q - i) > 1e-9) throw DomainError("sampled structure evaluated off the base grid");
    r[a] = base_.wrap(static_cast<int>(i));
  }
  return r;
}

}  // namespace finsler
