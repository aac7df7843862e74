#include "finsler/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace finsler {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxRetries = 5;
constexpr int kCheckpointVersion = 1;

PolarCurvature evaluate(const FlowState& s, bool full) {
  PolarOptions po;
  po.base = s.diff;
  po.second_type = full;
  return polar_curvature(s.base, s.fiber, s.log_f, po);
}

double cell(const FlowState& s) { return s.base.spacing(0) * s.base.spacing(1) * s.fiber.spacing(); }

double weighted(std::span<const double> f, std::span<const double> rho) {
  std::vector<double> w(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) w[i] = f[i] * rho[i];
  return pairwise_sum(w);
}

std::vector<double> velocity(const FlowState& s, const PolarCurvature& pc) {
  double c = 0.0;
  if (s.mode == FlowMode::normalized) c = weighted(pc.huu, pc.rho) / pairwise_sum(pc.rho);
  std::vector<double> v(pc.huu.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -(pc.huu[i] - c);
  filter_fiber_noise(v, s.fiber.nodes, s.noise_floor);
  return v;
}

struct FiberBounds {
  double min_eig = std::numeric_limits<double>::infinity();
  double max_eig = 0.0;
  std::size_t first_bad = std::numeric_limits<std::size_t>::max();
};

// g in the polar frame at r = 1: E [[1, P'], [P', 1 + P'' + 2 P'^2]], E = e^{2P}.
FiberBounds fiber_bounds(const FlowState& s) {
  const int nt = s.fiber.nodes;
  const PeriodicSpectrum spec(nt);
  const std::size_t lines = s.base.size();
  FiberBounds fb;
  std::vector<double> d1(nt), d2(nt);
  for (std::size_t b = 0; b < lines; ++b) {
    const std::span<const double> line(s.log_f.data() + b * nt, nt);
    spec.derivative(line, 1, d1);
    spec.derivative(line, 2, d2);
    for (int k = 0; k < nt; ++k) {
      const double E = std::exp(2.0 * line[k]);
      const double a = E, c = E * d1[k], d = E * (1.0 + d2[k] + 2.0 * d1[k] * d1[k]);
      const double m = 0.5 * (a + d), r = std::hypot(0.5 * (a - d), c);
      const double lo = m - r, hi = m + r;
      fb.min_eig = std::min(fb.min_eig, lo);
      fb.max_eig = std::max(fb.max_eig, hi);
      if (fb.first_bad == std::numeric_limits<std::size_t>::max() && lo <= 1e-12 * std::max(1.0, hi))
        fb.first_bad = b * nt + k;
    }
  }
  return fb;
}

void require_convex(const FlowState& s) {
  const auto fb = fiber_bounds(s);
  if (fb.first_bad == std::numeric_limits<std::size_t>::max()) return;
  const int nt = s.fiber.nodes, m = s.base.nodes;
  const std::size_t b = fb.first_bad / nt;
  const Vec<2> x{s.base.coordinate(0, static_cast<int>(b / m)), s.base.coordinate(1, static_cast<int>(b % m))};
  const double th = s.fiber.angle(static_cast<int>(fb.first_bad % nt));
  std::ostringstream os;
  os << "fundamental tensor lost positive definiteness at x = (" << x[0] << ", " << x[1] << "), theta = " << th;
  throw ConvexityError(os.str(), x, th);
}

FlowState axpy(const FlowState& s, const std::vector<double>& v, double a) {
  FlowState r = s;
  for (std::size_t i = 0; i < r.log_f.size(); ++i) r.log_f[i] += a * v[i];
  return r;
}

// One step from s with the first stage velocity already known.
FlowState advance(const FlowState& s, const std::vector<double>& k1, double dt) {
  FlowState out = s;
  if (s.stepper == Stepper::euler) {
    out = axpy(s, k1, dt);
  } else {
    const auto k2 = velocity(s, evaluate(axpy(s, k1, 0.5 * dt), false));
    const auto k3 = velocity(s, evaluate(axpy(s, k2, 0.5 * dt), false));
    const auto k4 = velocity(s, evaluate(axpy(s, k3, dt), false));
    for (std::size_t i = 0; i < out.log_f.size(); ++i)
      out.log_f[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  filter_fiber_noise(out.log_f, s.fiber.nodes, s.noise_floor);
  require_convex(out);
  out.t = s.t + dt;
  out.step = s.step + 1;
  return out;
}

FlowDiagnostics diagnostics_from(const FlowState& s, const PolarCurvature& pc) {
  FlowDiagnostics d;
  d.step = s.step;
  d.t = s.t;
  const double w = cell(s);
  d.V = pairwise_sum(pc.rho) * w;
  d.I = weighted(pc.htilde, pc.rho) * w;
  d.I_norm = d.I;  // V^((2-n)/n) = 1 for n = 2
  d.c = (d.I - weighted(pc.huu, pc.rho) * w) / d.V;
  d.min_eig_g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pc.huu.size(); ++i) {
    d.min_eig_g = std::min(d.min_eig_g, pc.min_eig[i]);
    d.max_abs_huu = std::max(d.max_abs_huu, std::abs(pc.huu[i]));
    d.gem_residual = std::max(d.gem_residual, pc.gem[i]);
    d.tensor_gap = std::max(d.tensor_gap, pc.tensor_gap[i]);
  }
  return d;
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive and finite");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double default_noise_floor(int base_nodes, int fiber_nodes) {
  const double b = 0.5 * base_nodes, f = 0.5 * fiber_nodes;
  return std::numeric_limits<double>::epsilon() * b * b * f * f;
}

std::size_t filter_fiber_noise(std::vector<double>& field, int fiber_nodes, double floor) {
  if (floor < 0.0 || !std::isfinite(floor)) throw std::invalid_argument("noise floor must be finite and non-negative");
  if (floor == 0.0 || fiber_nodes < 3) return 0;
  const PeriodicSpectrum spec(fiber_nodes);
  const std::size_t lines = field.size() / fiber_nodes;
  std::vector<std::vector<double>> a(lines), b(lines);
  double scale = 1.0;
  for (std::size_t l = 0; l < lines; ++l) {
    spec.transform(std::span<const double>(field.data() + l * fiber_nodes, fiber_nodes), a[l], b[l]);
    for (std::size_t k = 0; k < a[l].size(); ++k) scale = std::max(scale, std::hypot(a[l][k], b[l][k]));
  }
  const double cut = floor * scale;
  std::size_t zeroed = 0;
  for (std::size_t l = 0; l < lines; ++l) {
    bool changed = false;
    for (std::size_t k = 1; k < a[l].size(); ++k) {
      if ((a[l][k] != 0.0 || b[l][k] != 0.0) && std::hypot(a[l][k], b[l][k]) <= cut) {
        a[l][k] = b[l][k] = 0.0;
        changed = true;
        ++zeroed;
      }
    }
    if (changed) spec.synthesize(a[l], b[l], 0, std::span<double>(field.data() + l * fiber_nodes, fiber_nodes));
  }
  return zeroed;
}

std::string to_string(FlowMode m) { return m == FlowMode::normalized ? "normalized" : "unnormalized"; }
std::string to_string(Stepper s) { return s == Stepper::rk4 ? "rk4" : "euler"; }

FlowState encode_state(const ZooEntry<2>& entry, int base_nodes, int fiber_nodes) {
  if (!entry.periodic())
    throw ZooError(entry.name + " lives on a " + to_string(entry.chart) + " chart; grid flows need a periodic torus");
  auto [base, fiber] = build_grid(2, base_nodes, kTwoPi, fiber_nodes);
  FlowState s;
  s.base = base;
  s.fiber = fiber;
  s.noise_floor = default_noise_floor(base.nodes, fiber.nodes);
  s.log_f.resize(base.size() * fiber.nodes);
  for (int i0 = 0; i0 < base.nodes; ++i0)
    for (int i1 = 0; i1 < base.nodes; ++i1) {
      const Vec<2> x{base.coordinate(0, i0), base.coordinate(1, i1)};
      for (int k = 0; k < fiber.nodes; ++k)
        s.log_f[base.flat(i0, i1) * fiber.nodes + k] = std::log(entry.structure(x, unit_direction(fiber.angle(k))));
    }
  filter_fiber_noise(s.log_f, fiber.nodes, s.noise_floor);
  return s;
}

FinslerStructure<2> decode_state(const FlowState& s) {
  return FinslerStructure<2>::sampled("flow-state", std::make_shared<SampledLogF>(s.base, s.fiber, s.log_f));
}

std::vector<double> curvature_field(const FlowState& s) { return evaluate(s, false).huu; }

FlowDiagnostics diagnose(const FlowState& s) { return diagnostics_from(s, evaluate(s, true)); }

double dt_policy(const FlowState& s) {
  if (!(s.safety > 0.0)) throw std::invalid_argument("dt safety factor must be positive");
  const auto fb = fiber_bounds(s);
  if (!(fb.min_eig > 0.0)) require_convex(s);
  const double p = 1.0 / fb.min_eig - 1.0;
  const double h = s.base.min_spacing();
  return s.safety * h * h / (2.0 * 2.0 * (1.0 + std::abs(p)));
}

FlowState step(const FlowState& s, double dt, int* retries) {
  check_dt(dt);
  int tries = 0;
  for (;;) {
    try {
      const auto k1 = velocity(s, evaluate(s, false));
      auto out = advance(s, k1, dt);
      if (retries) *retries = tries;
      return out;
    } catch (const ConvexityError& e) {
      if (++tries > kMaxRetries)
        throw FlowError(std::string("step rejected after ") + std::to_string(kMaxRetries) + " halvings: " + e.what());
      dt *= 0.5;
    }
  }
}

FlowRun run_flow(const FlowState& initial, int steps, double dt, const DiagnosticSink& sink, const CheckpointPlan& plan) {
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (dt != 0.0) check_dt(dt);
  FlowRun run;
  FlowState s = initial;
  PolarCurvature pc = evaluate(s, true);
  FlowDiagnostics d = diagnostics_from(s, pc);
  auto emit = [&](const FlowDiagnostics& row) {
    run.trajectory.push_back(row);
    if (sink) sink(row);
  };
  emit(d);
  try {
    for (int n = 0; n < steps; ++n) {
      double h = dt != 0.0 ? dt : dt_policy(s);
      const auto k1 = velocity(s, pc);
      int tries = 0;
      for (;;) {
        try {
          FlowState next = advance(s, k1, h);
          PolarCurvature npc = evaluate(next, true);
          s = std::move(next);
          pc = std::move(npc);
          break;
        } catch (const ConvexityError& e) {
          if (++tries > kMaxRetries)
            throw FlowError(std::string("step ") + std::to_string(s.step + 1) + " rejected after " +
                            std::to_string(kMaxRetries) + " halvings: " + e.what());
          h *= 0.5;
        }
      }
      d = diagnostics_from(s, pc);
      d.dt = h;
      d.retries = tries;
      emit(d);
      if (!plan.path.empty() && plan.every > 0 && s.step % plan.every == 0) write_checkpoint(plan.path, s);
    }
  } catch (const std::exception& e) {
    run.failure = e.what();
  }
  if (!plan.path.empty()) write_checkpoint(plan.path, s);
  run.final_state = std::move(s);
  return run;
}

std::string csv_row(const FlowDiagnostics& d) {
  std::string r = std::to_string(d.step);
  for (double v : {d.t, d.V, d.I, d.I_norm, d.c, d.min_eig_g, d.max_abs_huu, d.gem_residual}) r += "," + fmt(v);
  return r;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

void write_csv(const std::string& path, const std::vector<FlowDiagnostics>& rows) {
  std::string s = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) s += csv_row(r) + "\n";
  write_file_atomic(path, s);
}

void write_checkpoint(const std::string& path, const FlowState& s) {
  nlohmann::json j;
  j["format"] = "finsler-flow-checkpoint";
  j["version"] = kCheckpointVersion;
  j["base_nodes"] = s.base.nodes;
  j["base_length"] = s.base.length;
  j["fiber_nodes"] = s.fiber.nodes;
  j["time"] = s.t;
  j["step"] = s.step;
  j["mode"] = to_string(s.mode);
  j["stepper"] = to_string(s.stepper);
  j["diff"] = s.diff == DiffMode::spectral ? "spectral" : "fd4";
  j["safety"] = s.safety;
  j["noise_floor"] = s.noise_floor;
  j["layout"] = "x1 outer, x2 middle, theta inner";
  j["log_f"] = s.log_f;
  write_file_atomic(path, j.dump() + "\n");
}

FlowState read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  const auto j = nlohmann::json::parse(in);
  if (j.at("format") != "finsler-flow-checkpoint") throw std::runtime_error(path + " is not a flow checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + j.at("version").dump());
  const auto lengths = j.at("base_length").get<std::vector<double>>();
  auto [base, fiber] = build_grid(2, j.at("base_nodes").get<int>(), lengths, j.at("fiber_nodes").get<int>());
  FlowState s;
  s.base = base;
  s.fiber = fiber;
  s.log_f = j.at("log_f").get<std::vector<double>>();
  if (s.log_f.size() != base.size() * fiber.nodes) throw GridError("checkpoint array does not match its grid");
  s.t = j.at("time").get<double>();
  s.step = j.at("step").get<long>();
  s.mode = j.at("mode") == "normalized" ? FlowMode::normalized : FlowMode::unnormalized;
  s.stepper = j.at("stepper") == "euler" ? Stepper::euler : Stepper::rk4;
  s.diff = j.at("diff") == "fd4" ? DiffMode::fd4 : DiffMode::spectral;
  s.safety = j.at("safety").get<double>();
  s.noise_floor = j.at("noise_floor").get<double>();
  return s;
}

UniformResult uniform_flow(const FinslerStructure<2>& fs, const Vec<2>& x0, const Vec<2>& y0, double T, int steps,
                           FlowMode mode, const std::vector<Vec<2>>& samples) {
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  auto H = [&](double phi, const Vec<2>& x) {
    const auto scaled = FinslerStructure<2>::analytic(
        fs.name() + "-scaled", PhaseFn<2>([f = fs.function(), phi](const auto& xs, const auto& ys) { return phi * f(xs, ys); }),
        [&fs](const Vec<2>& p) { return fs.in_domain(p); });
    return ricci_directional<2>(scaled, x, y0);
  };
  auto rate = [&](double phi) {
    double c = 0.0;
    if (mode == FlowMode::normalized) {
      const auto& pts = samples.empty() ? std::vector<Vec<2>>{x0} : samples;
      for (const auto& p : pts) c += H(phi, p);
      c /= static_cast<double>(pts.size());
    }
    return -(H(phi, x0) - c) * phi;  // d phi / dt
  };
  UniformResult r;
  const double h = T / steps;
  double phi = 1.0;
  r.t.push_back(0.0);
  r.phi.push_back(phi);
  for (int n = 0; n < steps; ++n) {
    const double k1 = rate(phi), k2 = rate(phi + 0.5 * h * k1), k3 = rate(phi + 0.5 * h * k2), k4 = rate(phi + h * k3);
    phi += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    r.t.push_back((n + 1) * h);
    r.phi.push_back(phi);
  }
  return r;
}

}  // namespace finsler
