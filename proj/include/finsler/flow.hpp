#pragma once

// Scalar curvature flow d/dt log F = -(H(u,u) - c(t)) on a periodic surface,
// stepped by the method of lines on log F(x, theta).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finsler/polar.hpp"
#include "finsler/zoo.hpp"

namespace finsler {

enum class FlowMode { unnormalized, normalized };
enum class Stepper { euler, rk4 };

std::string to_string(FlowMode m);
std::string to_string(Stepper s);

struct FlowState {
  BaseGrid base;
  FiberGrid fiber;
  std::vector<double> log_f;  // (i0, i1, k) row-major
  double t = 0.0;
  long step = 0;
  FlowMode mode = FlowMode::unnormalized;
  Stepper stepper = Stepper::rk4;
  DiffMode diff = DiffMode::spectral;
  double safety = 0.25;
  // Fiber Fourier modes (order >= 1) of the state and of every stage velocity
  // whose amplitude is below noise_floor * max(1, largest amplitude) are zeroed.
  // 0 disables the filter; encode_state sets default_noise_floor.
  double noise_floor = 0.0;
};

struct FlowDiagnostics {
  long step = 0;
  double t = 0.0;
  double V = 0.0;
  double I = 0.0;
  double I_norm = 0.0;
  double c = 0.0;  // int Hhat eta / V with c_fun = n - 1
  double min_eig_g = 0.0;
  double max_abs_huu = 0.0;
  double gem_residual = 0.0;
  double tensor_gap = 0.0;  // max |Htilde^i_j - H(u,u) delta^i_j|, tensor flow vs Bao flow
  double dt = 0.0;
  int retries = 0;
  bool accepted = true;
};

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// eps * (base_nodes/2)^2 * (fiber_nodes/2)^2: round-off level of two spectral
// derivatives in each direction.
double default_noise_floor(int base_nodes, int fiber_nodes);

// Noise filter on a (base, theta) field; returns the number of zeroed modes.
std::size_t filter_fiber_noise(std::vector<double>& field, int fiber_nodes, double floor);

// Samples log F(x, e(theta)) and applies the noise filter; non-periodic
// entries are rejected.
FlowState encode_state(const ZooEntry<2>& entry, int base_nodes, int fiber_nodes);

// F(x, y) = |y| exp(P(x, theta(y))) as a sampled structure.
FinslerStructure<2> decode_state(const FlowState& s);

// H(u,u) at every node; throws ConvexityError with the node location.
std::vector<double> curvature_field(const FlowState& s);

FlowDiagnostics diagnose(const FlowState& s);

// safety h_min^2 / (2n (1 + max |p|)), p = 1/lambda_min(g) - 1 the deviation
// of the leading diffusion coefficient from the flat value.
double dt_policy(const FlowState& s);

// One explicit step. On convexity loss the step is retried with dt halved,
// at most five times, then FlowError.
FlowState step(const FlowState& s, double dt, int* retries = nullptr);

using DiagnosticSink = std::function<void(const FlowDiagnostics&)>;

struct CheckpointPlan {
  std::string path;  // empty: never
  int every = 0;     // steps between checkpoints; 0: only at the end
};

struct FlowRun {
  FlowState final_state;
  std::vector<FlowDiagnostics> trajectory;  // steps + 1 rows on success
  std::optional<std::string> failure;
};

// dt = 0 selects dt_policy at every step.
FlowRun run_flow(const FlowState& initial, int steps, double dt = 0.0, const DiagnosticSink& sink = {},
                 const CheckpointPlan& plan = {});

inline constexpr const char* kCsvHeader = "step,time,V,I,I_norm,c,min_eig_g,max_abs_Huu,gem_residual";
std::string csv_row(const FlowDiagnostics& d);
void write_csv(const std::string& path, const std::vector<FlowDiagnostics>& rows);

// Versioned text record; written to a temporary file and renamed.
void write_checkpoint(const std::string& path, const FlowState& s);
FlowState read_checkpoint(const std::string& path);

// Atomic text write shared by every output.
void write_file_atomic(const std::string& path, const std::string& content);

// Spatially uniform scaling F_t = phi(t) F_0 of an analytic structure:
// d/dt log phi = -(H[phi F_0](x0, y0) - c), integrated by RK4. In normalized
// mode c is the mean of H over `samples`, which vanishes for constant curvature.
struct UniformResult {
  std::vector<double> t, phi;
};

UniformResult uniform_flow(const FinslerStructure<2>& fs, const Vec<2>& x0, const Vec<2>& y0, double T, int steps,
                           FlowMode mode = FlowMode::unnormalized, const std::vector<Vec<2>>& samples = {});

}  // namespace finsler
