#include "cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "finsler/flow.hpp"
#include "finsler/measure.hpp"
#include "finsler/variations.hpp"
#include "json.hpp"

namespace finsler::cli {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure reported by a subcommand without an exception.
struct Outcome {
  json record;
  bool passed = true;
  std::vector<std::string> outputs;
  std::string failure;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + s + "' is not a number");
  }
  if (used != s.size() || !std::isfinite(v)) throw UsageError(what + ": '" + s + "' is not a finite number");
  return v;
}

int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_double(s, what);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError(what + ": '" + s + "' is not an integer");
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  for (const auto& p : split(s, ',')) v.push_back(parse_double(p, what));
  return v;
}

std::array<int, 3> check_grid(const std::vector<int>& g) {
  if (g.size() != 3) throw UsageError("grid needs three sizes: base,base,fiber");
  for (int v : g)
    if (v <= 0) throw UsageError("grid sizes must be positive, got " + std::to_string(v));
  if (g[0] != g[1]) throw UsageError("base grids are square: the first two grid sizes must agree");
  return {g[0], g[1], g[2]};
}

std::array<int, 3> parse_grid(const std::string& s) {
  std::vector<int> g;
  for (const auto& p : split(s, ',')) g.push_back(parse_int(p, "--grid"));
  return check_grid(g);
}

std::pair<std::string, double> parse_param(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + s + "'");
  return {s.substr(0, eq), parse_double(s.substr(eq + 1), "--param " + s.substr(0, eq))};
}

template <class T>
void one_of(const T& v, std::initializer_list<T> allowed, const std::string& what) {
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) throw UsageError("invalid " + what + " '" + v + "'");
}

json tolerances_json(const Tolerances& t) {
  return {{"homogeneity", t.homogeneity}, {"positivity", t.positivity}, {"reference", t.reference},
          {"variation", t.variation},     {"functional", t.functional}, {"adjointness", t.adjointness}};
}

json config_json(const RunConfig& c) {
  json params = json::object();
  for (const auto& [k, v] : c.params) params[k] = v;
  return {{"command", c.command},
          {"action", c.action},
          {"metric", c.metric},
          {"params", params},
          {"grid", c.grid},
          {"normalized", c.normalized},
          {"stepper", c.stepper},
          {"diff", c.diff},
          {"base_mode", c.base_mode},
          {"dt", c.dt},
          {"steps", c.steps},
          {"safety", c.safety},
          {"noise_floor", c.noise_floor},
          {"x", c.x},
          {"theta", c.theta},
          {"samples", c.samples},
          {"direction", c.direction},
          {"tolerances", tolerances_json(c.tolerances)},
          {"out", c.out},
          {"threads", c.threads},
          {"checkpoint_every", c.checkpoint_every},
          {"resume", c.resume}};
}

void load_config(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path + " must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "command") {
        if (v.get<std::string>() != c.command)
          throw UsageError("config is for '" + v.get<std::string>() + "', not '" + c.command + "'");
      } else if (key == "action") {
        c.action = v.get<std::string>();
      } else if (key == "metric") {
        c.metric = v.get<std::string>();
      } else if (key == "params") {
        for (const auto& [pk, pv] : v.items()) c.params[pk] = pv.get<double>();
      } else if (key == "grid") {
        c.grid = check_grid(v.get<std::vector<int>>());
      } else if (key == "normalized") {
        c.normalized = v.get<bool>();
      } else if (key == "stepper") {
        c.stepper = v.get<std::string>();
      } else if (key == "diff") {
        c.diff = v.get<std::string>();
      } else if (key == "base_mode") {
        c.base_mode = v.get<std::string>();
      } else if (key == "dt") {
        c.dt = v.get<double>();
      } else if (key == "steps") {
        c.steps = v.get<int>();
      } else if (key == "safety") {
        c.safety = v.get<double>();
      } else if (key == "noise_floor") {
        c.noise_floor = v.get<double>();
      } else if (key == "x") {
        c.x = v.get<std::vector<double>>();
      } else if (key == "theta") {
        c.theta = v.get<double>();
      } else if (key == "samples") {
        c.samples = v.get<int>();
      } else if (key == "direction") {
        c.direction = v.get<std::string>();
      } else if (key == "tolerances") {
        for (const auto& [tk, tv] : v.items()) {
          double* slot = tk == "homogeneity"   ? &c.tolerances.homogeneity
                         : tk == "positivity"  ? &c.tolerances.positivity
                         : tk == "reference"   ? &c.tolerances.reference
                         : tk == "variation"   ? &c.tolerances.variation
                         : tk == "functional"  ? &c.tolerances.functional
                         : tk == "adjointness" ? &c.tolerances.adjointness
                                               : nullptr;
          if (!slot) throw UsageError("unknown tolerance '" + tk + "' in " + path);
          *slot = tv.get<double>();
        }
      } else if (key == "out") {
        c.out = v.get<std::string>();
      } else if (key == "threads") {
        c.threads = v.get<int>();
      } else if (key == "checkpoint_every") {
        c.checkpoint_every = v.get<int>();
      } else if (key == "resume") {
        c.resume = v.get<std::string>();
      } else {
        throw UsageError("unknown config field '" + key + "' in " + path);
      }
    }
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
}

void check_config(const RunConfig& c) {
  one_of<std::string>(c.stepper, {"rk4", "euler"}, "stepper");
  one_of<std::string>(c.diff, {"spectral", "fd4"}, "diff mode");
  one_of<std::string>(c.base_mode, {"analytic", "fd"}, "base mode");
  one_of<std::string>(c.direction, {"conformal", "quadratic"}, "direction");
  one_of<std::string>(c.action, {"list", "check"}, "zoo action");
  if (c.steps < 1) throw UsageError("steps must be at least 1");
  if (c.dt < 0.0 || !std::isfinite(c.dt)) throw UsageError("dt must be non-negative (0 selects the dt policy)");
  if (!(c.safety > 0.0)) throw UsageError("safety must be positive");
  if (c.samples < 1) throw UsageError("samples must be positive");
  if (c.threads < 0) throw UsageError("threads must be non-negative");
  if (c.checkpoint_every < 0) throw UsageError("checkpoint_every must be non-negative");
  if (c.x.size() != 2) throw UsageError("x needs two coordinates");
  for (double t : {c.tolerances.homogeneity, c.tolerances.positivity, c.tolerances.reference, c.tolerances.variation,
                   c.tolerances.functional, c.tolerances.adjointness})
    if (!(t > 0.0)) throw UsageError("tolerances must be positive");
}

int thread_count(const RunConfig& c, const std::map<std::string, std::string>& env) {
  const int available = std::max(1, omp_get_num_procs());
  int n = c.threads > 0 ? c.threads : available;
  if (const auto it = env.find("FINSLER_THREADS"); it != env.end() && !it->second.empty()) {
    const int cap = parse_int(it->second, "FINSLER_THREADS");
    if (cap < 1) throw UsageError("FINSLER_THREADS must be a positive integer");
    n = std::min(n, cap);
  }
  return n;
}

ZooEntry<2> entry_of(const RunConfig& c) { return get_entry(c.metric, c.params); }

void require_periodic(const ZooEntry<2>& e, const std::string& command) {
  if (!e.periodic())
    throw UsageError(command + " needs a periodic metric; " + e.name + " lives on a " + to_string(e.chart) + " chart");
}

json mat_json(const Mat<2>& m) { return {{m[0][0], m[0][1]}, {m[1][0], m[1][1]}}; }

Outcome cmd_zoo(const RunConfig& c) {
  Outcome o;
  if (c.action == "list") {
    o.record["entries"] = zoo_list();
    return o;
  }
  const auto e = entry_of(c);
  const auto rep = reference_check(e, c.tolerances.reference);
  json items = json::array();
  for (const auto& it : rep.items) items.push_back({{"quantity", it.quantity}, {"worst", it.worst}, {"passed", it.passed}});
  o.record = {{"metric", e.name}, {"items", items}, {"passed", rep.passed()}};
  o.passed = rep.passed();
  if (!o.passed) o.failure = "reference check failed for " + e.name;
  return o;
}

Outcome cmd_validate(const RunConfig& c) {
  Outcome o;
  const auto e = entry_of(c);
  ValidityOptions vo;
  vo.homogeneity_tol = c.tolerances.homogeneity;
  vo.positivity_tol = c.tolerances.positivity;
  vo.origin = {e.origin[0], e.origin[1], 0.0};
  vo.extent = {e.extent[0], e.extent[1], 1.0};
  const auto rep = validate_structure<2>(e.structure, c.samples, vo);
  json checks = json::array();
  for (const auto& ch : rep.checks) checks.push_back({{"name", ch.name}, {"worst", ch.worst}, {"passed", ch.passed}});
  o.record = {{"metric", e.name}, {"samples", rep.samples}, {"checks", checks}, {"passed", rep.passed()}};
  o.passed = rep.passed();
  if (!o.passed) o.failure = e.name + " failed structure validation";
  return o;
}

Outcome cmd_report(const RunConfig& c) {
  Outcome o;
  const auto e = entry_of(c);
  const Vec<2> x{c.x[0], c.x[1]};
  const Vec<2> y = unit_direction(c.theta);
  if (!e.structure.in_domain(x)) throw UsageError("x lies outside the domain of " + e.name);
  JetOptions jo;
  jo.base = c.base_mode == "fd" ? BaseMode::fd : BaseMode::analytic;
  const auto b = curvature_bundle<2>(e.structure, x, y, jo);
  const auto G = spray<2>(e.structure, x, y, jo);
  const auto C = cartan_tensor<2>(e.structure, x, y);
  double cn = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) cn += C(i, j, k) * C(i, j, k);
  o.record = {{"metric", e.name},
              {"x", c.x},
              {"theta", c.theta},
              {"y", {y[0], y[1]}},
              {"base_mode", c.base_mode},
              {"F", b.F},
              {"g", mat_json(b.g)},
              {"cartan_norm", std::sqrt(cn)},
              {"spray", {G[0], G[1]}},
              {"Huu", b.Huu},
              {"Huu_tensor", b.Huu_tensor},
              {"Htilde", b.Htilde},
              {"Htilde_ij", mat_json(b.Htilde_ij)},
              {"gem_deviation", gem_deviation<2>(b)}};
  if (e.expected_huu) o.record["expected_Huu"] = e.expected_huu(x);
  return o;
}

Outcome cmd_functional(const RunConfig& c) {
  Outcome o;
  const auto e = entry_of(c);
  require_periodic(e, "functional");
  const auto [base, fiber] = build_grid(2, c.grid[0], kTwoPi, c.grid[2]);
  const auto r = functional_I(e.structure, base, fiber);
  o.record = {{"metric", e.name}, {"grid", c.grid}, {"V", r.V}, {"I", r.I}, {"I_norm", r.I_norm}, {"c_bar", r.c_bar}};
  return o;
}

PhaseFn<2> conformal_k() {
  return PhaseFn<2>([](const auto& x, const auto&) {
    using std::cos;
    using std::sin;
    return 0.4 + sin(x[0]) * cos(x[1]);
  });
}

PhaseFn<2> quadratic_psi() {
  return PhaseFn<2>([](const auto& x, const auto& y) {
    using std::cos;
    using std::sin;
    return cos(x[0]) * y[0] * y[0] + 0.6 * sin(x[1]) * y[0] * y[1] + (0.5 + sin(x[0] + x[1])) * y[1] * y[1];
  });
}

Outcome cmd_verify(const RunConfig& c) {
  Outcome o;
  const auto e = entry_of(c);
  require_periodic(e, "verify-identities");
  const auto h = c.direction == "conformal" ? conformal_variation<2>(conformal_k(), e.structure)
                                            : family_variation<2>(quadratic_psi(), e.structure, "quadratic");
  VariationOptions vo;
  vo.tol = c.tolerances.variation;
  vo.tol_functional = c.tolerances.functional;
  vo.base_nodes = c.grid[0];
  vo.fiber_nodes = c.grid[2];
  const auto rep = variation_residuals(h, vo);
  json items = json::array();
  bool ok = rep.passed();
  for (const auto& it : rep.items)
    items.push_back({{"name", it.name},
                     {"lhs", it.lhs},
                     {"rhs", it.rhs},
                     {"residual", it.residual},
                     {"tol", it.tol},
                     {"passed", it.passed},
                     {"richardson", it.richardson}});
  const auto [base, fiber] = build_grid(2, c.grid[0], kTwoPi, c.grid[2]);
  json adj = json::array();
  for (const auto& r : adjointness(adjointness_corpus(e.structure), base, fiber)) {
    const bool pass = r.residual <= c.tolerances.adjointness;
    ok = ok && pass;
    adj.push_back({{"pair", r.label}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"residual", r.residual}, {"passed", pass}});
  }
  o.record = {{"metric", e.name}, {"direction", c.direction}, {"grid", c.grid},
              {"variations", items}, {"adjointness", adj}, {"passed", ok}};
  o.passed = ok;
  if (!ok) o.failure = "one or more identity residuals exceed tolerance";
  return o;
}

Outcome cmd_flow(const RunConfig& c, const std::filesystem::path& dir) {
  Outcome o;
  FlowState s;
  if (!c.resume.empty()) {
    s = read_checkpoint(c.resume);
  } else {
    const auto e = entry_of(c);
    require_periodic(e, "flow");
    s = encode_state(e, c.grid[0], c.grid[2]);
  }
  s.mode = c.normalized ? FlowMode::normalized : FlowMode::unnormalized;
  s.stepper = c.stepper == "euler" ? Stepper::euler : Stepper::rk4;
  s.diff = c.diff == "fd4" ? DiffMode::fd4 : DiffMode::spectral;
  s.safety = c.safety;
  if (c.noise_floor >= 0.0) s.noise_floor = c.noise_floor;
  const auto ckpt = (dir / "checkpoint.json").string();
  const auto run = run_flow(s, c.steps, c.dt, {}, {ckpt, c.checkpoint_every});
  const auto csv = (dir / "diagnostics.csv").string();
  write_csv(csv, run.trajectory);
  o.outputs = {csv, ckpt};
  const auto& last = run.trajectory.back();
  o.record = {{"metric", c.resume.empty() ? c.metric : "resumed:" + c.resume},
              {"rows", run.trajectory.size()},
              {"final_step", run.final_state.step},
              {"final_time", run.final_state.t},
              {"V", last.V},
              {"max_abs_Huu", last.max_abs_huu},
              {"tensor_gap", last.tensor_gap},
              {"noise_floor", s.noise_floor}};
  if (run.failure) {
    o.passed = false;
    o.failure = *run.failure;
    o.record["failure"] = *run.failure;
  }
  return o;
}

void error_record(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"exit_code", code}, {"kind", kind}, {"message", message}}}}.dump() << "\n";
}

struct Flags {
  std::string config, metric, grid, stepper, diff, base_mode, x, out, direction, resume, action;
  std::vector<std::string> params;
  double dt = 0, safety = 0, noise_floor = 0, theta = 0;
  int steps = 0, samples = 0, threads = 0, checkpoint_every = 0;
  bool normalized = false;
  std::map<std::string, CLI::Option*> opt;
  bool given(const std::string& k) const {
    const auto it = opt.find(k);
    return it != opt.end() && it->second->count() > 0;
  }
};

void add_options(CLI::App* sc, Flags& f, const std::vector<std::string>& keys) {
  auto& o = f.opt;
  o["config"] = sc->add_option("--config", f.config, "JSON config file; flags override it");
  o["out"] = sc->add_option("--out", f.out, "output directory");
  o["threads"] = sc->add_option("--threads", f.threads, "worker threads (capped by FINSLER_THREADS)");
  for (const auto& k : keys) {
    if (k == "metric") o[k] = sc->add_option("--metric", f.metric, "zoo entry name");
    if (k == "param") o[k] = sc->add_option("--param", f.params, "entry parameter key=value (repeatable)");
    if (k == "grid") o[k] = sc->add_option("--grid", f.grid, "grid sizes base,base,fiber");
    if (k == "x") o[k] = sc->add_option("--x", f.x, "base point x1,x2");
    if (k == "theta") o[k] = sc->add_option("--theta", f.theta, "direction angle");
    if (k == "base_mode") o[k] = sc->add_option("--base-mode", f.base_mode, "analytic | fd");
    if (k == "samples") o[k] = sc->add_option("--samples", f.samples, "sample count");
    if (k == "direction") o[k] = sc->add_option("--direction", f.direction, "conformal | quadratic");
    if (k == "steps") o[k] = sc->add_option("--steps", f.steps, "time steps");
    if (k == "dt") o[k] = sc->add_option("--dt", f.dt, "fixed time step (default: dt policy)");
    if (k == "safety") o[k] = sc->add_option("--safety", f.safety, "dt policy safety factor");
    if (k == "normalized") o[k] = sc->add_flag("--normalized", f.normalized, "volume-normalized flow");
    if (k == "stepper") o[k] = sc->add_option("--stepper", f.stepper, "rk4 | euler");
    if (k == "diff") o[k] = sc->add_option("--diff", f.diff, "spectral | fd4");
    if (k == "noise_floor") o[k] = sc->add_option("--noise-floor", f.noise_floor, "fiber noise filter level");
    if (k == "checkpoint_every") o[k] = sc->add_option("--checkpoint-every", f.checkpoint_every, "steps between checkpoints");
    if (k == "resume") o[k] = sc->add_option("--resume", f.resume, "continue from a checkpoint");
    if (k == "action") o[k] = sc->add_option("action", f.action, "list | check");
  }
}

RunConfig resolve(const std::string& command, const Flags& f) {
  RunConfig c;
  c.command = command;
  if (f.given("config")) load_config(f.config, c);
  if (f.given("metric")) c.metric = f.metric;
  if (f.given("param"))
    for (const auto& p : f.params) c.params.insert_or_assign(parse_param(p).first, parse_param(p).second);
  if (f.given("grid")) c.grid = parse_grid(f.grid);
  if (f.given("x")) c.x = parse_list(f.x, "--x");
  if (f.given("theta")) c.theta = f.theta;
  if (f.given("base_mode")) c.base_mode = f.base_mode;
  if (f.given("samples")) c.samples = f.samples;
  if (f.given("direction")) c.direction = f.direction;
  if (f.given("steps")) c.steps = f.steps;
  if (f.given("dt")) c.dt = f.dt;
  if (f.given("safety")) c.safety = f.safety;
  if (f.given("normalized")) c.normalized = f.normalized;
  if (f.given("stepper")) c.stepper = f.stepper;
  if (f.given("diff")) c.diff = f.diff;
  if (f.given("noise_floor")) c.noise_floor = f.noise_floor;
  if (f.given("checkpoint_every")) c.checkpoint_every = f.checkpoint_every;
  if (f.given("resume")) c.resume = f.resume;
  if (f.given("action")) c.action = f.action;
  if (f.given("out")) c.out = f.out;
  if (f.given("threads")) c.threads = f.threads;
  if (c.out.empty()) c.out = "finsler-runs/" + command;
  check_config(c);
  return c;
}

}  // namespace

int run_command(const std::vector<std::string>& argv, const std::map<std::string, std::string>& env,
                std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical Finsler geometry on periodic surfaces", "finsler"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::map<std::string, Flags> flags;
  const std::map<std::string, std::vector<std::string>> commands{
      {"validate", {"metric", "param", "samples"}},
      {"report", {"metric", "param", "x", "theta", "base_mode"}},
      {"functional", {"metric", "param", "grid"}},
      {"verify-identities", {"metric", "param", "grid", "direction"}},
      {"flow",
       {"metric", "param", "grid", "steps", "dt", "safety", "normalized", "stepper", "diff", "noise_floor",
        "checkpoint_every", "resume"}},
      {"zoo", {"action", "metric", "param"}},
  };
  const std::map<std::string, std::string> help{
      {"validate", "check homogeneity, positivity and symmetry of a zoo entry"},
      {"report", "curvature record at one point and direction"},
      {"functional", "indicatrix volume and the total second-type scalar"},
      {"verify-identities", "variation identities and adjointness residuals"},
      {"flow", "scalar curvature flow with CSV diagnostics"},
      {"zoo", "list entries or check one against its references"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, keys] : commands) {
    subs[name] = app.add_subcommand(name, help.at(name));
    add_options(subs[name], flags[name], keys);
  }

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();  // program name
  std::ostringstream cli_out, cli_err;
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, cli_out, cli_err);
    out << cli_out.str();
    if (code == 0) return 0;
    error_record(err, 2, "usage", e.what());
    return 2;
  }
  std::string command;
  for (const auto& [name, sc] : subs)
    if (sc->parsed()) command = name;

  RunConfig cfg;
  int threads = 1;
  try {
    cfg = resolve(command, flags.at(command));
    threads = thread_count(cfg, env);
  } catch (const std::exception& e) {
    error_record(err, 2, "config", e.what());
    return 2;
  }
  omp_set_num_threads(threads);

  const std::filesystem::path dir(cfg.out);
  Outcome o;
  int code = 0;
  std::string kind;
  try {
    std::filesystem::create_directories(dir);
    if (command == "zoo") o = cmd_zoo(cfg);
    else if (command == "validate") o = cmd_validate(cfg);
    else if (command == "report") o = cmd_report(cfg);
    else if (command == "functional") o = cmd_functional(cfg);
    else if (command == "verify-identities") o = cmd_verify(cfg);
    else o = cmd_flow(cfg, dir);
    if (!o.passed) {
      code = 1;
      kind = "numerical";
    }
  } catch (const std::invalid_argument& e) {
    code = 2;
    kind = "config";
    o.failure = e.what();
  } catch (const std::domain_error& e) {
    code = 2;
    kind = "domain";
    o.failure = e.what();
  } catch (const std::exception& e) {
    code = 1;
    kind = "numerical";
    o.failure = e.what();
  }

  try {
    if (command != "flow" && code != 2) {
      const auto result = (dir / "result.json").string();
      write_file_atomic(result, o.record.dump(2) + "\n");
      o.outputs.push_back(result);
    }
    json manifest = {{"format", "finsler-run-manifest"},
                     {"version", 1},
                     {"command", command},
                     {"argv", argv},
                     {"config", config_json(cfg)},
                     {"tolerances", tolerances_json(cfg.tolerances)},
                     {"versions",
                      {{"finsler", kVersion}, {"compiler", __VERSION__}, {"cplusplus", __cplusplus},
                       {"cli11", CLI11_VERSION}, {"openmp", _OPENMP}}},
                     {"threads", threads},
                     {"outputs", o.outputs},
                     {"exit_code", code}};
    if (!o.failure.empty()) manifest["failure"] = o.failure;
    write_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    error_record(err, 1, "output", e.what());
    return 1;
  }

  if (command == "zoo" && cfg.action == "list") {
    for (const auto& line : zoo_list()) out << line << "\n";
  } else if (code != 2) {
    out << o.record.dump(2) << "\n";
  }
  if (code != 0) error_record(err, code, kind, o.failure);
  return code;
}

}  // namespace finsler::cli
