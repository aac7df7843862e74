#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

using finsler::cli::run_command;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
  args.insert(args.begin(), "finsler");
  std::ostringstream out, err;
  const int code = run_command(args, env, out, err);
  return {code, out.str(), err.str()};
}

std::string dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("finsler_cli_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("report on the Funk disk") {
  const auto d = dir("report");
  const auto r = run({"report", "--metric", "funk-disk", "--x", "0.2,0.1", "--theta", "0.7", "--out", d});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["Huu"].get<double>() == doctest::Approx(-0.25).epsilon(1e-6));
  const auto m = json::parse(slurp(d + "/manifest.json"));
  CHECK(m["command"] == "report");
  CHECK(m["exit_code"] == 0);
  CHECK(m["config"]["metric"] == "funk-disk");
  CHECK(m["tolerances"].contains("variation"));
  CHECK(json::parse(slurp(d + "/result.json")) == j);
  std::filesystem::remove_all(d);
}

TEST_CASE("usage and configuration errors exit 2 with an error record") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"flow", "--grid", "0,64,64"},
           {"flow", "--grid", "16,32,32"},
           {"flow", "--grid", "16,16"},
           {"flow", "--metric", "sphere-patch"},
           {"report", "--metric", "funk-disk", "--x", "2,0"},
           {"report", "--metric", "nowhere"},
           {"validate", "--metric", "randers-torus", "--param", "b=1.2"},
           {"flow", "--stepper", "leapfrog"},
           {"bogus"},
           {}}) {
    auto full = args;
    if (full.size() > 1) full.insert(full.end(), {"--out", dir("errors")});
    const auto r = run(full);
    CHECK(r.code == 2);
    const auto e = json::parse(r.err);
    CHECK(e["error"]["exit_code"] == 2);
  }
  CHECK(run({"zoo"}, {{"FINSLER_THREADS", "0"}}).code == 2);
  CHECK(run({"--help"}).code == 0);
  std::filesystem::remove_all(dir("errors"));
}

TEST_CASE("zoo list and validate") {
  const auto d = dir("zoo");
  const auto r = run({"zoo", "list", "--out", d});
  CHECK(r.code == 0);
  CHECK(r.out.find("funk-disk 2 disk") != std::string::npos);
  const auto v = run({"validate", "--metric", "randers-torus", "--samples", "16", "--out", d});
  CHECK(v.code == 0);
  CHECK(json::parse(v.out)["passed"] == true);
  std::filesystem::remove_all(d);
}

TEST_CASE("config file with flag overrides") {
  const auto d = dir("config");
  std::filesystem::create_directories(d);
  const auto cfg = d + "/run.json";
  std::ofstream(cfg) << R"({"metric": "conformal-torus", "grid": [16, 16, 16], "steps": 3, "normalized": true,
                           "out": ")" << d << R"(/from-file"})";
  const auto a = run({"flow", "--config", cfg, "--steps", "2"});
  REQUIRE(a.code == 0);
  const auto m = json::parse(slurp(d + "/from-file/manifest.json"));
  CHECK(m["config"]["steps"] == 2);
  CHECK(m["config"]["normalized"] == true);
  CHECK(m["config"]["metric"] == "conformal-torus");
  std::ofstream(cfg) << R"({"metric": "euclidean", "colour": 3})";
  CHECK(run({"flow", "--config", cfg}).code == 2);
  std::filesystem::remove_all(d);
}

TEST_CASE("flow CSV: header, row count, determinism, numerical failure") {
  const auto a = dir("flow_a"), b = dir("flow_b");
  const std::vector<std::string> args{"flow", "--metric", "conformal-torus", "--grid", "16,16,16", "--steps", "5"};
  auto with_out = [&](const std::string& o) {
    auto v = args;
    v.insert(v.end(), {"--out", o});
    return v;
  };
  REQUIRE(run(with_out(a)).code == 0);
  REQUIRE(run(with_out(b), {{"FINSLER_THREADS", "1"}}).code == 0);
  const auto csv = slurp(a + "/diagnostics.csv");
  CHECK(csv == slurp(b + "/diagnostics.csv"));
  CHECK(csv.rfind("step,time,V,I,I_norm,c,min_eig_g,max_abs_Huu,gem_residual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(std::filesystem::exists(a + "/checkpoint.json"));

  // resume from the checkpoint for two more steps
  const auto c = dir("flow_c");
  REQUIRE(run({"flow", "--resume", a + "/checkpoint.json", "--steps", "2", "--out", c}).code == 0);
  CHECK(json::parse(slurp(c + "/manifest.json"))["exit_code"] == 0);
  const auto resumed = slurp(c + "/diagnostics.csv");
  CHECK(resumed.find("\n7,") != std::string::npos);

  const auto f = dir("flow_fail");
  const auto r = run({"flow", "--metric", "randers-torus", "--grid", "16,16,32", "--steps", "10", "--out", f});
  CHECK(r.code == 1);
  CHECK(json::parse(r.err)["error"]["kind"] == "numerical");
  CHECK(json::parse(slurp(f + "/manifest.json"))["exit_code"] == 1);
  CHECK(std::filesystem::exists(f + "/diagnostics.csv"));
  for (const auto& p : {a, b, c, f}) std::filesystem::remove_all(p);
}
