// cli-io end to end: exit codes, golden headers, manifests, determinism.
#include <algorithm>
#include <filesystem>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "paircrystal/cli.hpp"
#include "paircrystal/io.hpp"

namespace fs = std::filesystem;
using namespace paircrystal;

namespace {

const fs::path kConfigs = fs::path(PC_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("paircrystal_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "paircrystal");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string first_line(const fs::path& p) {
  const std::string s = io::read_file(p);
  return s.substr(0, s.find('\n'));
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("paircrystal_test_cli_" + name + ".json");
  io::write_file(p, text);
  return p;
}

}  // namespace

TEST_CASE("simulate: golden header, LF, manifest checksums match files") {
  const auto out = scratch("sim");
  REQUIRE(run({"simulate", "--config", (kConfigs / "extra/fixed_point_simulate.json").string(), "--out",
               out.string()}) == 0);
  CHECK(first_line(out / "trajectory.csv") == "tau,Mx,My,Mz,X,P,H,Msq");
  const std::string csv = io::read_file(out / "trajectory.csv");
  CHECK(csv.find('\r') == std::string::npos);
  // Constant columns at the fixed point: every data row after tau is identical.
  std::istringstream lines(csv);
  std::string line, tail0;
  std::getline(lines, line);
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    const std::string tail = line.substr(line.find(','));
    if (rows++ == 0) tail0 = tail;
    CHECK(tail == tail0);
  }
  CHECK(rows == 1001);  // 10 pi sampled at pi/100

  const auto m = nlohmann::json::parse(io::read_file(out / "manifest.json"));
  CHECK(m["command"] == "simulate");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m["artifact_version"] == cli::kArtifactVersion);
  REQUIRE(m["outputs"].size() == 2);  // csv + svg
  for (const auto& o : m["outputs"]) {
    const std::string bytes = io::read_file(out / o["file"].get<std::string>());
    CHECK(o["fnv1a64"] == io::fnv1a64(bytes));
    CHECK(o["bytes"] == bytes.size());
  }
  CHECK(fs::exists(out / "trajectory.svg"));
  CHECK(!fs::exists(out / "timings.json"));
}

TEST_CASE("determinism: two runs give byte-identical outputs and manifests") {
  for (const std::string cfg : {"fig02_time_crystal.json", "fig09_quantum_E2_first.json"}) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    REQUIRE(run({cfg.rfind("fig02", 0) == 0 ? "simulate" : "quantum", "--config", (kConfigs / cfg).string(),
                 "--out", a.string()}) == 0);
    REQUIRE(run({cfg.rfind("fig02", 0) == 0 ? "simulate" : "quantum", "--config", (kConfigs / cfg).string(),
                 "--out", b.string()}) == 0);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      CHECK(io::read_file(e.path()) == io::read_file(b / e.path().filename()));
      ++n;
    }
    CHECK(n >= 3);
  }
}

TEST_CASE("json format and --plot off") {
  const auto out = scratch("json");
  REQUIRE(run({"unit-cell", "--config", (kConfigs / "extra/fixed_point_unit_cell.json").string(), "--out",
               out.string(), "--format", "json", "--plot", "off"}) == 0);
  const auto t = nlohmann::json::parse(io::read_file(out / "unit_cell.json"));
  CHECK(t["columns"] == nlohmann::json({"tau", "Mx_shift0", "Mx_shift1", "Mx_shift2", "Mx_shift3"}));
  CHECK(!fs::exists(out / "unit_cell.svg"));
  const auto m = nlohmann::json::parse(io::read_file(out / "manifest.json"));
  CHECK(m["results"]["overlap"] == 0.0);
}

TEST_CASE("quantum: manifest records solved value and defect; mirror equals direct run") {
  const auto out = scratch("quantum");
  REQUIRE(run({"quantum", "--config", (kConfigs / "fig09_quantum_E2_first.json").string(), "--out",
               out.string(), "--plot", "off"}) == 0);
  CHECK(first_line(out / "eigenfunction.csv") == "y,phi1,phi2");
  const auto m = nlohmann::json::parse(io::read_file(out / "manifest.json"));
  const auto& r = m["results"];
  CHECK(std::abs(r["solved_free_value"].get<double>() + 0.354651985) <= 1e-4);
  CHECK(r.contains("defect_plus"));
  CHECK(r.contains("defect_minus"));
  CHECK(r["mirror"]["max_scaled_difference_vs_mirror_solution"].get<double>() <= 1e-9);
  CHECK(fs::exists(out / "eigenfunction_mirror.csv"));
}

TEST_CASE("find-orbit: zero-width window gives a single row; empty window warns") {
  auto out = scratch("zero");
  REQUIRE(run({"find-orbit", "--config", (kConfigs / "extra/find_orbit_zero_width.json").string(), "--out",
               out.string(), "--plot", "off"}) == 0);
  CHECK(first_line(out / "candidates.csv") ==
        "rank,X0,T,T_over_pi,residual,horizon_residual,classification,lambda_max,hit_boundary");
  const std::string csv = io::read_file(out / "candidates.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  out = scratch("empty");
  REQUIRE(run({"find-orbit", "--config", (kConfigs / "extra/find_orbit_empty.json").string(), "--out",
               out.string()}) == 0);
  const auto m = nlohmann::json::parse(io::read_file(out / "manifest.json"));
  CHECK(!m["warnings"].empty());
  CHECK(io::read_file(out / "candidates.csv") ==
        "rank,X0,T,T_over_pi,residual,horizon_residual,classification,lambda_max,hit_boundary\n");
}

TEST_CASE("exit codes") {
  const auto out = scratch("codes");
  std::string err;
  // 2: unknown key, wrong command, bad flag value, missing file.
  const auto unknown = write_config("unknown", R"({"command": "simulate", "tau_end": 1, "colour": "red"})");
  CHECK(run({"simulate", "--config", unknown.string(), "--out", out.string()}, &err) == 2);
  CHECK(err.find("colour") != std::string::npos);
  CHECK(!fs::exists(out / "manifest.json"));
  CHECK(run({"poincare", "--config", (kConfigs / "extra/fixed_point_simulate.json").string(), "--out",
             out.string()}) == 2);
  CHECK(run({"simulate", "--config", unknown.string(), "--format", "xml"}) == 2);
  CHECK(run({"simulate", "--config", "/nonexistent.json"}) == 2);
  CHECK(run({"nonsense"}) == 2);
  CHECK(run({"--help"}) == 0);
  // 3: integration failure (step budget exhausted).
  const auto budget = write_config("budget", R"({"command": "simulate", "tau_end": 1000, "max_steps": 10})");
  CHECK(run({"simulate", "--config", budget.string(), "--out", out.string()}, &err) == 3);
  // 4: bracket without sign change.
  CHECK(run({"quantum", "--config", (kConfigs / "extra/quantum_bad_bracket.json").string(), "--out",
             out.string()}, &err) == 4);
  CHECK(err.find("sign change") != std::string::npos);
  // 4: unit cell of a non-periodic candidate is refused.
  const auto np = write_config("nonperiodic",
                               R"({"command": "unit-cell", "x0": 0.3, "period": 20, "compute_lyapunov": false})");
  CHECK(run({"unit-cell", "--config", np.string(), "--out", out.string()}, &err) == 4);
}

TEST_CASE("--timings writes a separate file and leaves the manifest unchanged") {
  const auto a = scratch("tim_a"), b = scratch("tim_b");
  const auto cfg = (kConfigs / "extra/fixed_point_simulate.json").string();
  REQUIRE(run({"simulate", "--config", cfg, "--out", a.string()}) == 0);
  REQUIRE(run({"simulate", "--config", cfg, "--out", b.string(), "--timings"}) == 0);
  CHECK(fs::exists(b / "timings.json"));
  CHECK(io::read_file(a / "manifest.json") == io::read_file(b / "manifest.json"));
}
