#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "hkdelay/commands.hpp"
#include "hkdelay/config.hpp"
#include "hkdelay/errors.hpp"

using namespace hkdelay;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("hkdelay_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name, std::ios::binary) << text;
    return dir / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result run(std::initializer_list<std::string> args) {
  std::vector<std::string> v{"hkdelay"};
  v.insert(v.end(), args);
  std::vector<const char*> argv;
  for (const auto& a : v) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kTwoAgents = R"(model:
  n_agents: 2
  dim: 1
  tau: 1.0
  scheme: classical
  influence:
    family: constant
    level: 1.0
integrator:
  steps_per_delay: 100
  t_end: 3.0
history:
  kind: constant
  positions: [[0.0], [1.0]]
)";

std::string random_config(const std::string& scheme, double t_end, const std::string& extra = "") {
  return "model:\n  n_agents: 20\n  dim: 1\n  tau: 2.0\n  scheme: " + scheme +
         "\n  influence:\n    family: power_law\n    beta: 3\n"
         "integrator:\n  steps_per_delay: 32\n  t_end: " +
         std::to_string(t_end) + "\nhistory:\n  kind: uniform_box\n  lo: 0\n  hi: 10\nseed: 42\n" + extra;
}

}  // namespace

TEST_CASE("config parsing fills defaults") {
  const auto c = parse_config(kTwoAgents);
  CHECK(c.model.n_agents == 2);
  CHECK(c.model.influence.family() == InfluenceFunction::Family::Constant);
  CHECK(c.steps_per_delay == 100);
  CHECK(c.record_stride == 1);
  CHECK(c.eps_consensus == 1e-8);
  CHECK(c.stop_at_consensus);
  CHECK(c.t_end == 3.0);
  CHECK(c.analysis_directions() == std::vector<std::vector<double>>{{1.0}});
  CHECK_FALSE(c.seed.has_value());
}

TEST_CASE("config errors carry the line and the field") {
  const auto error_of = [](const std::string& text) -> std::pair<int, std::string> {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return {e.line(), e.what()};
    }
    return {0, ""};
  };

  auto text = std::string(kTwoAgents);
  auto e = error_of(std::string(text).replace(text.find("tau: 1.0"), 8, "tau: 0"));
  CHECK(e.first == 4);
  CHECK(e.second.find("model.tau") != std::string::npos);

  e = error_of(text + "bogus: 1\n");
  CHECK(e.first == 15);
  CHECK(e.second.find("unknown key") != std::string::npos);

  e = error_of(std::string(text).replace(text.find("level: 1.0"), 10, "level: 1.0\n    beta: 2"));
  CHECK(e.second.find("model.influence.beta") != std::string::npos);

  e = error_of(std::string(text).replace(text.find("level: 1.0"), 10, "level: 1.5"));
  CHECK(e.first == 8);
  CHECK(e.second.find("model.influence.level") != std::string::npos);

  e = error_of(std::string(text).replace(text.find("[[0.0], [1.0]]"), 14, "[[0.0]]"));
  CHECK(e.second.find("history.positions") != std::string::npos);

  e = error_of(std::string(text).replace(text.find("classical"), 9, "motsch"));
  CHECK(e.first == 5);

  e = error_of(std::string(text).replace(text.find("n_agents: 2"), 11, "n_agents: two"));
  CHECK(e.second.find("model.n_agents") != std::string::npos);

  // randomized history without a seed
  auto r = random_config("classical", 20);
  e = error_of(r.substr(0, r.find("seed:")));
  CHECK(e.second.find("seed") != std::string::npos);
  CHECK(e.first > 0);

  e = error_of(text + "analysis:\n  directions: [[2.0]]\n");
  CHECK(e.second.find("analysis.directions") != std::string::npos);
  CHECK(error_of("model: [1, 2\n").first > 0);
}

TEST_CASE("config round trip") {
  const std::string configs[] = {
      kTwoAgents,
      random_config("normalized_no_self", 100,
                    "analysis:\n  directions: [[1.0]]\n  eps_consensus: 1e-7\n"
                    "sweep:\n  tau: [0.1, 1]\n  beta: [0, 1.5]\n  n_agents: [3, 4]\n  seeds: [1, 18446744073709551615]\n"
                    "output:\n  sweep: grid.csv\n"),
      R"(model:
  n_agents: 3
  dim: 2
  tau: 0.3
  scheme: normalized_with_self
  influence:
    family: tabulated
    knots: [[0, 1], [0.5, 0.25], [2.125, 0.1]]
    declared_sup: 1
integrator:
  record_stride: 3
  stop_at_consensus: false
meanfield:
  source:
    kind: gaussian
    lo: [0, -1]
    hi: [1, 1]
    mean: [0.5, 0.1]
    scale: [0.3, 0.123456789012345678]
  n_values: [4, 8]
  seeds: [9]
  horizon: 12.5
)"};
  for (const auto& text : configs) {
    const auto a = parse_config(text);
    const auto s = serialize_config(a);
    const auto b = parse_config(s);
    CHECK(a == b);
    CHECK(serialize_config(b) == s);
  }
}

TEST_CASE("simulate writes a trajectory and is byte-identical on repeat") {
  Scratch tmp;
  const auto cfg = tmp.write("two.yaml", kTwoAgents);
  auto r1 = run({"simulate", "--config", cfg.string(), "--out", (tmp.dir / "a").string(), "--quiet"});
  auto r2 = run({"simulate", "--config", cfg.string(), "--out", (tmp.dir / "b").string()});
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(r1.out.empty());
  CHECK(r2.out.find("simulate:") != std::string::npos);

  const auto csv = slurp(tmp.dir / "a" / "trajectory.csv");
  CHECK(csv.rfind("t,agent,coord,x,v\n", 0) == 0);
  CHECK(csv == slurp(tmp.dir / "b" / "trajectory.csv"));
  CHECK(slurp(tmp.dir / "a" / "summary.json") == slurp(tmp.dir / "b" / "summary.json"));

  // row for agent 1 at t = 1
  std::istringstream in(csv);
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.rfind("1,1,0,", 0) == 0) {
      const double x = std::stod(line.substr(6, line.find(',', 6) - 6));
      CHECK(std::abs(x - std::exp(-1.0)) <= 1e-8);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("simulate exit codes") {
  Scratch tmp;
  auto text = std::string(kTwoAgents);
  const auto bad = tmp.write("bad.yaml", text.replace(text.find("tau: 1.0"), 8, "tau: -1"));
  auto r = run({"simulate", "--config", bad.string(), "--out", tmp.dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("model.tau") != std::string::npos);
  CHECK(r.err.find("line 4") != std::string::npos);

  CHECK(run({"simulate", "--config", (tmp.dir / "missing.yaml").string()}).code == 2);

  const auto blowup = tmp.write("blowup.yaml", R"(model:
  n_agents: 2
  dim: 1
  tau: 1.0
  scheme: classical
  influence: {family: constant, level: 1}
integrator: {steps_per_delay: 8, t_end: 5}
history:
  kind: constant
  positions: [[-1e308], [1e308]]
)");
  CHECK(run({"simulate", "--config", blowup.string(), "--out", tmp.dir.string()}).code == 3);

  CHECK(run({}).code == 2);
  CHECK(run({"simulate"}).code == 2);
  CHECK(run({"frobnicate", "--config", "x"}).code == 2);
}

TEST_CASE("verify exit codes") {
  Scratch tmp;
  const auto ok = tmp.write("ok.yaml", random_config("classical", 600));
  auto r = run({"verify", "--config", ok.string(), "--out", tmp.dir.string(), "--quiet"});
  CHECK(r.code == 0);
  const auto report = slurp(tmp.dir / "report.csv");
  CHECK(report.rfind("direction,k,m_k,M_k,D_k,sigma_k,gamma_k,gamma_tilde,bound_rhs,pass\n", 0) == 0);
  CHECK(report.find(",false\n") == std::string::npos);
  const auto cert = slurp(tmp.dir / "certificate.json");
  for (const char* key : {"\"psi_lower\"", "\"sigma\"", "\"gamma\"", "\"gamma_minus\"",
                          "\"gamma_plus\"", "\"m\"", "\"M\"", "\"N\"", "\"tau\""})
    CHECK(cert.find(key) != std::string::npos);

  const auto self = tmp.write("self.yaml", random_config("normalized_with_self", 600));
  CHECK(run({"verify", "--config", self.string(), "--out", tmp.dir.string()}).code == 4);

  const auto short_run = tmp.write("short.yaml", random_config("classical", 11.5));
  r = run({"verify", "--config", short_run.string(), "--out", tmp.dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("horizon too short for k=1") != std::string::npos);
}

TEST_CASE("sweep grid of size one matches simulate and verify") {
  Scratch tmp;
  const auto cfg = tmp.write("one.yaml", random_config("classical", 200, "analysis:\n  eps_consensus: 1e-6\n"));
  REQUIRE(run({"sweep", "--config", cfg.string(), "--out", tmp.dir.string()}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", tmp.dir.string()}).code == 0);
  REQUIRE(run({"verify", "--config", cfg.string(), "--out", tmp.dir.string()}).code == 0);

  std::istringstream sweep(slurp(tmp.dir / "sweep.csv"));
  std::string header, row, extra;
  std::getline(sweep, header);
  std::getline(sweep, row);
  CHECK_FALSE(std::getline(sweep, extra));
  const auto summary = slurp(tmp.dir / "summary.json");
  const auto cert = slurp(tmp.dir / "certificate.json");
  const auto field = [](const std::string& json, const std::string& key) {
    const auto p = json.find("\"" + key + "\": ") + key.size() + 4;
    return json.substr(p, json.find_first_of(",\n", p) - p);
  };
  CHECK(row.find("," + field(summary, "final_diameter") + ",") != std::string::npos);
  CHECK(row.find("," + field(summary, "end_time")) != std::string::npos);
  CHECK(field(summary, "final_diameter") == field(cert, "final_diameter"));
}

TEST_CASE("sweep rows are deterministic and independent of the worker count") {
  Scratch tmp;
  const auto cfg = tmp.write("grid.yaml", random_config("normalized_no_self", 300,
                                                        "sweep:\n  tau: [0.5, 2]\n  n_agents: [4]\n"
                                                        "  seeds: [1, 2, 3]\n"));
  REQUIRE(run({"sweep", "--config", cfg.string(), "--out", (tmp.dir / "a").string(), "--jobs", "1"}).code == 0);
  REQUIRE(run({"sweep", "--config", cfg.string(), "--out", (tmp.dir / "b").string(), "--jobs", "4"}).code == 0);
  const auto a = slurp(tmp.dir / "a" / "sweep.csv");
  CHECK(a == slurp(tmp.dir / "b" / "sweep.csv"));

  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line.substr(line.find(",seed") + 1));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] != rows[1]);
  CHECK(rows[1] != rows[2]);

  const auto mixed = tmp.write("mixed.yaml", random_config("normalized_with_self", 300,
                                                           "sweep:\n  seeds: [1, 2]\n"));
  CHECK(run({"sweep", "--config", mixed.string(), "--out", tmp.dir.string()}).code == 4);
}

TEST_CASE("meanfield command") {
  Scratch tmp;
  const std::string base = R"(model:
  n_agents: 2
  dim: 1
  tau: 1.0
  scheme: classical
  influence: {family: power_law, beta: 1}
integrator: {steps_per_delay: 16}
analysis: {eps_consensus: 1e-6}
meanfield:
  source: {kind: uniform_box, lo: [0], hi: [10]}
  n_values: [5, 10]
  seeds: [1, 2]
)";
  const auto good = tmp.write("good.yaml", base + "  horizon: 150\n  sample_interval: 10\n");
  REQUIRE(run({"meanfield", "--config", good.string(), "--out", (tmp.dir / "a").string()}).code == 0);
  REQUIRE(run({"meanfield", "--config", good.string(), "--out", (tmp.dir / "b").string(), "--jobs", "3"}).code == 0);
  const auto csv = slurp(tmp.dir / "a" / "meanfield.csv");
  CHECK(csv.rfind("N,seed,t,diameter,w1_vs_ref\n", 0) == 0);
  CHECK(csv == slurp(tmp.dir / "b" / "meanfield.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 16);

  const auto short_run = tmp.write("short.yaml", base + "  horizon: 2\n");
  CHECK(run({"meanfield", "--config", short_run.string(), "--out", tmp.dir.string()}).code == 1);
}
