#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "alab/io.hpp"

using namespace alab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("alab_unit_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result cli(const std::string& args, const fs::path& dir) {
  const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
  const std::string cmd = std::string("ASSUMPTION_LAB_THREADS=1 '") + ALAB_CLI_PATH + "' " + args + " >'" + o.string() +
                          "' 2>'" + e.string() + "'";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// key -> type skeleton; arrays keep the skeleton of their first element
json skeleton(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = skeleton(it.value());
    return out;
  }
  if (j.is_array()) return j.empty() ? json::array() : json::array({skeleton(j.front())});
  if (j.is_number()) return "number";
  return j.type_name();
}

const std::string kData = ALAB_TEST_DATA;

}  // namespace

TEST_CASE("simulate runs are byte-identical for equal seeds") {
  const auto dir = scratch("determinism");
  const std::string base = "run --scenario contaminated-gaussian --analysis simulate --seed 7 --horizon 300 --replications 6";
  REQUIRE(cli(base + " --out '" + (dir / "a").string() + "'", dir).code == 0);
  REQUIRE(cli(base + " --out '" + (dir / "b").string() + "'", dir).code == 0);
  const auto a = slurp(dir / "a" / "trace.csv"), b = slurp(dir / "b" / "trace.csv");
  CHECK(!a.empty());
  CHECK(a == b);
  json sa = json::parse(slurp(dir / "a" / "summary.json")), sb = json::parse(slurp(dir / "b" / "summary.json"));
  sa["config"].erase("out");
  sb["config"].erase("out");
  CHECK(sa == sb);
  CHECK(count_lines(a) == 1 + 6 * 300u);
  REQUIRE(cli("run --scenario contaminated-gaussian --seed 8 --horizon 300 --replications 6 --out '" +
                  (dir / "c").string() + "'",
              dir)
              .code == 0);
  CHECK(slurp(dir / "c" / "trace.csv") != a);
}

TEST_CASE("summary documents validate and keep their schema") {
  const auto dir = scratch("schema");
  REQUIRE(cli("run --scenario contaminated-binary --seed 3 --horizon 40 --replications 3 --k 0.001 --out '" +
                  (dir / "o").string() + "'",
              dir)
              .code == 0);
  const json summary = json::parse(slurp(dir / "o" / "summary.json"));
  CHECK_NOTHROW(validate_summary(summary));
  const RunConfig back = parse_run_config(summary.at("config"));
  CHECK(back.scenario == "contaminated-binary");
  CHECK(back.seed == 3u);
  CHECK(*back.K == 0.001);

  const json golden = json::parse(slurp(kData + "/summary_skeleton.json"));
  CHECK(skeleton(summary) == golden);
  const std::string trace = slurp(dir / "o" / "trace.csv");
  CHECK(trace.substr(0, trace.find('\n') + 1) == slurp(kData + "/binary_trace_header.txt"));
  CHECK(count_lines(trace) == 1 + 3 * 40u);

  json broken = summary;
  broken["metrics"].erase("replications");
  CHECK_THROWS_AS(validate_summary(broken), Error);
  broken = summary;
  broken["schema_version"] = 2;
  CHECK_THROWS_AS(validate_summary(broken), Error);
}

TEST_CASE("graph-check reports separability") {
  const auto dir = scratch("graph");
  auto r = cli("run --analysis graph-check --scenario instrumental-variables --out '" + dir.string() + "'", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("g_separable=true") != std::string::npos);
  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep.at("kind") == "graph-check");
  r = cli("run --analysis graph-check --scenario contaminated-gaussian --out '" + dir.string() + "'", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("g_separable=false") != std::string::npos);
}

TEST_CASE("graph-check reads a graph file") {
  const auto dir = scratch("graphfile");
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << json{{"analysis", "graph-check"},
                {"graph", {{"file", kData + "/front_chain.graph"}, {"q_star", {"w"}}}},
                {"out", dir.string()}}
               .dump();
  }
  const auto r = cli("run --config '" + (dir / "cfg.json").string() + "'", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("g_separable=true") != std::string::npos);
}

TEST_CASE("stable analysis lists several attracting candidates") {
  const auto dir = scratch("stable");
  const auto r = cli("run --analysis stable --scenario contaminated-binary --omega-star 0.7,0.3 --k 0.001 --out '" +
                         dir.string() + "'",
                     dir);
  REQUIRE(r.code == 0);
  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep.at("attracting_count").get<int>() >= 2);
  CHECK(r.out.find("attracting=2") != std::string::npos);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  auto r = cli("run --scenario nope --out '" + dir.string() + "'", dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("code=ConfigError") != std::string::npos);
  r = cli("run --k -1 --out '" + dir.string() + "'", dir);
  CHECK(r.code == 1);
  r = cli("run --scenario contaminated-binary --omega-star 0.99,0.3 --out '" + dir.string() + "'", dir);
  CHECK(r.code == 1);
  r = cli("run --seed abc", dir);
  CHECK(r.code == 1);
  r = cli("run --config '" + kData + "/nonfinite_heckman.json' --out '" + dir.string() + "'", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("code=NonFiniteDivergence") != std::string::npos);
  r = cli("run --config /nonexistent/cfg.json", dir);
  CHECK(r.code == 1);
}

TEST_CASE("defaults reference is generated") {
  const auto dir = scratch("defaults");
  REQUIRE(cli("defaults --out '" + (dir / "d.md").string() + "'", dir).code == 0);
  const auto text = slurp(dir / "d.md");
  for (const char* key : {"schema_version", "scenario_config", "horizon", "replications", "gate_space"})
    CHECK(text.find(key) != std::string::npos);
  CHECK(text == defaults_reference());
}

TEST_CASE("empty trace list writes only the header") {
  auto sc = make_contaminated_gaussian();
  std::ostringstream os;
  TraceCsvWriter w(os, *sc);
  CHECK(os.str() == trace_csv_header(*sc) + "\n");
  CHECK(trace_csv_header(*sc).rfind("replication,t,theta,action", 0) == 0);
}

TEST_CASE("numbers keep seventeen digits") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(parse_run_config(json{{"bogus", 1}}), Error);
  CHECK_THROWS_AS(parse_run_config(json{{"seed", "x"}}), Error);
  CHECK_THROWS_AS(parse_run_config(json{{"schema_version", 2}}), Error);
  CHECK_THROWS_AS(parse_run_config(json{{"analysis", "plot"}}), Error);
  CHECK_THROWS_AS(parse_run_config(json{{"stable", {{"radius", 0.1}, {"extra", 1}}}}), Error);
  const RunConfig inf = parse_run_config(json{{"K", "inf"}});
  CHECK(std::isinf(*inf.K));
  try {
    parse_run_config(json{{"horizon", "long"}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find("horizon") != std::string::npos);
  }
}

TEST_CASE("config round-trips through json") {
  RunConfig c = parse_run_config(json{{"scenario", "contaminated-binary"},
                                      {"analysis", "stable"},
                                      {"seed", 9},
                                      {"K", 0.002},
                                      {"omega_star", {0.6, 0.4}},
                                      {"context", {{"kind", "beta"}, {"a", 2.0}, {"b", 3.0}}},
                                      {"scenario_config", {{"epsilon", 0.1}}}});
  const RunConfig d = parse_run_config(to_json(c));
  CHECK(to_json(d) == to_json(c));
  CHECK(d.context->kind() == ContextDistribution::Kind::Beta);
  CHECK((*d.omega_star)[0] == 0.6);
}

TEST_CASE("validation rejects infeasible runs before computing") {
  auto check_rejects = [](const json& j) {
    const RunConfig c = parse_run_config(j);
    try {
      const auto sc = build_scenario(c);
      validate_run_config(c, *sc);
      FAIL("expected rejection of " << j.dump());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
    }
  };
  check_rejects(json{{"K", 0.0}});
  check_rejects(json{{"scenario", "contaminated-binary"}, {"omega_star", {0.99, 0.3}}});
  check_rejects(json{{"scenario", "contaminated-binary"}, {"omega_star", {0.5}}});
  check_rejects(json{{"scenario", "calibration"}, {"analysis", "stable"}});
  check_rejects(json{{"scenario", "calibration"}, {"context", {{"kind", "uniform"}}}});
  check_rejects(json{{"mode", "correct-bayesian"}, {"analysis", "dynamics"}});
  check_rejects(json{{"scenario", "heckman-selection"}, {"divergence", "chi-squared"}});
  check_rejects(json{{"scenario", "contaminated-gaussian"}, {"gate_space", "s-and-u"}});
  check_rejects(json{{"scenario", "confounded-causal"}, {"scenario_config", {{"resolution", "fine"}}}});
  const RunConfig ok = parse_run_config(json{{"scenario", "contaminated-binary"}});
  CHECK_NOTHROW(validate_run_config(ok, *build_scenario(ok)));
}

TEST_CASE("error codes split into input and numeric failures") {
  CHECK(is_numeric_failure(ErrorCode::NonFiniteDivergence));
  CHECK(is_numeric_failure(ErrorCode::ZeroLikelihood));
  CHECK_FALSE(is_numeric_failure(ErrorCode::ConfigError));
  CHECK_FALSE(is_numeric_failure(ErrorCode::IoError));
  const Error e(ErrorCode::TooLarge, "seven nodes at most");
  CHECK(std::string(e.what()) == "TooLarge: seven nodes at most");
}

TEST_CASE("write_json reports unwritable paths") {
  CHECK_THROWS_AS(write_json("/nonexistent/dir/x.json", json::object()), Error);
}
