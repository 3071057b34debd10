#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "alab/io.hpp"

namespace fs = std::filesystem;
using namespace alab;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config, scenario, analysis, mode, omega_star, out, k;
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon, replications;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "--omega-star: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "--omega-star: empty list");
  return out;
}

RunConfig resolve(const Overrides& o) {
  json j = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw Error(ErrorCode::ConfigError, "--config: cannot open '" + o.config + "'");
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, "--config: not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "--config: expected a JSON object");
  }
  // flags win over the file; the merged document goes through the same strict parser
  if (!o.scenario.empty()) j["scenario"] = o.scenario;
  if (!o.analysis.empty()) j["analysis"] = o.analysis;
  if (!o.mode.empty()) j["mode"] = o.mode;
  if (!o.out.empty()) j["out"] = o.out;
  if (o.seed) j["seed"] = *o.seed;
  if (o.horizon) j["horizon"] = *o.horizon;
  if (o.replications) j["replications"] = *o.replications;
  if (!o.k.empty()) {
    if (o.k == "inf") {
      j["K"] = "inf";
    } else {
      try {
        std::size_t used = 0;
        j["K"] = std::stod(o.k, &used);
        if (used != o.k.size()) throw std::invalid_argument(o.k);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "--k: '" + o.k + "' is not a number");
      }
    }
  }
  if (!o.omega_star.empty()) j["omega_star"] = parse_list(o.omega_star);
  return parse_run_config(j);
}

RunOptions engine_options(const RunConfig& c) {
  RunOptions o;
  o.K = effective_K(c);
  o.horizon = c.horizon;
  o.replications = c.replications;
  o.mode = c.mode;
  o.seed = c.seed;
  o.divergence = divergence_by_name(c.divergence);
  o.record_rows = c.record_rows;
  o.threads = c.threads;
  return o;
}

void print_vector(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_number(v[i]);
}

int simulate(const RunConfig& c, const Scenario& sc, const fs::path& dir) {
  RunOptions o = engine_options(c);
  const TrueState truth = effective_true_state(c);
  std::ofstream csv;
  std::optional<TraceCsvWriter> writer;
  if (c.record_rows) {
    csv.open(dir / "trace.csv", std::ios::binary);
    if (!csv) throw Error(ErrorCode::IoError, "cannot write " + (dir / "trace.csv").string());
    writer.emplace(csv, sc);
  }
  std::vector<ReplicationSummary> sums;
  // bounded memory: traces are written and dropped chunk by chunk
  const int chunk = std::max(1, 4 * worker_count(c.threads));
  for (int first = 0; first < c.replications; first += chunk) {
    const int n = std::min(chunk, c.replications - first);
    for (const Trace& t : run_range(sc, truth, o, first, n)) {
      if (writer) writer->write(t);
      sums.push_back(summarize(t));
    }
  }
  const json summary = summary_json(c, sc, sums);
  validate_summary(summary);
  write_json((dir / "summary.json").string(), summary);
  const auto& m = summary["metrics"];
  std::cout << "scenario=" << sc.name() << " replications=" << c.replications << " horizon=" << c.horizon
            << " mean_research_frequency=" << m["mean_research_frequency"].dump() << '\n'
            << "mean_terminal_means=" << m["mean_terminal_means"].dump() << '\n';
  return 0;
}

int stable(const RunConfig& c, const Scenario& sc, const fs::path& dir) {
  const double K = effective_K(c);
  const TrueState truth = effective_true_state(c);
  StableOptions so;
  so.starts = c.stable.starts;
  so.scan_points = c.stable.scan_points;
  so.threads = c.threads;
  so.seed = c.seed;
  so.divergence = divergence_by_name(c.divergence);
  const StableBeliefReport rep = solve_stable(sc, truth, K, {}, so);
  const CertitudeSummary cert = certitude_report(sc, rep, truth, c.stable.certitude_tolerance);
  std::optional<BasinEstimate> basin;
  if (c.stable.replications > 0 && rep.attracting_count() > 0) {
    std::function<BeliefState(int)> prior;
    if (c.stable.dispersed_priors) {
      const int reps = c.stable.replications;
      prior = [&sc, reps](int r) { return dispersed_prior(sc, r, reps); };
    }
    basin = simulate_convergence(sc, truth, K, rep, c.stable.replications, c.stable.horizon, c.seed, prior, c.mode,
                                 c.stable.radius);
  }
  std::cout << "scenario=" << sc.name() << " K=" << format_number(K) << " candidates=" << rep.candidates.size()
            << " attracting=" << rep.attracting_count() << '\n';
  for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
    const auto& cand = rep.candidates[i];
    std::cout << "candidate " << i + 1 << " omega_hat=";
    print_vector(std::cout, cand.omega_hat);
    std::cout << " attracting=" << (cand.attracting ? "true" : "false") << " residual=" << format_number(cand.residual);
    if (cand.slope) std::cout << " slope=" << format_number(*cand.slope);
    if (basin) std::cout << " basin_frequency=" << format_number(basin->frequency[i]);
    std::cout << '\n';
  }
  write_json((dir / "report.json").string(), envelope(c, "stable", stable_report_json(sc, rep, cert, basin)));
  return 0;
}

int dynamics(const RunConfig& c, const Scenario& sc, const fs::path& dir) {
  RunOptions o = engine_options(c);
  o.record_rows = true;
  o.track_theta_bar = true;
  const std::vector<Trace> traces = run(sc, effective_true_state(c), o);
  const PropensityReport r = propensity_dynamics_report(traces);
  std::ofstream csv(dir / "propensity.csv", std::ios::binary);
  if (!csv) throw Error(ErrorCode::IoError, "cannot write " + (dir / "propensity.csv").string());
  csv << "t,mean_theta_bar,research_frequency\n";
  for (std::size_t t = 0; t < r.research_frequency.size(); ++t)
    csv << t + 1 << ',' << format_number(r.mean_theta_bar[t]) << ',' << format_number(r.research_frequency[t]) << '\n';
  write_json((dir / "report.json").string(), envelope(c, "dynamics", propensity_report_json(r)));
  std::cout << "scenario=" << sc.name() << " expansions=" << r.expansions << " contractions=" << r.contractions
            << " unreversed_expansions=" << r.unreversed_expansion.size() << '\n';
  return 0;
}

int graph(const RunConfig& c, const Scenario& sc, const fs::path& dir) {
  const GraphCheck g = graph_check(c, sc);
  std::cout << "g_separable=" << (g.verdict.separable ? "true" : "false") << '\n';
  if (g.verdict.witness) std::cout << "witness=" << g.graph.name(*g.verdict.witness) << '\n';
  std::cout << "i_set=";
  for (std::size_t i = 0; i < g.i_set.size(); ++i) std::cout << (i ? "," : "") << g.graph.name(g.i_set[i]);
  std::cout << '\n';
  write_json((dir / "report.json").string(), envelope(c, "graph-check", graph_report_json(g)));
  return 0;
}

int oracle(const RunConfig& c, const Scenario& sc, const fs::path& dir) {
  const OracleReport r = calibrate_oracle(sc, c.oracle, c.seed);
  for (const auto& row : r.rows)
    std::cout << (row.pass ? "PASS " : "FAIL ") << row.label << " theta=" << format_number(row.theta)
              << " gate=" << format_number(row.value) << " oracle=" << format_number(row.oracle)
              << " tolerance=" << format_number(row.tolerance) << '\n';
  write_json((dir / "report.json").string(), envelope(c, "calibrate-oracle", oracle_report_json(r)));
  if (!r.all_pass()) {
    std::cerr << "error code=OracleMismatch message=gate divergences disagree with the oracle\n";
    return 2;
  }
  return 0;
}

int run_command(const Overrides& o) {
  const RunConfig c = resolve(o);
  const auto sc = build_scenario(c);
  validate_run_config(c, *sc);
  const fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + c.out + "': " + ec.message());
  switch (c.analysis) {
    case Analysis::Simulate: return simulate(c, *sc, dir);
    case Analysis::Stable: return stable(c, *sc, dir);
    case Analysis::Dynamics: return dynamics(c, *sc, dir);
    case Analysis::GraphCheck: return graph(c, *sc, dir);
    case Analysis::CalibrateOracle: return oracle(c, *sc, dir);
  }
  return 1;
}

int report(const Error& e) {
  std::cerr << "error code=" << to_string(e.code()) << " message=" << e.what() << '\n';
  return is_numeric_failure(e.code()) ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assumption-based learning simulator"};
  app.require_subcommand(1);
  Overrides o;
  auto* run = app.add_subcommand("run", "run one analysis");
  run->add_option("--config", o.config, "JSON run config");
  run->add_option("--scenario", o.scenario, "scenario name");
  run->add_option("--analysis", o.analysis, "simulate | stable | dynamics | graph-check | calibrate-oracle");
  run->add_option("--seed", o.seed, "master seed");
  run->add_option("--k", o.k, "gate threshold, or inf");
  run->add_option("--horizon", o.horizon, "periods per replication");
  run->add_option("--replications", o.replications, "replications");
  run->add_option("--mode", o.mode, "assumption-based | misspecified-bayesian | correct-bayesian");
  run->add_option("--omega-star", o.omega_star, "comma-separated true parameters");
  run->add_option("--out", o.out, "output directory");

  std::string defaults_out;
  auto* defaults = app.add_subcommand("defaults", "print the config reference");
  defaults->add_option("--out", defaults_out, "write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error code=ConfigError message=" << e.what() << '\n';
    return 1;
  }

  try {
    if (*defaults) {
      const std::string text = defaults_reference();
      if (defaults_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(defaults_out, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + defaults_out + "'");
        out << text;
      }
      return 0;
    }
    return run_command(o);
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error code=Internal message=" << e.what() << '\n';
    return 2;
  }
}
