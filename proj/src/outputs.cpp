#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "alab/io.hpp"

namespace alab {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::vector<std::string> divergence_columns(const Scenario& sc) {
  const auto& menu = sc.assumption_menu();
  if (menu.size() == 1) return {"divergence"};
  std::vector<std::string> out;
  for (std::size_t k = 0; k < menu.size(); ++k) out.push_back("divergence_" + std::to_string(k + 1));
  return out;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(finite_or_null(v[i]));
  return a;
}

json vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(finite_or_null(x));
  return a;
}

json region_json(const ThetaRegion& r) {
  json a = json::array();
  for (const auto& [lo, hi] : r.intervals) a.push_back({lo, hi});
  return a;
}

}  // namespace

std::string trace_csv_header(const Scenario& sc) {
  std::string h = "replication,t,theta,action,assumption";
  for (const auto& c : divergence_columns(sc)) h += "," + c;
  for (int j = 0; j < sc.statistic_dim(); ++j) h += ",s" + std::to_string(j + 1);
  for (int i = 0; i < sc.omega_dim(); ++i) h += ",mean_" + sc.omega_name(i);
  for (int i = 0; i < sc.omega_dim(); ++i) h += ",sd_" + sc.omega_name(i);
  h += ",theta_bar";
  return h;
}

TraceCsvWriter::TraceCsvWriter(std::ostream& out, const Scenario& sc)
    : out_(out),
      menu_(static_cast<int>(sc.assumption_menu().size())),
      stats_(sc.statistic_dim()),
      omega_(sc.omega_dim()) {
  out_ << trace_csv_header(sc) << '\n';
}

void TraceCsvWriter::write(const Trace& trace) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::string line;
  for (const TraceRow& r : trace.rows) {
    line.clear();
    line += std::to_string(trace.replication);
    line += ',' + std::to_string(r.t);
    line += ',' + format_number(r.theta);
    line += ',' + std::to_string(r.action);
    line += ',' + std::to_string(r.assumption);
    for (int k = 0; k < menu_; ++k)
      line += ',' + format_number(static_cast<std::size_t>(k) < r.divergences.size() ? r.divergences[static_cast<std::size_t>(k)] : nan);
    for (int j = 0; j < stats_; ++j) line += ',' + format_number(j < r.s.size() ? r.s[j] : nan);
    for (int i = 0; i < omega_; ++i) line += ',' + format_number(r.means[i]);
    for (int i = 0; i < omega_; ++i) line += ',' + format_number(r.sds[i]);
    line += ',' + format_number(r.theta_bar);
    out_ << line << '\n';
  }
  if (!out_) throw Error(ErrorCode::IoError, "writing trace rows failed");
}

ReplicationSummary summarize(const Trace& trace) {
  ReplicationSummary s;
  s.replication = trace.replication;
  s.research_periods = trace.research_periods;
  s.final_means = belief_means(trace.final_belief);
  s.final_sds = belief_sds(trace.final_belief);
  return s;
}

json summary_json(const RunConfig& c, const Scenario& sc, const std::vector<ReplicationSummary>& reps) {
  const int n = static_cast<int>(reps.size());
  const int d = sc.omega_dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  double research = 0.0;
  json per = json::array();
  for (const auto& r : reps) {
    mean += r.final_means;
    sq += r.final_means.cwiseProduct(r.final_means);
    research += static_cast<double>(r.research_periods) / c.horizon;
    per.push_back({{"replication", r.replication},
                   {"research_periods", r.research_periods},
                   {"final_means", vec(r.final_means)},
                   {"final_sds", vec(r.final_sds)}});
  }
  Eigen::VectorXd se = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::quiet_NaN());
  if (n > 0) {
    mean /= n;
    if (n > 1) se = ((sq / n - mean.cwiseProduct(mean)).cwiseMax(0.0) * n / (n - 1.0) / n).cwiseSqrt();
    research /= n;
  } else {
    mean.setConstant(std::numeric_limits<double>::quiet_NaN());
    research = std::numeric_limits<double>::quiet_NaN();
  }
  const TrueState truth = effective_true_state(c);
  return envelope(c, "summary",
                  {{"omega_star", vec(truth.omega)},
                   {"K_effective", effective_K(c) == kInfiniteK ? json("inf") : json(effective_K(c))},
                   {"metrics",
                    {{"replications", n},
                     {"mean_research_frequency", finite_or_null(research)},
                     {"mean_terminal_means", vec(mean)},
                     {"terminal_mean_standard_errors", vec(se)}}},
                   {"replication_results", per}});
}

json envelope(const RunConfig& c, const std::string& kind, json body) {
  json j = {{"schema_version", kSchemaVersion}, {"kind", kind}, {"config", to_json(c)}};
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  return j;
}

void validate_summary(const json& j) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::ConfigError, "summary: " + what);
  };
  auto numeric_array = [](const json& a, std::size_t n) {
    if (!a.is_array() || a.size() != n) return false;
    for (const auto& x : a)
      if (!x.is_number() && !x.is_null()) return false;
    return true;
  };
  need(j.is_object(), "expected an object");
  need(j.contains("schema_version") && j["schema_version"] == kSchemaVersion, "schema_version mismatch");
  need(j.contains("kind") && j["kind"] == "summary", "kind must be summary");
  need(j.contains("config") && j["config"].is_object(), "config missing");
  // the embedded config must itself parse
  parse_run_config(j["config"]);
  need(j.contains("omega_star") && j["omega_star"].is_array(), "omega_star missing");
  const std::size_t d = j["omega_star"].size();
  need(j.contains("K_effective") && (j["K_effective"].is_number() || j["K_effective"] == "inf"), "K_effective");
  need(j.contains("metrics") && j["metrics"].is_object(), "metrics missing");
  const json& m = j["metrics"];
  need(m.contains("replications") && m["replications"].is_number_integer(), "metrics.replications");
  need(m.contains("mean_research_frequency") &&
           (m["mean_research_frequency"].is_number() || m["mean_research_frequency"].is_null()),
       "metrics.mean_research_frequency");
  need(m.contains("mean_terminal_means") && numeric_array(m["mean_terminal_means"], d), "metrics.mean_terminal_means");
  need(m.contains("terminal_mean_standard_errors") && numeric_array(m["terminal_mean_standard_errors"], d),
       "metrics.terminal_mean_standard_errors");
  need(j.contains("replication_results") && j["replication_results"].is_array(), "replication_results missing");
  need(j["replication_results"].size() == m["replications"].get<std::size_t>(), "replication count mismatch");
  for (const auto& r : j["replication_results"]) {
    need(r.is_object() && r.contains("replication") && r["replication"].is_number_integer(), "replication index");
    need(r.contains("research_periods") && r["research_periods"].is_number_integer(), "research_periods");
    need(r.contains("final_means") && numeric_array(r["final_means"], d), "final_means");
    need(r.contains("final_sds") && numeric_array(r["final_sds"], d), "final_sds");
  }
}

json stable_report_json(const Scenario& sc, const StableBeliefReport& rep, const CertitudeSummary& cert,
                        const std::optional<BasinEstimate>& basin) {
  json cands = json::array();
  for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
    const auto& c = rep.candidates[i];
    json e = {{"omega_hat", vec(c.omega_hat)},
              {"region", region_json(c.region)},
              {"objective", finite_or_null(c.objective)},
              {"residual", c.residual},
              {"slope", c.slope ? json(*c.slope) : json(nullptr)},
              {"attracting", c.attracting},
              {"classification", c.classification},
              {"starts_converged", c.starts_converged}};
    if (i < cert.bias.size()) {
      e["question_bias"] = vec(cert.bias[i]);
      e["biased"] = cert.biased[i] != 0;
    }
    if (basin && i < basin->frequency.size()) e["basin_frequency"] = basin->frequency[i];
    cands.push_back(e);
  }
  int failed = 0;
  for (const auto& s : rep.starts) failed += s.converged ? 0 : 1;
  json j = {{"scenario", sc.name()},
            {"K", rep.K == kInfiniteK ? json("inf") : json(rep.K)},
            {"candidates", cands},
            {"attracting_count", rep.attracting_count()},
            {"starts", rep.starts.size()},
            {"starts_failed", failed},
            {"every_attractor_biased", cert.every_attractor_biased}};
  if (basin) j["unclassified_frequency"] = basin->unclassified;
  return j;
}

json propensity_report_json(const PropensityReport& r) {
  return {{"replications", r.replications},
          {"expansions", r.expansions},
          {"contractions", r.contractions},
          {"unreversed_expansion", r.unreversed_expansion},
          {"mean_theta_bar", vec(r.mean_theta_bar)},
          {"research_frequency", vec(r.research_frequency)}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "writing '" + path + "' failed");
}

GraphCheck graph_check(const RunConfig& c, const Scenario& sc) {
  GraphCheck out;
  if (!c.graph.file.empty()) {
    std::ifstream in(c.graph.file);
    if (!in) throw Error(ErrorCode::ConfigError, "graph.file: cannot open '" + c.graph.file + "'");
    std::stringstream text;
    text << in.rdbuf();
    try {
      out.graph = parse_graph(text.str());
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("graph.file: ") + e.what());
    }
  } else {
    if (!sc.dag()) throw Error(ErrorCode::ConfigError, "analysis: " + sc.name() + " declares no recursive structure");
    out.graph = *sc.dag();
  }
  if (!c.graph.q_star.empty()) {
    for (const auto& n : c.graph.q_star) {
      if (!out.graph.has_node(n)) throw Error(ErrorCode::ConfigError, "graph.q_star: unknown node '" + n + "'");
      out.q_star.push_back(out.graph.index(n));
    }
  } else {
    for (int i : sc.declared_q_star()) {
      const std::string n = sc.omega_name(i);
      if (!out.graph.has_node(n))
        throw Error(ErrorCode::ConfigError, "graph.q_star: the graph has no node '" + n + "'; list q_star explicitly");
      out.q_star.push_back(out.graph.index(n));
    }
  }
  try {
    out.i_set = i_set(out.graph);
    out.verdict = g_separable(out.graph, out.q_star);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidQStar || e.code() == ErrorCode::CyclicInput)
      throw Error(ErrorCode::ConfigError, std::string("graph: ") + e.what());
    throw;
  }
  return out;
}

json graph_report_json(const GraphCheck& g) {
  std::vector<std::string> q, is;
  for (int v : g.q_star) q.push_back(g.graph.name(v));
  for (int v : g.i_set) is.push_back(g.graph.name(v));
  json edges = json::array();
  for (const auto& [a, b] : g.graph.edges()) edges.push_back({g.graph.name(a), g.graph.name(b)});
  return {{"g_separable", g.verdict.separable},
          {"witness", g.verdict.witness ? json(g.graph.name(*g.verdict.witness)) : json(nullptr)},
          {"q_star", q},
          {"i_set", is},
          {"graph", format_graph(g.graph)},
          {"edges", edges}};
}

bool OracleReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return !rows.empty();
}

json oracle_report_json(const OracleReport& r) {
  json rows = json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"label", x.label},
                    {"theta", x.theta},
                    {"value", x.value},
                    {"oracle", x.oracle},
                    {"std_error", x.std_error},
                    {"tolerance", x.tolerance},
                    {"pass", x.pass}});
  return {{"scenario", r.scenario}, {"rows", rows}, {"all_pass", r.all_pass()}};
}

}  // namespace alab
