#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alab/engine.hpp"
#include "alab/graph.hpp"
#include "alab/scenarios.hpp"
#include "alab/stable.hpp"

namespace alab {

inline constexpr int kSchemaVersion = 1;

enum class Analysis { Simulate, Stable, Dynamics, GraphCheck, CalibrateOracle };
const char* to_string(Analysis a) noexcept;
Analysis parse_analysis(const std::string& text);

struct StableSettings {
  int starts = 32;
  int scan_points = 201;   // scalar case repeller scan; 0 skips it
  int replications = 200;  // simulate_convergence; 0 skips it
  int horizon = 2000;
  bool dispersed_priors = true;
  double radius = 0.05;
  double certitude_tolerance = 1e-3;
};

struct OracleSettings {
  int probes = 5;
  int draws = 200000;
};

struct GraphSettings {
  std::string file;                 // empty: the scenario's own DAG
  std::vector<std::string> q_star;  // node names; scenario's active set when empty
};

struct RunConfig {
  std::string scenario = "contaminated-gaussian";
  Analysis analysis = Analysis::Simulate;
  std::uint64_t seed = 1;
  std::optional<double> K;  // scenario default when empty; "inf" allowed
  int horizon = 5000;
  int replications = 200;
  LearnerMode mode = LearnerMode::AssumptionBased;
  std::optional<Eigen::VectorXd> omega_star;
  std::optional<Space> gate_space;
  std::string divergence = "kl";
  std::optional<ContextDistribution> context;
  nlohmann::json scenario_config = nlohmann::json::object();
  bool record_rows = true;
  int threads = 0;
  StableSettings stable;
  OracleSettings oracle;
  GraphSettings graph;
  std::string out = "out";
};

/// Strict: unknown keys and wrong types raise ConfigError naming the field.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

/// Scenario with config overrides applied (parameters, context, gate space).
std::unique_ptr<Scenario> build_scenario(const RunConfig& config);
TrueState default_true_state(const std::string& scenario);
double default_K(const std::string& scenario);
double effective_K(const RunConfig& config);
TrueState effective_true_state(const RunConfig& config);
/// Full pre-run validation; throws before any computation.
void validate_run_config(const RunConfig& config, const Scenario& scenario);

/// kl, reverse-kl, squared-hellinger, chi-squared.
FDivergenceSpec divergence_by_name(const std::string& name);
const std::vector<std::string>& divergence_names();

Space parse_space(const std::string& text);
Normalization parse_normalization(const std::string& text);

/// Markdown reference of every config key and its default.
std::string defaults_reference();

// ---------------------------------------------------------------- outputs

/// Streams trace rows; columns are fixed by the scenario.
class TraceCsvWriter {
 public:
  TraceCsvWriter(std::ostream& out, const Scenario& scenario);
  void write(const Trace& trace);

 private:
  std::ostream& out_;
  int menu_, stats_, omega_;
};
std::string trace_csv_header(const Scenario& scenario);
/// 17 significant digits; nan and inf spelled out.
std::string format_number(double x);

struct ReplicationSummary {
  int replication = 0;
  int research_periods = 0;
  Eigen::VectorXd final_means, final_sds;
};
ReplicationSummary summarize(const Trace& trace);

nlohmann::json summary_json(const RunConfig& config, const Scenario& scenario,
                            const std::vector<ReplicationSummary>& replications);
/// Checks keys and types of a summary document; throws ConfigError.
void validate_summary(const nlohmann::json& summary);

nlohmann::json stable_report_json(const Scenario& scenario, const StableBeliefReport& report,
                                  const CertitudeSummary& certitude, const std::optional<BasinEstimate>& basin);
nlohmann::json propensity_report_json(const PropensityReport& report);
nlohmann::json envelope(const RunConfig& config, const std::string& kind, nlohmann::json body);

void write_json(const std::string& path, const nlohmann::json& j);

// ---------------------------------------------------------------- graph check

struct GraphCheck {
  DagModel graph;
  std::vector<int> q_star;
  std::vector<int> i_set;
  GSeparability verdict;
};
GraphCheck graph_check(const RunConfig& config, const Scenario& scenario);
nlohmann::json graph_report_json(const GraphCheck& check);

// ---------------------------------------------------------------- oracle check

struct OracleRow {
  std::string label;
  double theta = 0.0;
  double value = 0.0;      // scenario gate divergence
  double oracle = 0.0;     // independent numeric evaluation
  double std_error = 0.0;  // of the oracle (Monte Carlo only)
  double tolerance = 0.0;
  bool pass = false;
};
struct OracleReport {
  std::string scenario;
  std::vector<OracleRow> rows;
  bool all_pass() const;
};
/// Gate divergences at random beliefs against quadrature, exact sums or
/// Monte Carlo over the full predictive densities.
OracleReport calibrate_oracle(const Scenario& scenario, const OracleSettings& settings, std::uint64_t seed);
nlohmann::json oracle_report_json(const OracleReport& report);

}  // namespace alab
