#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "alab/beliefs.hpp"
#include "alab/divergence.hpp"
#include "alab/scenarios.hpp"

namespace alab {

enum class LearnerMode { AssumptionBased, MisspecifiedBayesian, CorrectBayesian };
const char* to_string(LearnerMode mode) noexcept;
LearnerMode parse_mode(const std::string& text);

inline constexpr double kInfiniteK = std::numeric_limits<double>::infinity();

struct GateDecision {
  std::optional<int> chosen;        // menu index; empty means pass (a = 0)
  std::vector<double> divergences;  // one per menu assumption
  double K = 0.0;
  bool research() const noexcept { return chosen.has_value(); }
};

/// Research iff the smallest divergence is at most K; ties go to menu order.
GateDecision gate(const BeliefState& belief, const Scenario& scenario, double theta, double K,
                  const FDivergenceSpec& spec = FDivergenceSpec::kl());

/// Largest theta with divergence(theta) <= K for one menu assumption; bisection
/// to 1e-10. Throws NonMonotone when a 101-point probe finds a decrease.
double theta_bar(const BeliefState& belief, const Scenario& scenario, double K,
                 const FDivergenceSpec& spec = FDivergenceSpec::kl(), int assumption = 0);

struct TraceRow {
  int t = 0;
  double theta = 0.0;
  int action = 0;
  int assumption = -1;
  std::vector<double> divergences;  // NaN when the gate was not evaluated
  Eigen::VectorXd s;                // NaN-filled on a = 0
  Eigen::VectorXd means, sds;       // belief after the period
  double theta_bar = std::numeric_limits<double>::quiet_NaN();  // governs this period's decision
};

struct Trace {
  std::string scenario;
  std::uint64_t seed = 0;
  int replication = 0;
  double K = 0.0;
  LearnerMode mode = LearnerMode::AssumptionBased;
  std::vector<TraceRow> rows;
  History history;
  BeliefState final_belief;
  int research_periods = 0;
};

struct RunOptions {
  double K = 0.1;
  int horizon = 5000;
  int replications = 200;
  LearnerMode mode = LearnerMode::AssumptionBased;
  std::uint64_t seed = 1;
  FDivergenceSpec divergence = FDivergenceSpec::kl();
  bool record_rows = true;
  bool keep_history = false;
  /// Defaults to on for the contaminated scenarios in assumption-based mode.
  std::optional<bool> track_theta_bar;
  /// 0: hardware concurrency, capped by ASSUMPTION_LAB_THREADS.
  int threads = 0;
  /// Starting belief per replication; scenario prior when empty.
  std::function<BeliefState(int replication)> prior;
};

/// Worker count after the environment cap.
int worker_count(int requested);

/// One period: draw theta, decide, sample on research, update.
struct StepState {
  BeliefState belief;
  std::optional<double> theta_bar;  // cached; cleared when the belief changes
};
TraceRow step(StepState& state, const Scenario& scenario, const TrueState& truth, const RunOptions& options, int t,
              RngStream& period_stream, HistoryEntry* history_out = nullptr);

Trace run_replication(const Scenario& scenario, const TrueState& truth, const RunOptions& options, int replication);
/// Replications [first, first + count) in parallel; result order follows replication index.
std::vector<Trace> run_range(const Scenario& scenario, const TrueState& truth, const RunOptions& options, int first,
                             int count);
std::vector<Trace> run(const Scenario& scenario, const TrueState& truth, const RunOptions& options);

/// Parallel map over indices with the engine's worker count.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

struct PropensityReport {
  int replications = 0;
  long expansions = 0;
  long contractions = 0;
  /// Replications whose last expansion is never followed by a contraction.
  std::vector<int> unreversed_expansion;
  std::vector<double> mean_theta_bar;      // per period, over replications with a value
  std::vector<double> research_frequency;  // per period
};
PropensityReport propensity_dynamics_report(const std::vector<Trace>& traces, double tol = 1e-12);

enum class Parity { Odd, Even };
/// Calibration update: assume the smaller-variance parameter at its mean and
/// update the other; on equal variances odd periods update omega1.
GaussianBelief calibration_step(const GaussianBelief& belief, double s, Parity parity);

/// Selection-model gate: divergences {R, S} in menu order (random entry, exclusion).
GateDecision heckman_decide(const HeckmanBelief& belief, double theta, double K);

struct HeckmanThresholds {
  double theta_rd = 0.0;  // random-entry assumption on [0, theta_rd)
  double theta_s = 0.0;   // exclusion assumption on (theta_s, 1]
  double crossing = 0.0;  // R = S
};
HeckmanThresholds heckman_thresholds(const HeckmanBelief& belief, double K);

}  // namespace alab
