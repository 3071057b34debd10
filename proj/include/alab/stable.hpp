#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "alab/engine.hpp"
#include "alab/scenarios.hpp"

namespace alab {

/// KL of the region-mixed true predictive from the assumed predictive at omega'
/// (active coordinates). Throws ZeroMassRegion for a null region.
double berk_objective(const Scenario& scenario, const Eigen::VectorXd& omega_prime, const TrueState& truth,
                      const ThetaRegion& region);

/// Research region of a belief: [0, theta_bar] when the divergence is monotone,
/// else the set of 201 grid points where the gate passes.
ThetaRegion induced_region(const Scenario& scenario, const BeliefState& belief, double K,
                           const FDivergenceSpec& spec = FDivergenceSpec::kl());

/// argmin of the objective over the active box.
Eigen::VectorXd berk_minimizer(const Scenario& scenario, const TrueState& truth, const ThetaRegion& region);

/// Self-consistency map: omega_hat -> argmin over the region its point belief induces.
Eigen::VectorXd stable_map(const Scenario& scenario, const TrueState& truth, double K, const Eigen::VectorXd& omega_hat,
                           const FDivergenceSpec& spec = FDivergenceSpec::kl());

struct StableOptions {
  int starts = 32;
  double tolerance = 1e-12;
  int max_iterations = 10000;
  int scan_points = 201;  // scalar case: sign scan of map(x) - x; 0 skips it
  std::uint64_t seed = 11;
  int threads = 0;
  FDivergenceSpec divergence = FDivergenceSpec::kl();
};

struct StableCandidate {
  Eigen::VectorXd omega_hat;  // active coordinates
  ThetaRegion region;
  double objective = 0.0;
  double residual = 0.0;               // |map(x) - x|, max norm
  std::optional<double> slope;         // scalar case
  bool attracting = false;
  std::string classification;          // "slope" or "iteration"
  int starts_converged = 0;
};

struct StartOutcome {
  Eigen::VectorXd start, end;
  int iterations = 0;
  bool converged = false;
  std::string error;  // NoConvergence and friends, reported per start
};

struct StableBeliefReport {
  std::vector<StableCandidate> candidates;
  std::vector<StartOutcome> starts;
  double K = 0.0;
  int attracting_count() const;
};

/// Fixed points of the self-consistency map. Empty `starts` means a
/// Latin-hypercube design over the active box.
StableBeliefReport solve_stable(const Scenario& scenario, const TrueState& truth, double K,
                                const std::vector<Eigen::VectorXd>& starts = {}, const StableOptions& options = {});

struct CertitudeSummary {
  std::vector<Eigen::VectorXd> bias;  // per candidate, question coordinates
  std::vector<char> biased;
  bool every_attractor_biased = false;
};
CertitudeSummary certitude_report(const Scenario& scenario, const StableBeliefReport& report, const TrueState& truth,
                                  double tolerance);

/// Share of the given true states whose every attracting candidate is biased.
double certitude_fraction(const Scenario& scenario, double K, const std::vector<TrueState>& states, double tolerance,
                          const StableOptions& options = {});

struct BasinEstimate {
  std::vector<double> frequency;  // per candidate
  double unclassified = 0.0;
  std::vector<Eigen::VectorXd> terminal_means;  // active coordinates per replication
};

/// Long engine runs; each terminal mean goes to the nearest attracting
/// candidate within `radius`.
BasinEstimate simulate_convergence(const Scenario& scenario, const TrueState& truth, double K,
                                   const StableBeliefReport& report, int replications, int horizon,
                                   std::uint64_t seed, std::function<BeliefState(int)> prior = {},
                                   LearnerMode mode = LearnerMode::AssumptionBased, double radius = 0.05);

/// Prior shifted toward a replication-specific centre on the first active
/// coordinate; centres spread evenly across its range.
BeliefState dispersed_prior(const Scenario& scenario, int replication, int replications, double spread = 0.08);

}  // namespace alab
