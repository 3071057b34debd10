#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "alab/beliefs.hpp"
#include "alab/distributions.hpp"
#include "alab/divergence.hpp"
#include "alab/graph.hpp"

namespace alab {

struct Assumption {
  enum class Kind { Context, FixedParameter };
  enum class ValueRule { Constant, CurrentMean };

  Kind kind = Kind::Context;
  double theta_value = 0.0;  // Context
  int index = -1;            // FixedParameter, 0-based
  ValueRule rule = ValueRule::Constant;
  double value = 0.0;  // Constant rule
  std::string label;

  static Assumption context(double theta, std::string label = "theta*");
  static Assumption fixed_parameter(int index, ValueRule rule, double value = 0.0, std::string label = "");

  bool is_context() const noexcept { return kind == Kind::Context; }
  /// Assumed value of omega_index under the given belief.
  double resolved_value(const BeliefState& belief) const;
};

struct TrueState {
  Eigen::VectorXd omega;
};

/// Union of closed theta intervals inside [0,1].
struct ThetaRegion {
  std::vector<std::pair<double, double>> intervals;

  static ThetaRegion interval(double hi, double lo = 0.0);
  /// Cells of `grid` (midpoint boundaries) whose flag is set.
  static ThetaRegion indicator(const std::vector<double>& grid, const std::vector<char>& inside);

  bool contains(double theta) const;
  double mass(const ContextDistribution& dist) const;
  template <typename F>
  double expect(F&& g, const ContextDistribution& dist) const {
    double acc = 0.0;
    for (const auto& [lo, hi] : intervals) acc += dist.expect_on(g, lo, hi);
    return acc;
  }
  /// E[theta | theta in region]; throws ZeroMassRegion.
  double conditional_mean(const ContextDistribution& dist) const;
  /// Upper end of the last interval.
  double upper() const;
  /// (theta, weight) nodes of the region-conditional law; weights sum to 1.
  std::vector<std::pair<double, double>> conditional_nodes(const ContextDistribution& dist, int per_interval = 32) const;
};

/// Numerical-friendly statement of a scenario's data-generating process, its
/// question, assumption menu, context law and recursive structure.
class Scenario {
 public:
  virtual ~Scenario() = default;

  const std::string& name() const noexcept { return name_; }
  int omega_dim() const noexcept { return static_cast<int>(omega_lo_.size()); }
  int statistic_dim() const noexcept { return statistic_dim_; }
  int latent_dim() const noexcept { return latent_dim_; }
  const std::vector<int>& question() const noexcept { return question_; }
  std::optional<double> theta_star() const noexcept { return theta_star_; }
  const std::vector<Assumption>& assumption_menu() const noexcept { return menu_; }
  const ContextDistribution& context() const noexcept { return context_; }
  const std::optional<DagModel>& dag() const noexcept { return dag_; }
  Space gate_space() const noexcept { return gate_space_; }
  const std::vector<int>& declared_q_star() const noexcept { return q_star_; }
  const Eigen::VectorXd& omega_lo() const noexcept { return omega_lo_; }
  const Eigen::VectorXd& omega_hi() const noexcept { return omega_hi_; }
  bool uses_context() const noexcept { return theta_star_.has_value(); }
  /// Names of the omega coordinates, e.g. "omega1".
  std::string omega_name(int i) const { return "omega" + std::to_string(i + 1); }

  /// Throws UnsupportedSpace when s-and-u is requested without a latent variable.
  void set_gate_space(Space space);
  void set_context(ContextDistribution dist) { context_ = std::move(dist); }

  /// Throws OutOfDomain when omega_star leaves the declared box.
  virtual void validate_true_state(const TrueState& state) const;

  virtual BeliefState prior() const = 0;
  virtual Sample sample(const TrueState& state, double theta, RngStream& stream) const = 0;

  /// Density (or mass) of the observable s at context theta and parameters omega,
  /// with latent variables integrated out.
  virtual double likelihood(const Eigen::VectorXd& s, double theta, const Eigen::VectorXd& omega) const = 0;
  /// Likelihood under an assumption: context assumptions replace theta, fixed-parameter
  /// assumptions replace omega_index by their resolved value.
  double likelihood(const Eigen::VectorXd& s, const Assumption& assumption, const Eigen::VectorXd& omega,
                    double theta, const BeliefState& belief) const;

  virtual PredictiveDistribution predictive(const BeliefState& belief, double theta, Space space) const = 0;

  /// Divergence of the believed predictive at theta from the one implied by the assumption.
  virtual DivergenceEstimate gate_divergence(const BeliefState& belief, double theta, const Assumption& assumption,
                                             const FDivergenceSpec& spec) const = 0;

  /// Bayes update as if the assumption held exactly.
  virtual BeliefState update_as_if(const BeliefState& belief, const Eigen::VectorXd& s, const Assumption& assumption,
                                   double theta) const = 0;
  /// Bayes update with the true context (correctly specified learner).
  virtual BeliefState update_true(const BeliefState& belief, const Eigen::VectorXd& s, double theta) const = 0;

  /// Weighted support points of s under the believed predictive at theta; native
  /// for discrete statistics, binned otherwise.
  virtual std::vector<std::pair<Eigen::VectorXd, double>> discretize(const BeliefState& belief, double theta,
                                                                     int bins) const;

  // Long-run analysis hooks.
  /// Degenerate at omega_hat on the active coordinates, prior elsewhere.
  virtual BeliefState point_belief(const Eigen::VectorXd& omega_hat_active) const;
  /// KL of the region-mixed true predictive from the assumed predictive at omega'.
  virtual double berk_objective(const Eigen::VectorXd& omega_prime_active, const TrueState& state,
                                const ThetaRegion& region) const;
  /// Active coordinates of a belief's mean.
  Eigen::VectorXd active_means(const BeliefState& belief) const;

  // Recursive-structure hooks. Node values are indexed by DAG node.
  virtual double log_conditional(int statistic, const Eigen::VectorXd& node_values) const;
  Eigen::VectorXd node_values(const Sample& sample, double theta, const Eigen::VectorXd& omega) const;
  int statistic_node(int j) const { return stat_nodes_.at(static_cast<std::size_t>(j)); }
  int omega_node(int i) const { return omega_nodes_.at(static_cast<std::size_t>(i)); }

 protected:
  Scenario() = default;
  /// Builds the DAG from per-statistic parent lists (names of nodes).
  void declare_dag(const std::vector<std::vector<std::string>>& statistic_parents);

  std::string name_;
  int statistic_dim_ = 1;
  int latent_dim_ = 0;
  std::vector<int> question_;
  std::optional<double> theta_star_;
  std::vector<Assumption> menu_;
  ContextDistribution context_ = ContextDistribution::uniform01();
  std::optional<DagModel> dag_;
  Space gate_space_ = Space::SOnly;
  std::vector<int> q_star_;
  Eigen::VectorXd omega_lo_, omega_hi_;
  int theta_node_ = -1;
  std::vector<int> latent_nodes_, omega_nodes_, stat_nodes_;
};

// ---------------------------------------------------------------- configs

struct ContaminatedGaussianConfig {
  Eigen::Vector2d prior_mean{0.0, 0.5};
  Eigen::Vector2d prior_variance{1.0, 1.0};
  double omega_bound = 10.0;
};

struct Omega1Prior {
  enum class Kind { Uniform, Beta } kind = Kind::Uniform;
  double a = 1.0, b = 1.0;  // on the rescaled interval [eps, 1 - eps]
};

struct ContaminatedBinaryConfig {
  double epsilon = 0.05;
  int resolution = 400;
  Omega1Prior omega1_prior;
};

enum class Normalization { AtAssumption, PerContext };

struct ConfoundedCausalConfig {
  double omega3 = 0.5;
  double bound = 0.6;
  int resolution = 201;
  Normalization normalization = Normalization::AtAssumption;
  int mc_draws = 2048;
  std::uint64_t mc_seed = 0xC0FFEEULL;
};

struct InstrumentalVariablesConfig {
  double bound = 0.5;
  int instrument_resolution = 201;
  int structural_resolution = 11;
  Normalization normalization = Normalization::AtAssumption;
  int mc_draws = 2048;
  std::uint64_t mc_seed = 0xC0FFEEULL;
};

struct CalibrationConfig {
  Eigen::Vector2d prior_mean{0.0, 0.0};
  double prior_variance = 1.0;  // v
  double omega_bound = 10.0;
};

struct HeckmanSelectionConfig {
  Eigen::Vector3d prior_mean{0.0, 0.0, 0.0};
  Eigen::Vector3d prior_variance{1.0, 1.0, 1.0};
  double outcome_noise_variance = 1.0;
  bool selection_noise = false;  // selective branch uses s2 + u + nu, nu ~ N(0,1)
  double omega_bound = 10.0;
};

std::unique_ptr<Scenario> make_contaminated_gaussian(const ContaminatedGaussianConfig& config = {});
std::unique_ptr<Scenario> make_contaminated_binary(const ContaminatedBinaryConfig& config = {});
std::unique_ptr<Scenario> make_confounded_causal(const ConfoundedCausalConfig& config = {});
std::unique_ptr<Scenario> make_instrumental_variables(const InstrumentalVariablesConfig& config = {});
std::unique_ptr<Scenario> make_calibration(const CalibrationConfig& config = {});
std::unique_ptr<Scenario> make_heckman_selection(const HeckmanSelectionConfig& config = {});
/// Contaminated experiment with the friction coefficient fixed at zero: one parameter, all active.
std::unique_ptr<Scenario> make_degenerate_contaminated();

/// Built-in scenario by name with default configuration.
std::unique_ptr<Scenario> make_scenario(const std::string& name);
const std::vector<std::string>& scenario_names();

// ---------------------------------------------------------------- validation

/// Declared active set after numeric probing; throws QStarMismatch.
std::vector<int> active_parameters(const Scenario& scenario, std::uint64_t seed = 1);

struct RegularityReport {
  bool proper_subset = false;         // (i)
  bool divergence_increasing = false; // (ii)
  bool sensitive = false;             // (iii)
  bool regular() const { return proper_subset && divergence_increasing && sensitive; }
};
RegularityReport regularity_check(const Scenario& scenario, int probes, std::uint64_t seed = 2);

/// Total-variation distance between p_S(.|theta*, a) and p_S(.|theta*, b), Monte Carlo.
double predictive_tv_distance(const Scenario& scenario, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              int draws = 4000, std::uint64_t seed = 3);

/// Checks that every statistic's conditional ignores its declared non-parents.
/// Returns the offending (statistic node, other node) pairs.
std::vector<std::pair<int, int>> dag_violations(const Scenario& scenario, int probes = 20, std::uint64_t seed = 4);

/// Random beliefs reachable by as-if updating from the prior (history of `length` draws).
BeliefState random_history_belief(const Scenario& scenario, const TrueState& state, int length, RngStream& stream);

}  // namespace alab
