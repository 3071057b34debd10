#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "alab/distributions.hpp"

namespace alab {

/// Gaussian belief over omega with full covariance. Frozen coordinates get zero
/// Kalman gain, so their marginal never moves.
class GaussianBelief {
 public:
  GaussianBelief() = default;
  GaussianBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance, std::vector<int> frozen = {});
  static GaussianBelief product(const Eigen::VectorXd& mean, const Eigen::VectorXd& variances,
                                std::vector<int> frozen = {});

  Eigen::Index dim() const noexcept { return mean_.size(); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  double mean(Eigen::Index i) const { return mean_[i]; }
  double variance(Eigen::Index i) const { return cov_(i, i); }
  Eigen::VectorXd variances() const { return cov_.diagonal(); }
  const std::vector<int>& frozen() const noexcept { return frozen_; }
  bool is_frozen(int i) const;
  bool is_product(double tol = 0.0) const;

  /// Conjugate update on y = h'omega + offset + e, e ~ N(0, noise_var).
  /// Joseph form, so the zeroed gain on frozen coordinates stays consistent.
  GaussianBelief observe_linear(const Eigen::VectorXd& h, double offset, double y, double noise_var) const;

  /// Mean-field projection: keep means and marginal variances, drop correlations.
  GaussianBelief projected_to_product() const;

  /// Same belief with coordinate i pinned at value with zero variance.
  GaussianBelief with_point(int i, double value) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  std::vector<int> frozen_;
};

/// Beliefs of the selection scenario: independent N(m_i, sigma_i^2), i = 1..3.
struct HeckmanBelief {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d variance = Eigen::Vector3d::Ones();

  void validate() const;
  GaussianBelief to_gaussian() const;
  static HeckmanBelief from_gaussian(const GaussianBelief& belief);
};

/// One block of a grid belief: a dense tensor grid over `coords`, first axis fastest.
class GridBlock {
 public:
  GridBlock(std::vector<int> coords, std::vector<Eigen::VectorXd> axes, Eigen::VectorXd mass);
  /// Independent marginals on each axis; weights need not be normalised.
  static GridBlock product(std::vector<int> coords, std::vector<Eigen::VectorXd> axes,
                           const std::vector<Eigen::VectorXd>& axis_weights);

  const std::vector<int>& coords() const noexcept { return geom_->coords; }
  int rank() const noexcept { return static_cast<int>(geom_->coords.size()); }
  Eigen::Index cells() const noexcept { return mass_.size(); }
  const std::vector<Eigen::VectorXd>& axes() const noexcept { return geom_->axes; }
  /// cells x rank matrix of cell coordinates.
  const Eigen::MatrixXd& points() const noexcept { return geom_->points; }
  const Eigen::VectorXd& mass() const noexcept { return mass_; }
  int local_axis(int coord) const;

  Eigen::VectorXd marginal(int local) const;
  /// Cached at construction.
  double mean(int local) const { return means_[local]; }
  double variance(int local) const { return variances_[local]; }
  /// Probability of lo <= omega <= hi on this block's coordinates.
  double box_probability(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const;

  /// Posterior block: mass * likelihood, renormalised. Throws ZeroLikelihood.
  GridBlock reweighted(const Eigen::Ref<const Eigen::VectorXd>& likelihood) const;
  GridBlock with_mass(Eigen::VectorXd mass) const;

  /// Tensor product of two blocks (this block's axes first).
  GridBlock merged_with(const GridBlock& other) const;

 private:
  struct Geometry {
    std::vector<int> coords;
    std::vector<Eigen::VectorXd> axes;
    Eigen::MatrixXd points;
  };
  GridBlock(std::shared_ptr<const Geometry> geom, Eigen::VectorXd mass);
  static std::shared_ptr<const Geometry> make_geometry(std::vector<int> coords, std::vector<Eigen::VectorXd> axes);

  void cache_moments();

  std::shared_ptr<const Geometry> geom_;
  Eigen::VectorXd mass_;
  Eigen::VectorXd means_, variances_;
};

/// Product of independent grid blocks covering every coordinate exactly once.
class GridBelief {
 public:
  GridBelief(int dim, std::vector<GridBlock> blocks);

  int dim() const noexcept { return dim_; }
  const std::vector<GridBlock>& blocks() const noexcept { return blocks_; }
  const GridBlock& block(int b) const { return blocks_.at(static_cast<std::size_t>(b)); }
  int block_of(int coord) const { return block_index_.at(static_cast<std::size_t>(coord)); }

  double mean(int coord) const;
  double variance(int coord) const;
  Eigen::VectorXd means() const;
  Eigen::VectorXd variances() const;
  double box_probability(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const;

  GridBelief with_block(int b, GridBlock block) const;
  /// Collapses the listed blocks into one tensor-product block.
  GridBelief merged(std::vector<int> block_ids) const;

 private:
  int dim_;
  std::vector<GridBlock> blocks_;
  std::vector<int> block_index_;
};

using BeliefState = std::variant<GaussianBelief, GridBelief>;

Eigen::VectorXd belief_means(const BeliefState& belief);
Eigen::VectorXd belief_sds(const BeliefState& belief);
int belief_dim(const BeliefState& belief);
/// Probability that lo <= omega <= hi componentwise. Gaussian beliefs must be products.
double box_probability(const BeliefState& belief, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
/// Hash of every stored number; equal beliefs hash equal.
std::uint64_t belief_fingerprint(const BeliefState& belief);

/// Region {lo <= omega <= hi}; infinite bounds allowed.
struct ParameterBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  static ParameterBox everything(int dim);
};

/// Observed statistic and (unobserved) latent draw. Missing statistic
/// components are stored as NaN.
struct Sample {
  Eigen::VectorXd s;
  Eigen::VectorXd u;
};

struct HistoryEntry {
  double theta = 0.0;
  int action = 0;
  int assumption = -1;
  Eigen::VectorXd statistic;  // empty iff action == 0
};
using History = std::vector<HistoryEntry>;

// Operations that need the scenario; defined alongside it.
class Scenario;
struct Assumption;
struct PredictiveDistribution;
enum class Space;

BeliefState update_as_if(const BeliefState& belief, const Eigen::VectorXd& statistic, const Scenario& scenario,
                         const Assumption& assumption, double theta);
PredictiveDistribution predictive(const BeliefState& belief, const Scenario& scenario, double theta, Space space);

/// |sum_s p(s | theta, h) mu_{t+1}(E; s) - mu_t(E)|, with the update made as if
/// the scenario's first context assumption held. theta defaults to that assumption.
double martingale_check(const BeliefState& belief, const Scenario& scenario, const ParameterBox& event,
                        std::optional<double> measure_theta = std::nullopt, int bins = 200);

/// Replays a history from a prior under the scenario's assumption menu.
BeliefState replay(const BeliefState& prior, const History& history, const Scenario& scenario);

}  // namespace alab
