// Contaminated experiment: s = omega1 + theta * omega2 + e with Gaussian noise,
// and its binary cousin with P(s = 1) = (1 - theta) omega1 + theta omega2.
#include <cmath>

#include "alab/scenarios.hpp"

namespace alab {
namespace {

const Assumption& require_context(const Assumption& a, const std::string& who) {
  if (!a.is_context()) throw Error(ErrorCode::InvalidParameter, who + " only supports context assumptions");
  return a;
}

void check_theta(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "theta outside [0,1]");
}

class ContaminatedGaussian final : public Scenario {
 public:
  ContaminatedGaussian(const ContaminatedGaussianConfig& cfg, bool degenerate) : cfg_(cfg), degenerate_(degenerate) {
    for (int i = 0; i < 2; ++i)
      if (!(cfg.prior_variance[i] > 0.0)) throw Error(ErrorCode::InvalidVariance, "prior variances must be positive");
    if (!(cfg.omega_bound > 0.0)) throw Error(ErrorCode::InvalidParameter, "omega_bound must be positive");
    name_ = degenerate ? "contaminated-degenerate" : "contaminated-gaussian";
    const int dim = degenerate ? 1 : 2;
    omega_lo_ = Eigen::VectorXd::Constant(dim, -cfg.omega_bound);
    omega_hi_ = Eigen::VectorXd::Constant(dim, cfg.omega_bound);
    question_ = {0};
    q_star_ = {0};
    theta_star_ = 0.0;
    menu_ = {Assumption::context(0.0, "theta*=0")};
    statistic_dim_ = 1;
    if (degenerate) declare_dag({{"omega1"}});
    else declare_dag({{"theta", "omega1", "omega2"}});
  }

  BeliefState prior() const override {
    if (degenerate_)
      return GaussianBelief::product(Eigen::VectorXd::Constant(1, cfg_.prior_mean[0]),
                                     Eigen::VectorXd::Constant(1, cfg_.prior_variance[0]));
    return GaussianBelief::product(cfg_.prior_mean, cfg_.prior_variance, {1});
  }

  double mean_of(double theta, const Eigen::VectorXd& w) const { return degenerate_ ? w[0] : w[0] + theta * w[1]; }

  Sample sample(const TrueState& st, double theta, RngStream& rng) const override {
    check_theta(theta);
    return {Eigen::VectorXd::Constant(1, mean_of(theta, st.omega) + rng.standard_normal()), Eigen::VectorXd()};
  }

  double likelihood(const Eigen::VectorXd& s, double theta, const Eigen::VectorXd& w) const override {
    return std_normal_pdf(s[0] - mean_of(theta, w));
  }

  Eigen::VectorXd h(double theta) const {
    if (degenerate_) return Eigen::VectorXd::Ones(1);
    return Eigen::Vector2d(1.0, theta);
  }

  Gaussian1D predictive_gaussian(const GaussianBelief& b, double theta) const {
    const Eigen::VectorXd hv = h(theta);
    return Gaussian1D(hv.dot(b.mean()), 1.0 + hv.dot(b.covariance() * hv));
  }

  PredictiveDistribution predictive(const BeliefState& belief, double theta, Space space) const override {
    check_theta(theta);
    if (space == Space::SAndU) throw Error(ErrorCode::UnsupportedSpace, name_ + " has no latent variable");
    return {predictive_gaussian(std::get<GaussianBelief>(belief), theta), Space::SOnly};
  }

  DivergenceEstimate gate_divergence(const BeliefState& belief, double theta, const Assumption& a,
                                     const FDivergenceSpec& spec) const override {
    check_theta(theta);
    const auto& b = std::get<GaussianBelief>(belief);
    PredictiveDistribution m{predictive_gaussian(b, theta), Space::SOnly};
    PredictiveDistribution ms{predictive_gaussian(b, require_context(a, name_).theta_value), Space::SOnly};
    return f_divergence_estimate(m, ms, spec);
  }

  BeliefState update_as_if(const BeliefState& belief, const Eigen::VectorXd& s, const Assumption& a,
                           double) const override {
    return std::get<GaussianBelief>(belief).observe_linear(h(require_context(a, name_).theta_value), 0.0, s[0], 1.0);
  }

  BeliefState update_true(const BeliefState& belief, const Eigen::VectorXd& s, double theta) const override {
    const auto& b = std::get<GaussianBelief>(belief);
    return GaussianBelief(b.mean(), b.covariance()).observe_linear(h(theta), 0.0, s[0], 1.0);
  }

  std::vector<std::pair<Eigen::VectorXd, double>> discretize(const BeliefState& belief, double theta,
                                                             int bins) const override {
    if (bins < 2) throw Error(ErrorCode::InvalidParameter, "need at least two bins");
    const Gaussian1D g = predictive_gaussian(std::get<GaussianBelief>(belief), theta);
    const double sd = g.sd(), lo = g.mean - 8.0 * sd, width = 16.0 * sd / bins;
    std::vector<std::pair<Eigen::VectorXd, double>> out;
    double total = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double a = lo + k * width;
      const double p = std_normal_cdf((a + width - g.mean) / sd) - std_normal_cdf((a - g.mean) / sd);
      out.emplace_back(Eigen::VectorXd::Constant(1, a + 0.5 * width), p);
      total += p;
    }
    for (auto& o : out) o.second /= total;
    return out;
  }

  BeliefState point_belief(const Eigen::VectorXd& hat) const override {
    GaussianBelief b = std::get<GaussianBelief>(prior());
    return b.with_point(0, hat[0]);
  }

  double berk_objective(const Eigen::VectorXd& wp, const TrueState& st, const ThetaRegion& region) const override {
    GaussianMixturePredictive mix;
    std::vector<double> w;
    for (const auto& [theta, weight] : region.conditional_nodes(context_)) {
      mix.components.emplace_back(mean_of(theta, st.omega), 1.0);
      w.push_back(weight);
    }
    mix.weights = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    const Eigen::VectorXd full = degenerate_ ? Eigen::VectorXd(wp) : Eigen::VectorXd(Eigen::Vector2d(wp[0], cfg_.prior_mean[1]));
    static const QuadratureRule rule = QuadratureRule::gauss_hermite(32);
    DivergenceOptions opt;
    opt.hermite = &rule;
    return f_divergence(PredictiveDistribution{mix, Space::SOnly},
                        PredictiveDistribution{Gaussian1D(mean_of(*theta_star_, full), 1.0), Space::SOnly},
                        FDivergenceSpec::kl(), opt);
  }

  double log_conditional(int, const Eigen::VectorXd& x) const override {
    const double s = x[statistic_node(0)];
    const double mean = degenerate_ ? x[omega_node(0)] : x[omega_node(0)] + x[theta_node_] * x[omega_node(1)];
    return Gaussian1D(mean, 1.0).log_pdf(s);
  }

 private:
  ContaminatedGaussianConfig cfg_;
  bool degenerate_;
};

class ContaminatedBinary final : public Scenario {
 public:
  explicit ContaminatedBinary(const ContaminatedBinaryConfig& cfg) : cfg_(cfg) {
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 0.5)) throw Error(ErrorCode::InvalidParameter, "epsilon must lie in (0, 1/2)");
    if (cfg.resolution < 2) throw Error(ErrorCode::InvalidParameter, "grid resolution must be at least 2");
    if (cfg.omega1_prior.kind == Omega1Prior::Kind::Beta && !(cfg.omega1_prior.a > 0.0 && cfg.omega1_prior.b > 0.0))
      throw Error(ErrorCode::InvalidParameter, "beta prior parameters must be positive");
    name_ = "contaminated-binary";
    omega_lo_ = Eigen::VectorXd::Constant(2, cfg.epsilon);
    omega_hi_ = Eigen::VectorXd::Constant(2, 1.0 - cfg.epsilon);
    question_ = {0};
    q_star_ = {0};
    theta_star_ = 0.0;
    menu_ = {Assumption::context(0.0, "theta*=0")};
    statistic_dim_ = 1;
    declare_dag({{"theta", "omega1", "omega2"}});
    const int n = cfg.resolution;
    axis_.resize(n);
    const double width = (1.0 - 2.0 * cfg.epsilon) / n;
    for (int k = 0; k < n; ++k) axis_[k] = cfg.epsilon + (k + 0.5) * width;
    w1_ = Eigen::VectorXd::Ones(n);
    if (cfg.omega1_prior.kind == Omega1Prior::Kind::Beta) {
      for (int k = 0; k < n; ++k) {
        const double z = (k + 0.5) / n;
        w1_[k] = std::exp((cfg.omega1_prior.a - 1.0) * std::log(z) + (cfg.omega1_prior.b - 1.0) * std::log1p(-z));
      }
    }
    w2_ = Eigen::VectorXd::Ones(n) / n;
    // independent blocks; merged on the first update that couples them
    prior_ = GridBelief(2, {GridBlock::product({0}, {axis_}, {w1_}), GridBlock::product({1}, {axis_}, {w2_})});
  }

  BeliefState prior() const override { return *prior_; }

  static double p_success(double theta, double w1, double w2) { return (1.0 - theta) * w1 + theta * w2; }

  Sample sample(const TrueState& st, double theta, RngStream& rng) const override {
    check_theta(theta);
    const int s = draw(rng, BernoulliDraw{p_success(theta, st.omega[0], st.omega[1])});
    return {Eigen::VectorXd::Constant(1, s), Eigen::VectorXd()};
  }

  double likelihood(const Eigen::VectorXd& s, double theta, const Eigen::VectorXd& w) const override {
    if (s[0] != 0.0 && s[0] != 1.0) throw Error(ErrorCode::OutOfDomain, "binary statistic must be 0 or 1");
    const double p = p_success(theta, w[0], w[1]);
    return s[0] == 1.0 ? p : 1.0 - p;
  }

  double predictive_p(const BeliefState& belief, double theta) const {
    const auto& g = std::get<GridBelief>(belief);
    return p_success(theta, g.mean(0), g.mean(1));
  }

  PredictiveDistribution predictive(const BeliefState& belief, double theta, Space space) const override {
    check_theta(theta);
    if (space == Space::SAndU) throw Error(ErrorCode::UnsupportedSpace, name_ + " has no latent variable");
    return {BernoulliPredictive{predictive_p(belief, theta)}, Space::SOnly};
  }

  DivergenceEstimate gate_divergence(const BeliefState& belief, double theta, const Assumption& a,
                                     const FDivergenceSpec& spec) const override {
    check_theta(theta);
    return f_divergence_estimate(PredictiveDistribution{BernoulliPredictive{predictive_p(belief, theta)}},
                                 PredictiveDistribution{BernoulliPredictive{
                                     predictive_p(belief, require_context(a, name_).theta_value)}},
                                 spec);
  }

  BeliefState reweight(const BeliefState& belief, double s, double theta) const {
    const auto& g = std::get<GridBelief>(belief);
    if (s != 0.0 && s != 1.0) throw Error(ErrorCode::OutOfDomain, "binary statistic must be 0 or 1");
    if (theta == 0.0 && g.block(g.block_of(0)).rank() == 1) {
      // likelihood involves omega1 only
      const int b = g.block_of(0);
      const GridBlock& blk = g.block(b);
      Eigen::VectorXd lik = blk.points().col(0);
      if (s == 0.0) lik = (1.0 - lik.array()).matrix();
      return g.with_block(b, blk.reweighted(lik));
    }
    const GridBelief joint = g.blocks().size() > 1 ? g.merged({0, 1}) : g;
    const GridBlock& blk = joint.block(0);
    const auto& pts = blk.points();
    Eigen::VectorXd lik = (1.0 - theta) * pts.col(blk.local_axis(0)) + theta * pts.col(blk.local_axis(1));
    if (s == 0.0) lik = (1.0 - lik.array()).matrix();
    return joint.with_block(0, blk.reweighted(lik));
  }

  BeliefState update_as_if(const BeliefState& belief, const Eigen::VectorXd& s, const Assumption& a,
                           double) const override {
    return reweight(belief, s[0], require_context(a, name_).theta_value);
  }

  BeliefState update_true(const BeliefState& belief, const Eigen::VectorXd& s, double theta) const override {
    return reweight(belief, s[0], theta);
  }

  std::vector<std::pair<Eigen::VectorXd, double>> discretize(const BeliefState& belief, double theta,
                                                             int) const override {
    const double p = predictive_p(belief, theta);
    return {{Eigen::VectorXd::Constant(1, 0.0), 1.0 - p}, {Eigen::VectorXd::Constant(1, 1.0), p}};
  }

  BeliefState point_belief(const Eigen::VectorXd& hat) const override {
    return GridBelief(2, {GridBlock::product({0}, {Eigen::VectorXd::Constant(1, hat[0])}, {Eigen::VectorXd::Ones(1)}),
                          GridBlock::product({1}, {axis_}, {w2_})});
  }

  double berk_objective(const Eigen::VectorXd& wp, const TrueState& st, const ThetaRegion& region) const override {
    const double mix = p_success(region.conditional_mean(context_), st.omega[0], st.omega[1]);
    const double assumed = p_success(*theta_star_, wp[0], prior_->mean(1));
    return bernoulli_kl(mix, assumed);
  }

  double log_conditional(int, const Eigen::VectorXd& x) const override {
    const double p = p_success(x[theta_node_], x[omega_node(0)], x[omega_node(1)]);
    return std::log(x[statistic_node(0)] == 1.0 ? p : 1.0 - p);
  }

 private:
  ContaminatedBinaryConfig cfg_;
  Eigen::VectorXd axis_, w1_, w2_;
  std::optional<GridBelief> prior_;
};

}  // namespace

std::unique_ptr<Scenario> make_contaminated_gaussian(const ContaminatedGaussianConfig& config) {
  return std::make_unique<ContaminatedGaussian>(config, false);
}

std::unique_ptr<Scenario> make_degenerate_contaminated() {
  return std::make_unique<ContaminatedGaussian>(ContaminatedGaussianConfig{}, true);
}

std::unique_ptr<Scenario> make_contaminated_binary(const ContaminatedBinaryConfig& config) {
  return std::make_unique<ContaminatedBinary>(config);
}

}  // namespace alab
