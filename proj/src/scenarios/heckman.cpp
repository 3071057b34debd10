// Selection model: entry s1, exogenous s2, income s3 observed only after entry.
#include <cmath>
#include <limits>

#include "alab/scenarios.hpp"

namespace alab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class HeckmanSelection final : public Scenario {
 public:
  explicit HeckmanSelection(const HeckmanSelectionConfig& cfg) : cfg_(cfg) {
    HeckmanBelief{cfg.prior_mean, cfg.prior_variance}.validate();
    if (!(cfg.outcome_noise_variance > 0.0))
      throw Error(ErrorCode::InvalidVariance, "outcome noise variance must be positive");
    name_ = "heckman-selection";
    omega_lo_ = Eigen::VectorXd::Constant(3, -cfg.omega_bound);
    omega_hi_ = Eigen::VectorXd::Constant(3, cfg.omega_bound);
    question_ = {0};
    q_star_ = {0, 1};
    theta_star_ = 0.0;
    menu_ = {Assumption::context(0.0, "random-entry"),
             Assumption::fixed_parameter(1, Assumption::ValueRule::Constant, 0.0, "exclusion")};
    statistic_dim_ = 3;
    latent_dim_ = 1;
    gate_space_ = Space::SAndU;
    declare_dag({{"theta", "s2", "u"}, {}, {"theta", "s1", "s2", "omega1", "omega2", "omega3"}});
    lambda_ = {inverse_mills(0), inverse_mills(1)};
  }

  BeliefState prior() const override { return HeckmanBelief{cfg_.prior_mean, cfg_.prior_variance}.to_gaussian(); }

  double lambda(double s2) const { return lambda_[s2 == 1.0 ? 1 : 0]; }

  double outcome_mean(double theta, double s2, const Eigen::VectorXd& w) const {
    return w[0] + w[1] * s2 + w[2] * theta * lambda(s2);
  }

  /// P(s1 = 1 | s2, u) in the selective branch.
  double selective_entry(double s2, double u) const {
    return cfg_.selection_noise ? std_normal_cdf(s2 + u) : (s2 + u >= 0.0 ? 1.0 : 0.0);
  }
  /// P(s1 = 1 | s2) in the selective branch, u integrated out.
  double selective_entry(double s2) const {
    return cfg_.selection_noise ? std_normal_cdf(s2 / std::sqrt(2.0)) : std_normal_cdf(s2);
  }

  Sample sample(const TrueState& st, double theta, RngStream& rng) const override {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "theta outside [0,1]");
    const double u = rng.standard_normal();
    const double s2 = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const bool selective = rng.uniform() < theta;
    const double noise = rng.standard_normal();
    const double e2 = rng.standard_normal();
    double s1;
    if (selective) s1 = (s2 + u + (cfg_.selection_noise ? noise : 0.0) >= 0.0) ? 1.0 : 0.0;
    else s1 = (s2 + noise >= 0.0) ? 1.0 : 0.0;
    const double s3 = s1 == 1.0 ? outcome_mean(theta, s2, st.omega) + std::sqrt(cfg_.outcome_noise_variance) * e2 : kNaN;
    return {Eigen::Vector3d(s1, s2, s3), Eigen::VectorXd::Constant(1, u)};
  }

  double likelihood(const Eigen::VectorXd& s, double theta, const Eigen::VectorXd& w) const override {
    const double s1 = s[0], s2 = s[1];
    if ((s1 != 0.0 && s1 != 1.0) || (s2 != 0.0 && s2 != 1.0))
      throw Error(ErrorCode::OutOfDomain, "entry and exogenous statistics must be 0 or 1");
    const double p1 = theta * selective_entry(s2) + (1.0 - theta) * std_normal_cdf(s2);
    if (s1 == 0.0) return 0.5 * (1.0 - p1);
    if (std::isnan(s[2])) throw Error(ErrorCode::OutOfDomain, "income missing after entry");
    return 0.5 * p1 * Gaussian1D(outcome_mean(theta, s2, w), cfg_.outcome_noise_variance).pdf(s[2]);
  }

  PredictiveDistribution predictive(const BeliefState& belief, double theta, Space space) const override {
    const GaussianBelief b = std::get<GaussianBelief>(belief);
    const bool with_u = space == Space::SAndU;
    SampledPredictive sp;
    sp.dim = with_u ? 4 : 3;
    sp.log_density = [this, b, theta, with_u](const Eigen::VectorXd& x) {
      const double s1 = x[0], s2 = x[1];
      double p1;
      if (with_u) p1 = theta * selective_entry(s2, x[3]) + (1.0 - theta) * std_normal_cdf(s2);
      else p1 = theta * selective_entry(s2) + (1.0 - theta) * std_normal_cdf(s2);
      double lp = std::log(0.5) + floored_log(s1 == 1.0 ? p1 : 1.0 - p1);
      if (with_u) lp += Gaussian1D(0.0, 1.0).log_pdf(x[3]);
      if (s1 == 1.0) {
        const Eigen::Vector3d h(1.0, s2, theta * lambda(s2));
        lp += Gaussian1D(h.dot(b.mean()), h.dot(b.covariance() * h) + cfg_.outcome_noise_variance).log_pdf(x[2]);
      }
      return lp;
    };
    sp.sampler = [this, b, theta, with_u](RngStream& rng) {
      const Eigen::VectorXd w =
          b.mean() + b.covariance().llt().matrixL() * Eigen::Vector3d(rng.standard_normal(), rng.standard_normal(),
                                                                      rng.standard_normal());
      const Sample smp = sample(TrueState{w}, theta, rng);
      Eigen::VectorXd x(with_u ? 4 : 3);
      x.head<3>() = smp.s;
      if (with_u) x[3] = smp.u[0];
      return x;
    };
    return {sp, space};
  }

  DivergenceEstimate gate_divergence(const BeliefState& belief, double theta, const Assumption& a,
                                     const FDivergenceSpec& spec) const override {
    if (!spec.is_kl()) throw Error(ErrorCode::UnsupportedDivergence, "selection-model gate is defined for KL only");
    HeckmanBelief hb = HeckmanBelief::from_gaussian(std::get<GaussianBelief>(belief));
    if (a.is_context()) {
      if (a.theta_value != 0.0) throw Error(ErrorCode::InvalidParameter, "random-entry assumption needs theta* = 0");
      return {heckman_R(hb, theta), 0.0};
    }
    if (a.index != 1) throw Error(ErrorCode::InvalidParameter, "exclusion assumption must fix omega2");
    hb.mean[1] -= a.resolved_value(belief);
    return {heckman_S(hb, theta), 0.0};
  }

  BeliefState update_as_if(const BeliefState& belief, const Eigen::VectorXd& s, const Assumption& a,
                           double theta) const override {
    const auto& b = std::get<GaussianBelief>(belief);
    if (s[0] != 1.0 || std::isnan(s[2])) return b;
    const double s2 = s[1];
    if (a.is_context())
      return b.observe_linear(Eigen::Vector3d(1.0, s2, a.theta_value * lambda(s2)), 0.0, s[2],
                              cfg_.outcome_noise_variance)
          .projected_to_product();
    const double v = a.resolved_value(belief);
    return b.observe_linear(Eigen::Vector3d(1.0, 0.0, theta * lambda(s2)), v * s2, s[2], cfg_.outcome_noise_variance)
        .projected_to_product();
  }

  BeliefState update_true(const BeliefState& belief, const Eigen::VectorXd& s, double theta) const override {
    const auto& b = std::get<GaussianBelief>(belief);
    if (s[0] != 1.0 || std::isnan(s[2])) return b;
    return b.observe_linear(Eigen::Vector3d(1.0, s[1], theta * lambda(s[1])), 0.0, s[2], cfg_.outcome_noise_variance);
  }

  double log_conditional(int j, const Eigen::VectorXd& x) const override {
    const double theta = x[theta_node_], u = x[latent_nodes_[0]];
    const double s1 = x[statistic_node(0)], s2 = x[statistic_node(1)], s3 = x[statistic_node(2)];
    if (j == 0) {
      const double p1 = theta * selective_entry(s2, u) + (1.0 - theta) * std_normal_cdf(s2);
      return floored_log(s1 == 1.0 ? p1 : 1.0 - p1);
    }
    if (j == 1) return std::log(0.5);
    if (s1 != 1.0 || std::isnan(s3)) return 0.0;
    const Eigen::Vector3d w(x[omega_node(0)], x[omega_node(1)], x[omega_node(2)]);
    return Gaussian1D(outcome_mean(theta, s2, w), cfg_.outcome_noise_variance).log_pdf(s3);
  }

 private:
  HeckmanSelectionConfig cfg_;
  std::array<double, 2> lambda_{};
};

}  // namespace

std::unique_ptr<Scenario> make_heckman_selection(const HeckmanSelectionConfig& config) {
  return std::make_unique<HeckmanSelection>(config);
}

}  // namespace alab
