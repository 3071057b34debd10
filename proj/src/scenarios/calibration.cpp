// Calibration: s = omega1 + omega2 + e; either parameter can be pinned at its
// current mean to identify the other.
#include <cmath>

#include "alab/scenarios.hpp"

namespace alab {
namespace {

class Calibration final : public Scenario {
 public:
  explicit Calibration(const CalibrationConfig& cfg) : cfg_(cfg) {
    if (!(cfg.prior_variance > 0.0)) throw Error(ErrorCode::InvalidVariance, "prior variance must be positive");
    name_ = "calibration";
    omega_lo_ = Eigen::VectorXd::Constant(2, -cfg.omega_bound);
    omega_hi_ = Eigen::VectorXd::Constant(2, cfg.omega_bound);
    question_ = {0, 1};
    q_star_ = {0, 1};
    theta_star_.reset();
    // ties go to assuming omega2 first
    menu_ = {Assumption::fixed_parameter(1, Assumption::ValueRule::CurrentMean, 0.0, "omega2=m2"),
             Assumption::fixed_parameter(0, Assumption::ValueRule::CurrentMean, 0.0, "omega1=m1")};
    context_ = ContextDistribution::discrete({0.0}, {1.0});
    statistic_dim_ = 1;
    declare_dag({{"omega1", "omega2"}});
  }

  BeliefState prior() const override {
    return GaussianBelief::product(cfg_.prior_mean, Eigen::Vector2d::Constant(cfg_.prior_variance));
  }

  Sample sample(const TrueState& st, double, RngStream& rng) const override {
    return {Eigen::VectorXd::Constant(1, st.omega[0] + st.omega[1] + rng.standard_normal()), Eigen::VectorXd()};
  }

  double likelihood(const Eigen::VectorXd& s, double, const Eigen::VectorXd& w) const override {
    return std_normal_pdf(s[0] - w[0] - w[1]);
  }

  static Gaussian1D believed(const GaussianBelief& b) {
    return Gaussian1D(b.mean().sum(), 1.0 + b.covariance().sum());
  }

  PredictiveDistribution predictive(const BeliefState& belief, double, Space space) const override {
    if (space == Space::SAndU) throw Error(ErrorCode::UnsupportedSpace, name_ + " has no latent variable");
    return {believed(std::get<GaussianBelief>(belief)), Space::SOnly};
  }

  DivergenceEstimate gate_divergence(const BeliefState& belief, double, const Assumption& a,
                                     const FDivergenceSpec& spec) const override {
    if (a.is_context()) throw Error(ErrorCode::InvalidParameter, "calibration has no context assumption");
    const auto& b = std::get<GaussianBelief>(belief);
    const double v = a.resolved_value(belief);
    const int other = 1 - a.index;
    if (spec.is_kl()) {
      const std::array<double, 2> m{b.mean(0), b.mean(1)};
      const std::array<double, 2> sd{std::sqrt(b.variance(0)), std::sqrt(b.variance(1))};
      return {calibration_divergence(m, sd, a.index + 1, v), 0.0};
    }
    // same pair of location beliefs the closed form compares
    const PredictiveDistribution m{Gaussian1D(b.mean().sum(), b.variance(0) + b.variance(1))};
    const PredictiveDistribution ms{Gaussian1D(b.mean(other) + v, b.variance(other))};
    return f_divergence_estimate(m, ms, spec);
  }

  BeliefState update_as_if(const BeliefState& belief, const Eigen::VectorXd& s, const Assumption& a,
                           double) const override {
    if (a.is_context()) throw Error(ErrorCode::InvalidParameter, "calibration has no context assumption");
    Eigen::Vector2d h = Eigen::Vector2d::Zero();
    h[1 - a.index] = 1.0;
    return std::get<GaussianBelief>(belief).observe_linear(h, a.resolved_value(belief), s[0], 1.0);
  }

  BeliefState update_true(const BeliefState& belief, const Eigen::VectorXd& s, double) const override {
    return std::get<GaussianBelief>(belief).observe_linear(Eigen::Vector2d::Ones(), 0.0, s[0], 1.0);
  }

  std::vector<std::pair<Eigen::VectorXd, double>> discretize(const BeliefState& belief, double,
                                                             int bins) const override {
    const Gaussian1D g = believed(std::get<GaussianBelief>(belief));
    const double sd = g.sd(), lo = g.mean - 8.0 * sd, width = 16.0 * sd / bins;
    std::vector<std::pair<Eigen::VectorXd, double>> out;
    double total = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double x = lo + k * width;
      const double p = std_normal_cdf((x + width - g.mean) / sd) - std_normal_cdf((x - g.mean) / sd);
      out.emplace_back(Eigen::VectorXd::Constant(1, x + 0.5 * width), p);
      total += p;
    }
    for (auto& o : out) o.second /= total;
    return out;
  }

  double log_conditional(int, const Eigen::VectorXd& x) const override {
    return Gaussian1D(x[omega_node(0)] + x[omega_node(1)], 1.0).log_pdf(x[statistic_node(0)]);
  }

 private:
  CalibrationConfig cfg_;
};

}  // namespace

std::unique_ptr<Scenario> make_calibration(const CalibrationConfig& config) {
  return std::make_unique<Calibration>(config);
}

}  // namespace alab
