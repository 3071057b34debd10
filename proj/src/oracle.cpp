#include <cmath>

#include "alab/io.hpp"

namespace alab {

namespace {

constexpr double kClosedFormTolerance = 1e-6;

// KL of two 1-D Gaussians by brute quadrature of the log-density ratio
double quadrature_kl(const Gaussian1D& p, const Gaussian1D& q) {
  static const QuadratureRule rule = QuadratureRule::gauss_hermite(120);
  return gaussian_expectation([&](double x) { return p.log_pdf(x) - q.log_pdf(x); }, p.mean, p.variance, rule);
}

double exact_discrete_kl(const std::vector<std::pair<Eigen::VectorXd, double>>& p,
                         const std::vector<std::pair<Eigen::VectorXd, double>>& q) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k].second > 0.0) acc += p[k].second * std::log(p[k].second / q[k].second);
  return acc;
}

struct McResult {
  double mean, se;
};

template <typename Term>
McResult monte_carlo(int draws, std::uint64_t seed, Term&& term) {
  RngStream rng(seed, 7);
  double sum = 0.0, sq = 0.0;
  for (int n = 0; n < draws; ++n) {
    const double t = term(rng);
    sum += t;
    sq += t * t;
  }
  const double mean = sum / draws;
  return {mean, std::sqrt(std::max(0.0, (sq / draws - mean * mean) / (draws - 1.0)))};
}

// zero-mean control variate, as in the engine's estimator
double kl_term(double L) { return L + std::expm1(-L); }

// Selection model: entry from the selective/non-selective mixture; the outcome
// is scored at the belief-integrated normal in every draw, as the closed form does.
McResult heckman_random_entry_mc(const HeckmanBelief& b, double theta, int draws, std::uint64_t seed) {
  return monte_carlo(draws, seed, [&](RngStream& rng) {
    const int s2 = rng.uniform() < 0.5 ? 1 : 0;
    const double u = rng.standard_normal();
    const double p0_theta = theta * std_normal_cdf(-s2 - u) + (1.0 - theta) * std_normal_cdf(-s2);
    const double p0_ref = std_normal_cdf(-static_cast<double>(s2));
    const bool enter = rng.uniform() >= p0_theta;
    const double le = enter ? std::log((1.0 - p0_theta) / (1.0 - p0_ref)) : std::log(p0_theta / p0_ref);
    const double lam = inverse_mills(s2);
    const Gaussian1D at_theta(b.mean[0] + s2 * b.mean[1] + theta * lam * b.mean[2],
                              b.variance[0] + s2 * b.variance[1] + theta * theta * lam * lam * b.variance[2]);
    const Gaussian1D at_ref(b.mean[0] + s2 * b.mean[1], b.variance[0] + s2 * b.variance[1]);
    const double s3 = at_theta.mean + at_theta.sd() * rng.standard_normal();
    return kl_term(le) + kl_term(at_theta.log_pdf(s3) - at_ref.log_pdf(s3));
  });
}

McResult heckman_exclusion_mc(const HeckmanBelief& b, double theta, double v, int draws, std::uint64_t seed) {
  return monte_carlo(draws, seed, [&](RngStream& rng) {
    const int s2 = rng.uniform() < 0.5 ? 1 : 0;
    const double lam = inverse_mills(s2);
    const double common = b.mean[0] + theta * lam * b.mean[2];
    const double vc = b.variance[0] + theta * theta * lam * lam * b.variance[2];
    const Gaussian1D believed(common + s2 * b.mean[1], vc + s2 * b.variance[1]);
    const Gaussian1D assumed(common + s2 * v, vc);
    const double s3 = believed.mean + believed.sd() * rng.standard_normal();
    return kl_term(believed.log_pdf(s3) - assumed.log_pdf(s3));
  });
}

Gaussian1D contaminated_predictive(const GaussianBelief& b, double theta) {
  const Eigen::Vector2d h(1.0, theta);
  return Gaussian1D(h.dot(b.mean()), h.dot(b.covariance() * h) + 1.0);
}

}  // namespace

OracleReport calibrate_oracle(const Scenario& sc, const OracleSettings& settings, std::uint64_t seed) {
  if (settings.probes < 1) throw Error(ErrorCode::InvalidParameter, "oracle.probes must be positive");
  if (settings.draws < 2) throw Error(ErrorCode::InvalidParameter, "oracle.draws must be at least 2");
  OracleReport report;
  report.scenario = sc.name();
  const FDivergenceSpec kl = FDivergenceSpec::kl();
  const TrueState truth = default_true_state(sc.name());
  const auto& menu = sc.assumption_menu();
  RngStream rng(seed, 0);

  for (int p = 0; p < settings.probes; ++p) {
    const BeliefState belief = random_history_belief(sc, truth, 1 + 3 * p, rng);
    const double theta = (p + 0.5) / settings.probes;
    for (std::size_t k = 0; k < menu.size(); ++k) {
      const Assumption& a = menu[k];
      OracleRow row;
      row.label = a.label.empty() ? "assumption " + std::to_string(k + 1) : a.label;
      row.theta = theta;
      const DivergenceEstimate gate = sc.gate_divergence(belief, theta, a, kl);
      row.value = gate.value;
      const std::string& n = sc.name();
      if (n == "contaminated-gaussian") {
        const auto& b = std::get<GaussianBelief>(belief);
        row.oracle = quadrature_kl(contaminated_predictive(b, theta), contaminated_predictive(b, a.theta_value));
        row.tolerance = kClosedFormTolerance;
      } else if (n == "contaminated-binary") {
        row.oracle = exact_discrete_kl(sc.discretize(belief, theta, 2), sc.discretize(belief, a.theta_value, 2));
        row.tolerance = kClosedFormTolerance;
      } else if (n == "calibration") {
        const auto& b = std::get<GaussianBelief>(belief);
        const int other = 1 - a.index;
        row.oracle = quadrature_kl(Gaussian1D(b.mean().sum(), b.variance(0) + b.variance(1)),
                                   Gaussian1D(b.mean(other) + a.resolved_value(belief), b.variance(other)));
        row.tolerance = kClosedFormTolerance;
      } else if (n == "heckman-selection") {
        const HeckmanBelief hb = HeckmanBelief::from_gaussian(std::get<GaussianBelief>(belief));
        const std::uint64_t s = seed + 1000 + static_cast<std::uint64_t>(p);
        const McResult mc = a.is_context() ? heckman_random_entry_mc(hb, theta, settings.draws, s)
                                           : heckman_exclusion_mc(hb, theta, a.resolved_value(belief), settings.draws, s);
        row.oracle = mc.mean;
        row.std_error = mc.se;
        row.tolerance = 4.0 * mc.se;
      } else {
        // full predictive densities over (s, u) or s, fresh random numbers
        const Space space = sc.gate_space();
        const PredictiveDistribution m = sc.predictive(belief, theta, space);
        const PredictiveDistribution ms = sc.predictive(belief, a.theta_value, space);
        DivergenceOptions opts;
        opts.mc_draws = n == "instrumental-variables" ? std::min(settings.draws, 20000) : settings.draws;
        opts.mc_seed = seed + 2000 + static_cast<std::uint64_t>(p);
        const DivergenceEstimate est = f_divergence_estimate(m, ms, kl, opts);
        row.oracle = est.value;
        row.std_error = est.std_error;
        row.tolerance = 4.0 * std::hypot(est.std_error, gate.std_error) + 1e-12;
      }
      row.pass = std::abs(row.value - row.oracle) <= row.tolerance;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace alab
