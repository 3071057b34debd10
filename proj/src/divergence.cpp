#include "alab/divergence.hpp"

#include <limits>

namespace alab {

FDivergenceSpec FDivergenceSpec::kl() { return FDivergenceSpec{}; }

FDivergenceSpec FDivergenceSpec::generic(std::function<double(double)> f, std::string name) {
  if (!f) throw Error(ErrorCode::InvalidParameter, "generic f-divergence needs a function");
  if (std::abs(f(1.0)) > 1e-12) throw Error(ErrorCode::InvalidParameter, "f(1) must be 0");
  // midpoint convexity spot check on a log-spaced grid
  std::vector<double> xs;
  for (int k = -20; k <= 20; ++k) xs.push_back(std::exp(0.25 * k));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 2; j < xs.size(); j += 3) {
      const double mid = f(0.5 * (xs[i] + xs[j]));
      const double chord = 0.5 * (f(xs[i]) + f(xs[j]));
      if (!(mid < chord + 1e-12 * (1.0 + std::abs(chord))))
        throw Error(ErrorCode::InvalidParameter, "f fails the midpoint convexity check");
    }
  FDivergenceSpec spec;
  spec.kind_ = Kind::Generic;
  spec.f_ = std::move(f);
  spec.name_ = std::move(name);
  return spec;
}

double FDivergenceSpec::f(double ratio) const {
  if (kind_ == Kind::Kl) return ratio > 0.0 ? ratio * std::log(ratio) : 0.0;
  return f_(ratio);
}

const char* to_string(Space space) noexcept { return space == Space::SOnly ? "s-only" : "s-and-u"; }

double floored_log(double x) noexcept { return std::log(std::max(x, kDensityFloor)); }

double GaussianMixturePredictive::log_density(double x) const {
  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd logs(static_cast<Eigen::Index>(components.size()));
  for (std::size_t k = 0; k < components.size(); ++k) {
    const double w = weights[static_cast<Eigen::Index>(k)];
    logs[static_cast<Eigen::Index>(k)] =
        w > 0.0 ? std::log(w) + components[k].log_pdf(x) : -std::numeric_limits<double>::infinity();
    best = std::max(best, logs[static_cast<Eigen::Index>(k)]);
  }
  if (!std::isfinite(best)) return std::log(kDensityFloor);
  return best + std::log((logs.array() - best).exp().sum());
}

namespace {

void check_finite(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteDivergence, "divergence evaluated to a non-finite value");
}

double log_density_1d(const PredictiveDistribution& d, double x) {
  if (const auto* g = std::get_if<Gaussian1D>(&d.repr)) return g->log_pdf(x);
  return std::get<GaussianMixturePredictive>(d.repr).log_density(x);
}

// E_q[fn(x)] where q is a Gaussian or a Gaussian mixture, by Hermite quadrature per component
template <typename Fn>
double expect_under(const PredictiveDistribution& q, Fn&& fn, const QuadratureRule& rule) {
  if (const auto* g = std::get_if<Gaussian1D>(&q.repr)) return gaussian_expectation(fn, g->mean, g->variance, rule);
  const auto& mix = std::get<GaussianMixturePredictive>(q.repr);
  double acc = 0.0;
  for (std::size_t k = 0; k < mix.components.size(); ++k) {
    const double w = mix.weights[static_cast<Eigen::Index>(k)];
    if (w > 0.0) acc += w * gaussian_expectation(fn, mix.components[k].mean, mix.components[k].variance, rule);
  }
  return acc;
}

bool is_continuous_1d(const PredictiveDistribution& d) {
  return std::holds_alternative<Gaussian1D>(d.repr) || std::holds_alternative<GaussianMixturePredictive>(d.repr);
}

}  // namespace

DivergenceEstimate f_divergence_estimate(const PredictiveDistribution& m, const PredictiveDistribution& m_star,
                                         const FDivergenceSpec& spec, const DivergenceOptions& options) {
  if (m.over != m_star.over) throw Error(ErrorCode::SupportMismatch, "predictives live on different spaces");
  const QuadratureRule& rule = options.hermite ? *options.hermite : default_hermite();

  if (const auto* a = std::get_if<BernoulliPredictive>(&m.repr)) {
    const auto* b = std::get_if<BernoulliPredictive>(&m_star.repr);
    if (!b) throw Error(ErrorCode::SupportMismatch, "Bernoulli against non-Bernoulli predictive");
    double v;
    if (spec.is_kl()) {
      v = bernoulli_kl(a->p, b->p);
    } else {
      if (!(b->p > 0.0 && b->p < 1.0)) throw Error(ErrorCode::NonFiniteDivergence, "reference Bernoulli on the boundary");
      v = b->p * spec.f(a->p / b->p) + (1.0 - b->p) * spec.f((1.0 - a->p) / (1.0 - b->p));
    }
    check_finite(v);
    return {std::max(v, 0.0), 0.0};
  }

  if (is_continuous_1d(m)) {
    if (!is_continuous_1d(m_star)) throw Error(ErrorCode::SupportMismatch, "continuous against discrete predictive");
    const auto* ga = std::get_if<Gaussian1D>(&m.repr);
    const auto* gb = std::get_if<Gaussian1D>(&m_star.repr);
    double v;
    if (ga && gb && spec.is_kl()) {
      v = kl_gaussian(*ga, *gb);
    } else if (spec.is_kl()) {
      v = expect_under(m, [&](double x) { return log_density_1d(m, x) - log_density_1d(m_star, x); }, rule);
    } else {
      v = expect_under(m_star, [&](double x) {
        const double lr = floored_log(std::exp(log_density_1d(m, x))) - floored_log(std::exp(log_density_1d(m_star, x)));
        return spec.f(std::exp(lr));
      }, rule);
    }
    check_finite(v);
    return {std::max(v, 0.0), 0.0};
  }

  const auto* sa = std::get_if<SampledPredictive>(&m.repr);
  const auto* sb = std::get_if<SampledPredictive>(&m_star.repr);
  if (!sa || !sb) throw Error(ErrorCode::SupportMismatch, "sampled against closed-form predictive");
  if (sa->dim != sb->dim) throw Error(ErrorCode::SupportMismatch, "sampled predictives differ in dimension");
  auto log_ratio = [&](const Eigen::VectorXd& x) { return sa->log_density(x) - sb->log_density(x); };
  return divergence_from_log_ratio(sa->sampler, sb->sampler, log_ratio, spec, options.mc_draws, options.mc_seed);
}

double f_divergence(const PredictiveDistribution& m, const PredictiveDistribution& m_star,
                    const FDivergenceSpec& spec, const DivergenceOptions& options) {
  return f_divergence_estimate(m, m_star, spec, options).value;
}

DivergenceEstimate divergence_from_log_ratio(const std::function<Eigen::VectorXd(RngStream&)>& sample_m,
                                             const std::function<Eigen::VectorXd(RngStream&)>& sample_m_star,
                                             const std::function<double(const Eigen::VectorXd&)>& log_ratio,
                                             const FDivergenceSpec& spec, int draws, std::uint64_t seed) {
  if (draws < 2) throw Error(ErrorCode::InvalidParameter, "Monte Carlo divergence needs at least two draws");
  const RngStream base(seed, 0);
  // Control variate with zero mean: E_m[m*/m] = E_m*[m/m*] = 1. It makes every
  // term nonnegative by convexity and cuts the variance near m = m*.
  const double slope = spec.is_kl() ? 0.0 : (spec.f(1.0 + 1e-6) - spec.f(1.0 - 1e-6)) / 2e-6;
  double sum = 0.0, sum_sq = 0.0;
  for (int n = 0; n < draws; ++n) {
    RngStream stream = base.substream(static_cast<std::uint64_t>(n));
    double term;
    if (spec.is_kl()) {
      const double L = log_ratio(sample_m(stream));
      term = L + std::expm1(-L);
    } else {
      const double r = std::exp(log_ratio(sample_m_star(stream)));
      term = spec.f(r) - slope * (r - 1.0);
    }
    if (!std::isfinite(term)) throw Error(ErrorCode::NonFiniteDivergence, "Monte Carlo term is not finite");
    sum += term;
    sum_sq += term * term;
  }
  const double nd = static_cast<double>(draws);
  const double mean = sum / nd;
  const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0));
  return {mean, std::sqrt(var / nd)};
}

// ---------------------------------------------------------------- selection model

double heckman_S(const HeckmanBelief& belief, double theta) {
  belief.validate();
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "theta outside [0,1]");
  const double l1 = inverse_mills(1);
  const double denom = belief.variance[0] + l1 * l1 * theta * theta * belief.variance[2];
  const double m2 = belief.mean[1];
  return 0.25 * (g_function(1.0 + belief.variance[1] / denom) + m2 * m2 / denom);
}

double heckman_entry_divergence(double theta, const QuadratureRule& rule) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "theta outside [0,1]");
  const double pm1 = std_normal_cdf(-1.0);
  const double v = integrate([&](double u) {
    const double a = bernoulli_kl(theta * std_normal_cdf(-1.0 - u) + (1.0 - theta) * pm1, pm1);
    const double b = bernoulli_kl(theta * std_normal_cdf(-u) + (1.0 - theta) * 0.5, 0.5);
    return 0.5 * (a + b);
  }, rule);
  check_finite(v);
  return v;
}

double heckman_R(const HeckmanBelief& belief, double theta, const QuadratureRule& rule) {
  belief.validate();
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "theta outside [0,1]");
  const double l0 = inverse_mills(0), l1 = inverse_mills(1);
  const double t2 = theta * theta;
  const double s1 = belief.variance[0], s2 = belief.variance[1], s3 = belief.variance[2];
  const double m3sq = belief.mean[2] * belief.mean[2];
  const double outcome = 0.25 * (g_function(1.0 + l1 * l1 * t2 * s3 / (s2 + s1)) + l1 * l1 * t2 * m3sq / (s2 + s1) +
                                 g_function(1.0 + l0 * l0 * t2 * s3 / s1) + l0 * l0 * t2 * m3sq / s1);
  const double v = outcome + heckman_entry_divergence(theta, rule);
  check_finite(v);
  return v;
}

}  // namespace alab
