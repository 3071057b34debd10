#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "alab/errors.hpp"

namespace alab {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

struct NormalPdfCdf {
  double pdf;
  double cdf;
};

// cdf = erfc(-x/sqrt 2)/2 from the C library; glibc's erfc is accurate to a
// couple of ulps, far inside the 1e-12 absolute budget, and keeps full relative
// precision in the lower tail.
NormalPdfCdf std_normal_pdf_cdf(double x);
double std_normal_pdf(double x) noexcept;
double std_normal_cdf(double x) noexcept;

/// lambda_i = phi(-i) / (1 - Phi(-i)) for i in {0, 1}.
double inverse_mills(int i);

template <typename Scalar>
struct BasicGaussian1D {
  Scalar mean{0};
  Scalar variance{1};

  BasicGaussian1D() = default;
  BasicGaussian1D(Scalar m, Scalar v) : mean(m), variance(v) {
    if (!(v > Scalar(0)) || !std::isfinite(static_cast<double>(v)))
      throw Error(ErrorCode::InvalidVariance, "Gaussian1D variance must be positive and finite");
  }

  Scalar sd() const {
    using std::sqrt;
    return sqrt(variance);
  }
  Scalar log_pdf(Scalar x) const {
    using std::log;
    const Scalar z = x - mean;
    return -Scalar(kLogSqrt2Pi) - Scalar(0.5) * log(variance) - z * z / (Scalar(2) * variance);
  }
  Scalar pdf(Scalar x) const {
    using std::exp;
    return exp(log_pdf(x));
  }
};
using Gaussian1D = BasicGaussian1D<double>;

// ---------------------------------------------------------------- quadrature

enum class QuadratureKind { GaussHermite, GaussLegendre };

/// Gauss-Hermite rules are normalised to the standard normal weight, so
/// integrate(f, rule) approximates E[f(Z)]. Legendre rules carry their interval.
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::GaussLegendre;
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  double lower = 0.0;
  double upper = 1.0;

  static QuadratureRule gauss_hermite(int n);
  static QuadratureRule gauss_legendre(int n, double a = 0.0, double b = 1.0);

  /// Affine remap of a Legendre rule to [a, b].
  QuadratureRule on_interval(double a, double b) const;
  Eigen::Index size() const { return nodes.size(); }
};

inline constexpr int kDefaultHermiteNodes = 64;
inline constexpr int kDefaultLegendreNodes = 128;

/// Cached default rules (64-node Hermite, 128-node Legendre on [0,1]).
const QuadratureRule& default_hermite();
const QuadratureRule& default_legendre();

template <typename F>
double integrate(F&& f, const QuadratureRule& rule) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
    const double v = f(rule.nodes[k]);
    if (!std::isfinite(v))
      throw Error(ErrorCode::NonFiniteIntegrand,
                  "integrand is not finite at node " + std::to_string(rule.nodes[k]));
    acc += rule.weights[k] * v;
  }
  return acc;
}

/// E[f(X)] for X ~ N(mean, variance) using a Hermite rule.
template <typename F>
double gaussian_expectation(F&& f, double mean, double variance, const QuadratureRule& rule) {
  const double sd = std::sqrt(variance);
  return integrate([&](double z) { return f(mean + sd * z); }, rule);
}

// ---------------------------------------------------------------- rng

/// SplitMix64 finaliser (Stafford variant 13).
std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// Counter-based stream: output n is splitmix64_mix(key + (n + 1) * golden_gamma),
/// key = mix(mix(master_seed) ^ mix(replication_index + golden_gamma)).
/// Uniforms take the top 53 bits, shifted by half an ulp so they lie in (0,1).
/// Normals are Box-Muller pairs; the second member of a pair is cached.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replication_index);

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept;
  double standard_normal() noexcept;

  /// Child stream keyed on (this stream's key, index); does not advance this stream.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t replication_index() const noexcept { return replication_index_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  RngStream(std::uint64_t master_seed, std::uint64_t replication_index, std::uint64_t key);

  std::uint64_t master_seed_;
  std::uint64_t replication_index_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------- context

class ContextDistribution {
 public:
  enum class Kind { Uniform01, Beta, Discrete };

  static ContextDistribution uniform01();
  /// Beta(a, b) with a, b >= 1 so the density stays bounded on [0,1].
  static ContextDistribution beta(double a, double b);
  static ContextDistribution discrete(std::vector<double> points, std::vector<double> weights);

  Kind kind() const noexcept { return kind_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  bool is_continuous() const noexcept { return kind_ != Kind::Discrete; }

  /// Density on [0,1]; zero for discrete distributions (use weights()).
  double pdf(double x) const;
  double cdf(double x) const;
  double mean() const;
  double sample(RngStream& stream) const;

  /// Integral of g(theta) dP(theta) over [lo, hi].
  template <typename F>
  double expect_on(F&& g, double lo, double hi) const {
    if (hi < lo) return 0.0;
    if (kind_ == Kind::Discrete) {
      double acc = 0.0;
      for (std::size_t k = 0; k < points_.size(); ++k)
        if (points_[k] >= lo && points_[k] <= hi) acc += weights_[k] * g(points_[k]);
      return acc;
    }
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    if (hi <= lo) return 0.0;
    const QuadratureRule rule = default_legendre().on_interval(lo, hi);
    return integrate([&](double t) { return pdf(t) * g(t); }, rule);
  }

  std::string describe() const;

 private:
  Kind kind_ = Kind::Uniform01;
  double a_ = 1.0, b_ = 1.0, log_beta_norm_ = 0.0;
  std::vector<double> points_, weights_;
};

/// E[theta | theta <= cutoff].
double truncated_mean(const ContextDistribution& dist, double cutoff);

// ---------------------------------------------------------------- draws

struct GaussianDraw {
  double mean = 0.0;
  double sd = 1.0;
};
struct BernoulliDraw {
  double p = 0.5;
};

double draw(RngStream& stream, const GaussianDraw& dist);
int draw(RngStream& stream, const BernoulliDraw& dist);
double draw(RngStream& stream, const ContextDistribution& dist);
/// Gamma(shape, 1) by Marsaglia-Tsang; shape >= 1.
double draw_gamma(RngStream& stream, double shape);
/// Index drawn from unnormalised nonnegative weights.
std::size_t draw_index(RngStream& stream, const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

}  // namespace alab
