#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "alab/beliefs.hpp"
#include "alab/distributions.hpp"

namespace alab {

/// D(m || m') = E_{m'}[f(m/m')]. KL uses f(x) = x ln x.
class FDivergenceSpec {
 public:
  enum class Kind { Kl, Generic };

  static FDivergenceSpec kl();
  /// Rejects f with f(1) != 0 or a failed midpoint-convexity spot check.
  static FDivergenceSpec generic(std::function<double(double)> f, std::string name = "generic");

  Kind kind() const noexcept { return kind_; }
  bool is_kl() const noexcept { return kind_ == Kind::Kl; }
  const std::string& name() const noexcept { return name_; }
  double f(double ratio) const;

 private:
  Kind kind_ = Kind::Kl;
  std::function<double(double)> f_;
  std::string name_ = "kl";
};

enum class Space { SOnly, SAndU };
const char* to_string(Space space) noexcept;

struct BernoulliPredictive {
  double p = 0.5;
};

struct GaussianMixturePredictive {
  std::vector<Gaussian1D> components;
  Eigen::VectorXd weights;
  double log_density(double x) const;
};

/// Density evaluator plus sampler on R^dim.
struct SampledPredictive {
  int dim = 1;
  std::function<double(const Eigen::VectorXd&)> log_density;
  std::function<Eigen::VectorXd(RngStream&)> sampler;
};

struct PredictiveDistribution {
  std::variant<Gaussian1D, BernoulliPredictive, GaussianMixturePredictive, SampledPredictive> repr;
  Space over = Space::SOnly;
};

struct DivergenceOptions {
  const QuadratureRule* hermite = nullptr;  // default_hermite() when null
  int mc_draws = 4096;
  std::uint64_t mc_seed = 0x5EED5EEDULL;
};

struct DivergenceEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for closed forms and quadrature
};

/// Closed form for Gaussian/Gaussian under KL and Bernoulli/Bernoulli; Hermite
/// quadrature under m_star for Gaussian mixtures; common-random-number Monte
/// Carlo for sampled representations.
DivergenceEstimate f_divergence_estimate(const PredictiveDistribution& m, const PredictiveDistribution& m_star,
                                         const FDivergenceSpec& spec, const DivergenceOptions& options = {});
double f_divergence(const PredictiveDistribution& m, const PredictiveDistribution& m_star,
                    const FDivergenceSpec& spec, const DivergenceOptions& options = {});

/// Monte Carlo divergence when only log(m/m_star) is available. KL draws from m;
/// a generic f draws from m_star. Draw n uses substream n of (seed, 0). Terms carry
/// a zero-mean ratio control variate, so each is nonnegative.
DivergenceEstimate divergence_from_log_ratio(const std::function<Eigen::VectorXd(RngStream&)>& sample_m,
                                             const std::function<Eigen::VectorXd(RngStream&)>& sample_m_star,
                                             const std::function<double(const Eigen::VectorXd&)>& log_ratio,
                                             const FDivergenceSpec& spec, int draws, std::uint64_t seed);

/// log of max(x, 1e-300).
double floored_log(double x) noexcept;
inline constexpr double kDensityFloor = 1e-300;

// ---------------------------------------------------------------- closed forms

template <typename Scalar>
Scalar kl_gaussian(const BasicGaussian1D<Scalar>& a, const BasicGaussian1D<Scalar>& b) {
  using std::log;
  if (!(a.variance > Scalar(0)) || !(b.variance > Scalar(0)))
    throw Error(ErrorCode::InvalidVariance, "kl_gaussian needs positive variances");
  const Scalar d = a.mean - b.mean;
  return Scalar(0.5) * ((a.variance + d * d) / b.variance - Scalar(1) - log(a.variance / b.variance));
}

/// g(x) = x - ln x - 1.
template <typename Scalar>
Scalar g_function(Scalar x) {
  using std::log;
  return x - log(x) - Scalar(1);
}

/// h(x, y) = x ln(x/y) + (1-x) ln((1-x)/(1-y)), with 0 ln 0 = 0.
template <typename Scalar>
Scalar bernoulli_kl(Scalar x, Scalar y) {
  using std::log;
  if (!(y > Scalar(0) && y < Scalar(1))) {
    if (x == y) return Scalar(0);
    throw Error(ErrorCode::NonFiniteDivergence, "bernoulli_kl reference probability on the boundary");
  }
  Scalar out(0);
  if (x > Scalar(0)) out += x * log(x / y);
  if (x < Scalar(1)) out += (Scalar(1) - x) * log((Scalar(1) - x) / (Scalar(1) - y));
  return out;
}

/// KL of the predictive N(m1 + theta m2, 1 + s1^2 + theta^2 s2^2) from N(m1, 1 + s1^2).
template <typename Scalar>
Scalar contaminated_gate_divergence(Scalar sigma1, Scalar m2, Scalar sigma2, Scalar theta) {
  using std::log1p;
  const Scalar base = Scalar(1) + sigma1 * sigma1;
  const Scalar t2 = theta * theta;
  return Scalar(0.5) * (t2 * (sigma2 * sigma2 + m2 * m2) / base - log1p(t2 * sigma2 * sigma2 / base));
}

/// Gate divergence for the assumption omega_i = omega_star (i is 1-based):
/// N(m1 + m2, s1^2 + s2^2) against N(m_{-i} + omega_star, s_{-i}^2).
template <typename Scalar>
Scalar calibration_divergence(const std::array<Scalar, 2>& m, const std::array<Scalar, 2>& sigma, int i,
                              Scalar omega_star) {
  using std::log;
  if (i != 1 && i != 2) throw Error(ErrorCode::InvalidParameter, "calibration index must be 1 or 2");
  if (!(sigma[0] > Scalar(0)) || !(sigma[1] > Scalar(0)))
    throw Error(ErrorCode::InvalidVariance, "calibration_divergence needs positive sds");
  const Scalar total = sigma[0] * sigma[0] + sigma[1] * sigma[1];
  const Scalar other = sigma[i == 1 ? 1 : 0] * sigma[i == 1 ? 1 : 0];
  const Scalar d = m[static_cast<std::size_t>(i - 1)] - omega_star;
  return Scalar(0.5) * ((total + d * d) / other - log(total / other) - Scalar(1));
}

/// Divergence of the exclusion assumption omega_2 = 0.
double heckman_S(const HeckmanBelief& belief, double theta);
/// Divergence of the random-entry assumption theta* = 0.
double heckman_R(const HeckmanBelief& belief, double theta, const QuadratureRule& rule = default_hermite());
/// The entry-equation term of heckman_R, integrated over u by the Hermite rule.
double heckman_entry_divergence(double theta, const QuadratureRule& rule = default_hermite());

}  // namespace alab
