#include "alab/distributions.hpp"

#include <Eigen/Eigenvalues>

#include <numeric>
#include <sstream>

namespace alab {

NormalPdfCdf std_normal_pdf_cdf(double x) {
  if (std::isnan(x)) throw Error(ErrorCode::InvalidParameter, "std_normal_pdf_cdf of NaN");
  return {std_normal_pdf(x), std_normal_cdf(x)};
}

double std_normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

double inverse_mills(int i) {
  if (i != 0 && i != 1) throw Error(ErrorCode::InvalidParameter, "inverse_mills index must be 0 or 1");
  const double c = -static_cast<double>(i);
  // 1 - Phi(c) = Phi(-c)
  return std_normal_pdf(c) / std_normal_cdf(-c);
}

// ---------------------------------------------------------------- quadrature

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are mu0
// times the squared first eigenvector components.
QuadratureRule golub_welsch(QuadratureKind kind, const Eigen::VectorXd& off_diag, double mu0) {
  const Eigen::Index n = off_diag.size() + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    jacobi(k, k + 1) = off_diag[k];
    jacobi(k + 1, k) = off_diag[k];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.kind = kind;
  rule.nodes = solver.eigenvalues();
  rule.weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
  // both weight functions are symmetric, so symmetrise away the solver's rounding
  for (Eigen::Index k = 0; k < n / 2; ++k) {
    const Eigen::Index j = n - 1 - k;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[j] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[j] = x;
    rule.weights[k] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

QuadratureRule QuadratureRule::gauss_hermite(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "quadrature needs at least one node");
  // probabilists' Hermite recurrence: beta_k = k
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  QuadratureRule rule = golub_welsch(QuadratureKind::GaussHermite, off, 1.0);
  rule.weights /= rule.weights.sum();
  rule.lower = -std::numeric_limits<double>::infinity();
  rule.upper = std::numeric_limits<double>::infinity();
  return rule;
}

QuadratureRule QuadratureRule::gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "quadrature needs at least one node");
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    off[k - 1] = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  QuadratureRule rule = golub_welsch(QuadratureKind::GaussLegendre, off, 2.0);
  rule.lower = -1.0;
  rule.upper = 1.0;
  return rule.on_interval(a, b);
}

QuadratureRule QuadratureRule::on_interval(double a, double b) const {
  if (kind != QuadratureKind::GaussLegendre)
    throw Error(ErrorCode::InvalidParameter, "only Legendre rules can be remapped");
  if (!(b >= a)) throw Error(ErrorCode::InvalidParameter, "quadrature interval reversed");
  QuadratureRule out = *this;
  const double scale = (b - a) / (upper - lower);
  out.nodes = (nodes.array() - lower) * scale + a;
  out.weights = weights * scale;
  out.lower = a;
  out.upper = b;
  return out;
}

const QuadratureRule& default_hermite() {
  static const QuadratureRule rule = QuadratureRule::gauss_hermite(kDefaultHermiteNodes);
  return rule;
}

const QuadratureRule& default_legendre() {
  static const QuadratureRule rule = QuadratureRule::gauss_legendre(kDefaultLegendreNodes, 0.0, 1.0);
  return rule;
}

// ---------------------------------------------------------------- rng

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t replication_index)
    : RngStream(master_seed, replication_index,
                splitmix64_mix(splitmix64_mix(master_seed) ^ splitmix64_mix(replication_index + kGoldenGamma))) {}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t replication_index, std::uint64_t key)
    : master_seed_(master_seed), replication_index_(replication_index), key_(key) {}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * kGoldenGamma);
}

double RngStream::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phase = 6.283185307179586477 * u2;
  spare_ = r * std::sin(phase);
  has_spare_ = true;
  return r * std::cos(phase);
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(master_seed_, replication_index_,
                   splitmix64_mix(key_ ^ splitmix64_mix(index * kGoldenGamma + 0x632BE59BD9B4E019ULL)));
}

// ---------------------------------------------------------------- context

ContextDistribution ContextDistribution::uniform01() { return ContextDistribution{}; }

ContextDistribution ContextDistribution::beta(double a, double b) {
  if (!(a >= 1.0) || !(b >= 1.0) || !std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorCode::InvalidParameter, "beta context needs finite a, b >= 1");
  ContextDistribution d;
  d.kind_ = Kind::Beta;
  d.a_ = a;
  d.b_ = b;
  d.log_beta_norm_ = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return d;
}

ContextDistribution ContextDistribution::discrete(std::vector<double> points, std::vector<double> weights) {
  if (points.empty() || points.size() != weights.size())
    throw Error(ErrorCode::InvalidParameter, "discrete context needs matching nonempty points and weights");
  double total = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!(points[k] >= 0.0 && points[k] <= 1.0))
      throw Error(ErrorCode::InvalidParameter, "discrete context point outside [0,1]");
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k]))
      throw Error(ErrorCode::InvalidParameter, "discrete context weight negative");
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidParameter, "discrete context weights must sum to 1");
  for (double& w : weights) w /= total;
  ContextDistribution d;
  d.kind_ = Kind::Discrete;
  d.points_ = std::move(points);
  d.weights_ = std::move(weights);
  return d;
}

double ContextDistribution::pdf(double x) const {
  if (x < 0.0 || x > 1.0) return 0.0;
  switch (kind_) {
    case Kind::Uniform01: return 1.0;
    case Kind::Beta: {
      if ((x == 0.0 && a_ > 1.0) || (x == 1.0 && b_ > 1.0)) return 0.0;
      const double lx = x > 0.0 ? std::log(x) : 0.0;
      const double l1x = x < 1.0 ? std::log1p(-x) : 0.0;
      return std::exp((a_ - 1.0) * lx + (b_ - 1.0) * l1x - log_beta_norm_);
    }
    case Kind::Discrete: return 0.0;
  }
  return 0.0;
}

double ContextDistribution::cdf(double x) const {
  if (x <= 0.0) {
    if (kind_ != Kind::Discrete || x < 0.0) return 0.0;
  }
  if (x >= 1.0) return 1.0;
  switch (kind_) {
    case Kind::Uniform01: return x;
    case Kind::Beta: return expect_on([](double) { return 1.0; }, 0.0, x);
    case Kind::Discrete: {
      double acc = 0.0;
      for (std::size_t k = 0; k < points_.size(); ++k)
        if (points_[k] <= x) acc += weights_[k];
      return acc;
    }
  }
  return 0.0;
}

double ContextDistribution::mean() const {
  switch (kind_) {
    case Kind::Uniform01: return 0.5;
    case Kind::Beta: return a_ / (a_ + b_);
    case Kind::Discrete: return std::inner_product(points_.begin(), points_.end(), weights_.begin(), 0.0);
  }
  return 0.5;
}

double ContextDistribution::sample(RngStream& stream) const {
  switch (kind_) {
    case Kind::Uniform01: return stream.uniform();
    case Kind::Beta: {
      const double x = draw_gamma(stream, a_);
      const double y = draw_gamma(stream, b_);
      return x / (x + y);
    }
    case Kind::Discrete: {
      Eigen::Map<const Eigen::VectorXd> w(weights_.data(), static_cast<Eigen::Index>(weights_.size()));
      return points_[draw_index(stream, w)];
    }
  }
  return 0.0;
}

std::string ContextDistribution::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Uniform01: os << "uniform01"; break;
    case Kind::Beta: os << "beta(" << a_ << "," << b_ << ")"; break;
    case Kind::Discrete: os << "discrete(" << points_.size() << " points)"; break;
  }
  return os.str();
}

double truncated_mean(const ContextDistribution& dist, double cutoff) {
  if (std::isnan(cutoff)) throw Error(ErrorCode::InvalidParameter, "cutoff is NaN");
  cutoff = std::min(cutoff, 1.0);
  const double mass = dist.cdf(cutoff);
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroMassCutoff, "P(theta <= cutoff) is zero");
  if (dist.kind() == ContextDistribution::Kind::Uniform01) return 0.5 * cutoff;
  const double first = dist.expect_on([](double t) { return t; }, 0.0, cutoff);
  if (dist.kind() == ContextDistribution::Kind::Discrete) return first / mass;
  return first / dist.expect_on([](double) { return 1.0; }, 0.0, cutoff);
}

// ---------------------------------------------------------------- draws

double draw(RngStream& stream, const GaussianDraw& dist) {
  if (!(dist.sd >= 0.0) || !std::isfinite(dist.mean))
    throw Error(ErrorCode::InvalidParameter, "gaussian draw needs finite mean and sd >= 0");
  return dist.mean + dist.sd * stream.standard_normal();
}

int draw(RngStream& stream, const BernoulliDraw& dist) {
  if (!(dist.p >= 0.0 && dist.p <= 1.0))
    throw Error(ErrorCode::InvalidParameter, "bernoulli p outside [0,1]");
  return stream.uniform() < dist.p ? 1 : 0;
}

double draw(RngStream& stream, const ContextDistribution& dist) { return dist.sample(stream); }

double draw_gamma(RngStream& stream, double shape) {
  if (!(shape >= 1.0)) throw Error(ErrorCode::InvalidParameter, "gamma shape must be >= 1");
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.standard_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::size_t draw_index(RngStream& stream, const Eigen::Ref<const Eigen::VectorXd>& weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorCode::InvalidParameter, "draw_index needs positive finite total weight");
  const double target = stream.uniform() * total;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (target < acc) return static_cast<std::size_t>(k);
  }
  // rounding can leave target marginally above the running sum; take the last positive cell
  for (Eigen::Index k = weights.size() - 1; k >= 0; --k)
    if (weights[k] > 0.0) return static_cast<std::size_t>(k);
  return 0;
}

}  // namespace alab
