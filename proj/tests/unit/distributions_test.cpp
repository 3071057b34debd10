#include <doctest.h>

#include <cmath>
#include <vector>

#include "alab/distributions.hpp"
#include "alab/divergence.hpp"
#include "oracles.hpp"

using namespace alab;

TEST_CASE("normal pdf and cdf") {
  const auto z = std_normal_pdf_cdf(0.0);
  CHECK(z.pdf == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(z.cdf == 0.5);
  CHECK(std_normal_cdf(40.0) == 1.0);
  CHECK(std_normal_cdf(1.0) == doctest::Approx(0.841345).epsilon(1e-6));
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(std::abs(std_normal_cdf(x) - oracle::normal_cdf(x)) <= 1e-12);
    CHECK(std_normal_pdf(x) == doctest::Approx(std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
  }
}

TEST_CASE("inverse mills ratios") {
  CHECK(inverse_mills(0) == doctest::Approx(2.0 * std_normal_pdf(0.0)).epsilon(1e-14));
  CHECK(inverse_mills(0) == doctest::Approx(0.797885).epsilon(1e-6));
  CHECK(inverse_mills(1) == doctest::Approx(oracle::inverse_mills(1)).epsilon(1e-12));
  CHECK(inverse_mills(1) == doctest::Approx(0.287600).epsilon(1e-5));
  CHECK(inverse_mills(1) < inverse_mills(0));
  CHECK_THROWS_AS(inverse_mills(2), Error);
}

TEST_CASE("gaussian variance must be positive") {
  CHECK_THROWS_AS(Gaussian1D(0.0, 0.0), Error);
  CHECK_THROWS_AS(Gaussian1D(0.0, -1.0), Error);
  const Gaussian1D g(0.3, 2.0);
  const double mass = oracle::integrate([&](double x) { return g.pdf(x); }, -30.0, 30.0);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("quadrature integrates polynomials exactly") {
  const auto leg = QuadratureRule::gauss_legendre(10, 0.0, 1.0);
  CHECK(leg.nodes.size() == leg.weights.size());
  for (int d = 0; d <= 19; ++d)
    CHECK(integrate([&](double x) { return std::pow(x, d); }, leg) == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
  const auto her = QuadratureRule::gauss_hermite(12);
  double moment = 1.0;  // E[Z^d] = (d-1)!!
  for (int d = 0; d <= 22; d += 2) {
    CHECK(integrate([&](double x) { return std::pow(x, d); }, her) == doctest::Approx(moment).epsilon(1e-10));
    moment *= d + 1;
  }
  CHECK(integrate([](double x) { return x * x * x; }, her) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gaussian_expectation([](double x) { return x * x; }, 1.5, 2.0, default_hermite()) ==
        doctest::Approx(2.0 + 2.25));
  CHECK(integrate([](double) { return 1.0; }, default_legendre()) == doctest::Approx(1.0));
}

TEST_CASE("integrate rejects non-finite integrands") {
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / (x - x); }, default_legendre()), Error);
}

TEST_CASE("quadrature KL matches the closed form") {
  const Gaussian1D a(0.4, 1.7), b(-0.2, 1.1);
  const double quad =
      gaussian_expectation([&](double x) { return a.log_pdf(x) - b.log_pdf(x); }, a.mean, a.variance, default_hermite());
  CHECK(quad == doctest::Approx(kl_gaussian(a, b)).epsilon(1e-10));
  const double self =
      gaussian_expectation([&](double x) { return a.log_pdf(x) - a.log_pdf(x); }, a.mean, a.variance, default_hermite());
  CHECK(std::abs(self) <= 1e-10);
}

TEST_CASE("truncated mean") {
  const auto u = ContextDistribution::uniform01();
  CHECK(truncated_mean(u, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(truncated_mean(u, 0.4) == doctest::Approx(0.2).epsilon(1e-12));
  const auto b = ContextDistribution::beta(2.0, 2.0);
  CHECK(truncated_mean(b, 0.5) == doctest::Approx(oracle::beta_truncated_mean(2.0, 2.0, 0.5)).epsilon(1e-9));
  CHECK(std::abs(truncated_mean(b, 1.0) - b.mean()) <= 1e-9);
  const auto b3 = ContextDistribution::beta(2.0, 5.0);
  CHECK(std::abs(truncated_mean(b3, 1.0) - 2.0 / 7.0) <= 1e-9);
  CHECK_THROWS_AS(truncated_mean(u, 0.0), Error);
  const auto d = ContextDistribution::discrete({0.2, 0.8}, {0.25, 0.75});
  CHECK(truncated_mean(d, 0.5) == doctest::Approx(0.2));
  CHECK(d.mean() == doctest::Approx(0.65));
}

TEST_CASE("context distributions validate their parameters") {
  CHECK_THROWS_AS(ContextDistribution::beta(0.5, 2.0), Error);
  CHECK_THROWS_AS(ContextDistribution::discrete({0.2, 1.5}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(ContextDistribution::discrete({0.2, 0.5}, {0.5, 0.6}), Error);
  const auto b = ContextDistribution::beta(2.0, 3.0);
  for (double x = 0.0; x <= 1.0; x += 0.05) CHECK(b.pdf(x) >= 0.0);
}

TEST_CASE("degenerate bernoulli draws") {
  RngStream s(3, 0);
  for (int k = 0; k < 100; ++k) {
    CHECK(draw(s, BernoulliDraw{1.0}) == 1);
    CHECK(draw(s, BernoulliDraw{0.0}) == 0);
  }
  CHECK_THROWS_AS(draw(s, BernoulliDraw{1.5}), Error);
}

TEST_CASE("gaussian sample mean within its CLT bound") {
  RngStream s(99, 4);
  const int n = 1000000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += draw(s, GaussianDraw{2.0, 3.0});
  CHECK(std::abs(sum / n - 2.0) <= 4.0 * 3.0 / 1000.0);
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.standard_normal(), y = b.standard_normal(), z = c.standard_normal();
    CHECK(x == y);
    differs = differs || x != z;
  }
  CHECK(differs);
  RngStream p(5, 0);
  const RngStream q = p.substream(3);
  const auto before = p.counter();
  RngStream r = p.substream(3), q2 = q;
  CHECK(p.counter() == before);
  CHECK(r.next_u64() == q2.next_u64());
  for (int k = 0; k < 10000; ++k) {
    const double u = p.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("context draws match the cdf") {
  for (const auto& dist : {ContextDistribution::uniform01(), ContextDistribution::beta(2.0, 5.0)}) {
    RngStream s(8, 1);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = draw(s, dist);
    CHECK(ks_statistic(xs, [&](double x) { return dist.cdf(x); }) <= 0.01);
  }
}

TEST_CASE("gamma and index draws") {
  RngStream s(1, 1);
  double sum = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) sum += draw_gamma(s, 3.0);
  CHECK(std::abs(sum / n - 3.0) <= 4.0 * std::sqrt(3.0 / n));
  Eigen::VectorXd w(3);
  w << 0.0, 1.0, 0.0;
  for (int k = 0; k < 50; ++k) CHECK(draw_index(s, w) == 1u);
}
