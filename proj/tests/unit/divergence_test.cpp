#include <doctest.h>

#include <array>
#include <cmath>

#include "alab/divergence.hpp"
#include "alab/io.hpp"
#include "oracles.hpp"

using namespace alab;

namespace {
PredictiveDistribution gauss(double m, double v) { return {Gaussian1D(m, v), Space::SOnly}; }
PredictiveDistribution bern(double p) { return {BernoulliPredictive{p}, Space::SOnly}; }
}  // namespace

TEST_CASE("divergence of a distribution against itself is zero") {
  for (const auto& name : divergence_names()) {
    const auto spec = divergence_by_name(name);
    CHECK(f_divergence(gauss(0.3, 1.4), gauss(0.3, 1.4), spec) <= 1e-9);
    CHECK(f_divergence(bern(0.3), bern(0.3), spec) <= 1e-12);
  }
  CHECK(bernoulli_kl(0.5, 0.5) == 0.0);
}

TEST_CASE("gaussian KL values") {
  CHECK(kl_gaussian(Gaussian1D(1, 1), Gaussian1D(0, 1)) == doctest::Approx(0.5));
  CHECK(kl_gaussian(Gaussian1D(0, 2), Gaussian1D(0, 1)) == doctest::Approx(0.5 * (1.0 - std::log(2.0))));
  CHECK(kl_gaussian(Gaussian1D(0, 2), Gaussian1D(0, 1)) ==
        doctest::Approx(oracle::gaussian_kl_quadrature(0, 2, 0, 1)).epsilon(1e-9));
  CHECK(f_divergence(gauss(0, 1), gauss(1, 1), FDivergenceSpec::kl()) == doctest::Approx(0.5));
  CHECK(f_divergence(bern(0.2), bern(0.6), FDivergenceSpec::kl()) ==
        doctest::Approx(oracle::bernoulli_kl(0.2, 0.6)).epsilon(1e-14));
}

TEST_CASE("generic f-divergences on gaussians match quadrature") {
  const auto hel = divergence_by_name("squared-hellinger");
  const double v = f_divergence(gauss(0.0, 1.0), gauss(1.0, 1.0), hel);
  // affinity of two unit-variance normals one apart is exp(-1/8)
  CHECK(v == doctest::Approx(2.0 * (1.0 - std::exp(-0.125))).epsilon(1e-8));
  const auto chi = divergence_by_name("chi-squared");
  CHECK(f_divergence(gauss(0.0, 1.0), gauss(0.5, 1.0), chi) == doctest::Approx(std::exp(0.25) - 1.0).epsilon(1e-8));
}

TEST_CASE("f-divergence spec validation") {
  CHECK_THROWS_AS(FDivergenceSpec::generic([](double x) { return x; }), Error);
  CHECK_THROWS_AS(FDivergenceSpec::generic([](double x) { return -(x - 1) * (x - 1); }), Error);
  CHECK_THROWS_AS(FDivergenceSpec::generic({}), Error);
  const auto f = FDivergenceSpec::generic([](double x) { return (x - 1) * (x - 1); }, "pearson");
  CHECK(f.name() == "pearson");
  CHECK(f.f(1.0) == 0.0);
  CHECK_THROWS_AS(divergence_by_name("renyi"), Error);
}

TEST_CASE("support mismatches are rejected") {
  CHECK_THROWS_AS(f_divergence(gauss(0, 1), bern(0.5), FDivergenceSpec::kl()), Error);
  auto a = gauss(0, 1), b = gauss(0, 1);
  b.over = Space::SAndU;
  CHECK_THROWS_AS(f_divergence(a, b, FDivergenceSpec::kl()), Error);
}

TEST_CASE("contaminated gate divergence") {
  CHECK(contaminated_gate_divergence(1.0, 0.7, 0.8, 0.0) == 0.0);
  const double s2 = 0.8, m2 = 0.7, th = 0.6;
  CHECK(contaminated_gate_divergence(0.0, m2, s2, th) ==
        doctest::Approx(0.5 * ((s2 * s2 + m2 * m2) * th * th - std::log1p(th * th * s2 * s2))));
  CHECK(contaminated_gate_divergence(1.0, 0.0, 1.0, 1.0) ==
        doctest::Approx(oracle::gaussian_kl_quadrature(0.0, 3.0, 0.0, 2.0)).epsilon(1e-9));
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double sg1 = 0.1 + 0.02 * k, mm2 = -1.0 + 0.021 * k, sg2 = 0.05 + 0.015 * k, t = 0.01 * k;
    const double quad = oracle::gaussian_kl_quadrature(0.3 + t * mm2, 1 + sg1 * sg1 + t * t * sg2 * sg2, 0.3, 1 + sg1 * sg1);
    worst = std::max(worst, std::abs(quad - contaminated_gate_divergence(sg1, mm2, sg2, t)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("calibration divergence") {
  const std::array<double, 2> m{0.3, -0.4}, one{1.0, 1.0};
  CHECK(calibration_divergence(m, one, 1, 0.3) == doctest::Approx(0.5 * (1.0 - std::log(2.0))));
  for (double w = -1.0; w <= 1.0; w += 0.05)
    CHECK(calibration_divergence(m, one, 1, w) >= calibration_divergence(m, one, 1, 0.3) - 1e-15);
  CHECK(calibration_divergence<double>(m, {1e-7, 1.0}, 1, 0.3) <= 1e-12);
  CHECK_THROWS_AS(calibration_divergence<double>(m, {0.0, 1.0}, 1, 0.3), Error);
  CHECK_THROWS_AS(calibration_divergence(m, one, 3, 0.3), Error);
  // against quadrature of the two predictives
  const std::array<double, 2> sg{0.7, 1.3};
  const double quad = oracle::gaussian_kl_quadrature(m[0] + m[1], 0.49 + 1.69, m[1] + 0.1, 1.69);
  CHECK(calibration_divergence(m, sg, 1, 0.1) == doctest::Approx(quad).epsilon(1e-9));
}

TEST_CASE("selection-model divergences") {
  HeckmanBelief b;
  b.mean << 0.0, 0.0, 0.0;
  b.variance << 1.0, 1e-12, 1.0;
  CHECK(heckman_S(b, 0.5) <= 1e-10);
  b.variance << 1.0, 1.0, 1.0;
  b.mean << 0.0, 0.5, 1.0;
  CHECK(heckman_R(b, 0.0) <= 1e-14);
  double prev_s = heckman_S(b, 0.0), prev_r = heckman_R(b, 0.0);
  for (int k = 1; k <= 100; ++k) {
    const double t = k / 100.0;
    const double s = heckman_S(b, t), r = heckman_R(b, t);
    CHECK(s < prev_s);
    CHECK(r > prev_r);
    prev_s = s;
    prev_r = r;
  }
  CHECK_THROWS_AS(heckman_S(b, 1.5), Error);
  HeckmanBelief bad = b;
  bad.variance[0] = 0.0;
  CHECK_THROWS_AS(heckman_S(bad, 0.5), Error);
}

TEST_CASE("selection-model divergences against simulation") {
  const oracle::HeckmanBeliefValues v{0.0, 0.5, 1.0, 1.0, 1.0, 1.0};
  HeckmanBelief b;
  b.mean << 0.0, 0.5, 1.0;
  b.variance << 1.0, 1.0, 1.0;
  const auto s = oracle::heckman_exclusion(v, 0.5, 400000, 5);
  CHECK(std::abs(s.mean - heckman_S(b, 0.5)) <= 4.0 * s.se);
  const auto r = oracle::heckman_random_entry(v, 0.5, 400000, 6);
  CHECK(std::abs(r.mean - heckman_R(b, 0.5)) <= 4.0 * r.se);
}

TEST_CASE("joint convexity on sampled triples") {
  RngStream rng(12, 0);
  for (int k = 0; k < 50; ++k) {
    const double lam = rng.uniform();
    const double p1 = rng.uniform(), p2 = rng.uniform(), q1 = rng.uniform(), q2 = rng.uniform();
    const double mix = bernoulli_kl(lam * p1 + (1 - lam) * p2, lam * q1 + (1 - lam) * q2);
    CHECK(mix <= lam * bernoulli_kl(p1, q1) + (1 - lam) * bernoulli_kl(p2, q2) + 1e-12);
  }
}

TEST_CASE("monte carlo divergence is reproducible and close to the closed form") {
  auto sampler = [](double m) {
    return [m](RngStream& s) { return Eigen::VectorXd::Constant(1, m + s.standard_normal()); };
  };
  auto log_ratio = [](const Eigen::VectorXd& x) {
    return Gaussian1D(0.5, 1.0).log_pdf(x[0]) - Gaussian1D(0.0, 1.0).log_pdf(x[0]);
  };
  const auto a = divergence_from_log_ratio(sampler(0.5), sampler(0.0), log_ratio, FDivergenceSpec::kl(), 20000, 3);
  const auto b = divergence_from_log_ratio(sampler(0.5), sampler(0.0), log_ratio, FDivergenceSpec::kl(), 20000, 3);
  CHECK(a.value == b.value);
  CHECK(std::abs(a.value - 0.125) <= 4.0 * a.std_error);
  CHECK_THROWS_AS(divergence_from_log_ratio(sampler(0.5), sampler(0.0), log_ratio, FDivergenceSpec::kl(), 1, 3), Error);
}
