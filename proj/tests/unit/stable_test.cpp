#include <doctest.h>

#include <cmath>

#include "alab/io.hpp"
#include "alab/stable.hpp"
#include "oracles.hpp"

using namespace alab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

StableOptions quick() {
  StableOptions o;
  o.starts = 6;
  o.scan_points = 41;
  o.threads = 1;
  return o;
}

// point-like threshold of the gaussian experiment; it ignores the active mean
double gaussian_cutoff(const Scenario& sc, double K) { return theta_bar(sc.point_belief(vec({0.0})), sc, K); }

}  // namespace

TEST_CASE("objective vanishes at the truth on a null-friction region") {
  auto sc = make_contaminated_gaussian();
  const TrueState truth{vec({0.2, 0.5})};
  CHECK(berk_objective(*sc, vec({0.2}), truth, ThetaRegion::interval(1e-9)) <= 1e-12);
  CHECK_THROWS_AS(berk_objective(*sc, vec({0.2}), truth, ThetaRegion{}), Error);
}

TEST_CASE("binary objective is a bernoulli KL") {
  auto sc = make_contaminated_binary();
  const TrueState truth{vec({0.7, 0.3})};
  const auto region = ThetaRegion::interval(0.6);
  const double p = 0.7 - 0.4 * 0.3;
  for (double w = 0.1; w < 0.9; w += 0.07)
    CHECK(berk_objective(*sc, vec({w}), truth, region) == doctest::Approx(oracle::bernoulli_kl(p, w)).epsilon(1e-9));
  CHECK(berk_minimizer(*sc, truth, region)[0] == doctest::Approx(p).epsilon(1e-6));
}

TEST_CASE("gaussian minimizer is shifted by the truncated context mean") {
  auto sc = make_contaminated_gaussian();
  const TrueState truth{vec({0.2, 0.5})};
  const auto region = ThetaRegion::interval(0.4);
  CHECK(berk_minimizer(*sc, truth, region)[0] == doctest::Approx(0.2 + 0.2 * 0.5).epsilon(1e-6));
}

TEST_CASE("objective is convex in the active parameter") {
  for (const auto& name : {"contaminated-gaussian"}) {
    auto sc = make_scenario(name);
    const TrueState truth = default_true_state(name);
    const auto region = sc->uses_context() ? ThetaRegion::interval(0.5) : ThetaRegion::interval(1.0);
    const int d = static_cast<int>(sc->declared_q_star().size());
    RngStream rng(4, 0);
    for (int k = 0; k < 30; ++k) {
      Eigen::VectorXd a(d), b(d);
      for (int i = 0; i < d; ++i) {
        a[i] = 2.0 * rng.uniform() - 1.0;
        b[i] = 2.0 * rng.uniform() - 1.0;
      }
      const double mid = berk_objective(*sc, 0.5 * (a + b), truth, region);
      CHECK_MESSAGE(mid <= 0.5 * (berk_objective(*sc, a, truth, region) + berk_objective(*sc, b, truth, region)) + 1e-12,
                    name);
    }
  }
}

TEST_CASE("gaussian stable belief is unique and biased by the friction") {
  auto sc = make_contaminated_gaussian();
  const double K = 0.1;
  const double expect = 0.2 + truncated_mean(sc->context(), gaussian_cutoff(*sc, K)) * 0.5;
  const TrueState truth{vec({0.2, 0.5})};
  StableOptions o = quick();
  o.starts = 3;
  o.scan_points = 11;
  const auto rep = solve_stable(*sc, truth, K, {}, o);
  REQUIRE(rep.candidates.size() == 1u);
  CHECK(rep.candidates[0].omega_hat[0] == doctest::Approx(expect).epsilon(1e-8));
  CHECK(rep.candidates[0].attracting);
  const auto cert = certitude_report(*sc, rep, truth, 1e-3);
  CHECK(cert.biased[0]);
  CHECK(cert.bias[0][0] == doctest::Approx(expect - 0.2).epsilon(1e-8));

  const TrueState clean{vec({0.2, 0.0})};
  const auto rep0 = solve_stable(*sc, clean, K, {}, o);
  REQUIRE(rep0.candidates.size() == 1u);
  CHECK(rep0.candidates[0].omega_hat[0] == doctest::Approx(0.2).epsilon(1e-8));
  CHECK_FALSE(certitude_report(*sc, rep0, clean, 1e-3).biased[0]);
}

TEST_CASE("every friction-carrying true state gives certitude") {
  auto sc = make_contaminated_gaussian();
  std::vector<TrueState> states;
  for (double w1 : {-0.5, 0.5})
    for (double w2 : {-0.5, 0.25, 0.5}) states.push_back(TrueState{vec({w1, w2})});
  StableOptions o = quick();
  o.starts = 2;
  o.scan_points = 0;
  CHECK(certitude_fraction(*sc, 0.1, states, 1e-3, o) == 1.0);
}

TEST_CASE("binary experiment has a central and an upper stable belief") {
  auto sc = make_contaminated_binary();
  const TrueState truth{vec({0.7, 0.3})};
  const auto rep = solve_stable(*sc, truth, 1e-3, {}, quick());
  CHECK(rep.attracting_count() >= 2);
  bool central = false, upper = false;
  for (const auto& c : rep.candidates) {
    if (!c.attracting) continue;
    const double x = c.omega_hat[0];
    central = central || std::abs(x - 0.5) < 1e-6;
    upper = upper || x > 0.6;
    const double tb = c.region.upper();
    CHECK(std::abs(x - (truncated_mean(sc->context(), tb) * (0.3 - 0.7) + 0.7)) <= 1e-8);
    REQUIRE(c.slope.has_value());
    CHECK(std::abs(*c.slope) < 1.0);
  }
  CHECK(central);
  CHECK(upper);
}

TEST_CASE("expected belief drift points toward each attracting point") {
  auto sc = make_contaminated_binary();
  const TrueState truth{vec({0.7, 0.3})};
  const double K = 1e-3;
  const auto rep = solve_stable(*sc, truth, K, {}, quick());
  const auto prior = std::get<GridBelief>(sc->prior());
  const auto& blk0 = prior.block(prior.block_of(0));
  REQUIRE(blk0.rank() == 1);
  const Eigen::VectorXd axis = blk0.axes()[0];
  auto belief_at = [&](double c) {
    const Eigen::VectorXd w = (-(axis.array() - c).square() / (2.0 * 0.01 * 0.01)).exp();
    std::vector<GridBlock> blocks{GridBlock::product({0}, {axis}, {w})};
    for (const auto& b : prior.blocks())
      if (b.coords() != std::vector<int>{0}) blocks.push_back(b);
    return BeliefState(GridBelief(2, blocks));
  };
  auto drift = [&](const BeliefState& b) {
    const double m = belief_means(b)[0];
    const double up = belief_means(update_as_if(b, vec({1.0}), *sc, sc->assumption_menu()[0], 0.0))[0] - m;
    const double down = belief_means(update_as_if(b, vec({0.0}), *sc, sc->assumption_menu()[0], 0.0))[0] - m;
    double acc = 0.0;
    const int n = 2000;
    for (int k = 0; k < n; ++k) {
      const double th = (k + 0.5) / n;
      if (!gate(b, *sc, th, K).research()) continue;
      const double p = (1 - th) * 0.7 + th * 0.3;
      acc += p * up + (1 - p) * down;
    }
    return acc / n;
  };
  int tested = 0;
  for (const auto& c : rep.candidates) {
    if (!c.attracting) continue;
    const double x = c.omega_hat[0], d = 0.01;
    CHECK(drift(belief_at(x + d)) < 0.0);
    CHECK(drift(belief_at(x - d)) > 0.0);
    ++tested;
  }
  CHECK(tested >= 2);
}

TEST_CASE("dispersed priors spread across the active range") {
  auto sc = make_contaminated_binary();
  const double lo = belief_means(dispersed_prior(*sc, 0, 10))[0];
  const double hi = belief_means(dispersed_prior(*sc, 9, 10))[0];
  CHECK(lo < 0.3);
  CHECK(hi > 0.7);
}

TEST_CASE("regions of the self-consistency map") {
  auto sc = make_contaminated_gaussian();
  const auto r = induced_region(*sc, sc->point_belief(vec({0.1})), 0.1);
  REQUIRE(r.intervals.size() == 1u);
  CHECK(r.intervals[0].first == 0.0);
  CHECK(r.contains(0.0));
  CHECK(r.mass(sc->context()) == doctest::Approx(r.upper()));
  const auto ind = ThetaRegion::indicator({0.0, 0.5, 1.0}, {1, 0, 1});
  CHECK(ind.contains(0.1));
  CHECK_FALSE(ind.contains(0.5));
  CHECK(ind.contains(0.9));
}
