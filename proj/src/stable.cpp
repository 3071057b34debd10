#include "alab/stable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace alab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct ActiveBox {
  Eigen::VectorXd lo, hi;
};

ActiveBox active_box(const Scenario& sc) {
  const auto& q = sc.declared_q_star();
  ActiveBox b{Eigen::VectorXd(static_cast<Eigen::Index>(q.size())), Eigen::VectorXd(static_cast<Eigen::Index>(q.size()))};
  for (std::size_t k = 0; k < q.size(); ++k) {
    b.lo[static_cast<Eigen::Index>(k)] = sc.omega_lo()[q[k]];
    b.hi[static_cast<Eigen::Index>(k)] = sc.omega_hi()[q[k]];
  }
  return b;
}

bool inside(const ActiveBox& b, const Eigen::VectorXd& x) {
  return ((x.array() >= b.lo.array()) && (x.array() <= b.hi.array())).all();
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Bisection on a central-difference derivative; the objective is convex here.
double minimize_scalar(const std::function<double(double)>& f, double lo, double hi) {
  const double h = 1e-5 * (hi - lo);
  auto deriv = [&](double x) {
    const double a = std::max(lo, x - h), b = std::min(hi, x + h);
    return (f(b) - f(a)) / (b - a);
  };
  if (deriv(lo) >= 0.0) return lo;
  if (deriv(hi) <= 0.0) return hi;
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b - a > 1e-14 * (hi - lo); ++it) {
    const double mid = 0.5 * (a + b);
    (deriv(mid) < 0.0 ? a : b) = mid;
  }
  return 0.5 * (a + b);
}

Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const ActiveBox& box) {
  const Eigen::Index n = box.lo.size();
  auto F = [&](const Eigen::VectorXd& x) { return inside(box, x) ? f(x) : kInf; };
  std::vector<Eigen::VectorXd> simplex;
  const Eigen::VectorXd centre = 0.5 * (box.lo + box.hi);
  simplex.push_back(centre);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = centre;
    v[i] += 0.2 * (box.hi[i] - box.lo[i]);
    simplex.push_back(v);
  }
  std::vector<double> fv;
  for (const auto& v : simplex) fv.push_back(F(v));
  std::vector<std::size_t> order(simplex.size());
  for (int it = 0; it < 20000; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    double diam = 0.0;
    for (const auto& v : simplex) diam = std::max(diam, max_abs(v - simplex[best]));
    if (fv[worst] - fv[best] <= 1e-13 * (1.0 + std::abs(fv[best])) && diam <= 1e-9) break;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < simplex.size(); ++k)
      if (k != worst) c += simplex[k];
    c /= static_cast<double>(n);
    const Eigen::VectorXd xr = c + (c - simplex[worst]);
    const double fr = F(xr);
    if (fr < fv[best]) {
      const Eigen::VectorXd xe = c + 2.0 * (c - simplex[worst]);
      const double fe = F(xe);
      if (fe < fr) simplex[worst] = xe, fv[worst] = fe;
      else simplex[worst] = xr, fv[worst] = fr;
    } else if (fr < fv[second]) {
      simplex[worst] = xr, fv[worst] = fr;
    } else {
      const Eigen::VectorXd xc = fr < fv[worst] ? Eigen::VectorXd(c + 0.5 * (xr - c)) : Eigen::VectorXd(c + 0.5 * (simplex[worst] - c));
      const double fc = F(xc);
      if (fc < std::min(fr, fv[worst])) {
        simplex[worst] = xc, fv[worst] = fc;
      } else {
        for (std::size_t k = 0; k < simplex.size(); ++k) {
          if (k == best) continue;
          simplex[k] = simplex[best] + 0.5 * (simplex[k] - simplex[best]);
          fv[k] = F(simplex[k]);
        }
      }
    }
  }
  return simplex[static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin())];
}

}  // namespace

double berk_objective(const Scenario& scenario, const Eigen::VectorXd& omega_prime, const TrueState& truth,
                      const ThetaRegion& region) {
  if (omega_prime.size() != static_cast<Eigen::Index>(scenario.declared_q_star().size()))
    throw Error(ErrorCode::InvalidParameter, "omega' must list the active coordinates");
  return scenario.berk_objective(omega_prime, truth, region);
}

ThetaRegion induced_region(const Scenario& scenario, const BeliefState& belief, double K, const FDivergenceSpec& spec) {
  if (std::isinf(K)) return ThetaRegion::interval(1.0);
  try {
    return ThetaRegion::interval(theta_bar(belief, scenario, K, spec));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonMonotone) throw;
  }
  std::vector<double> grid(201);
  std::vector<char> in(201);
  for (int k = 0; k <= 200; ++k) {
    grid[k] = k / 200.0;
    in[k] = gate(belief, scenario, grid[k], K, spec).research();
  }
  return ThetaRegion::indicator(grid, in);
}

Eigen::VectorXd berk_minimizer(const Scenario& scenario, const TrueState& truth, const ThetaRegion& region) {
  const ActiveBox box = active_box(scenario);
  auto f = [&](const Eigen::VectorXd& x) { return scenario.berk_objective(x, truth, region); };
  if (box.lo.size() == 1) {
    Eigen::VectorXd x(1);
    const double r = minimize_scalar(
        [&](double v) {
          Eigen::VectorXd p(1);
          p[0] = v;
          return f(p);
        },
        box.lo[0], box.hi[0]);
    x[0] = r;
    return x;
  }
  return nelder_mead(f, box);
}

Eigen::VectorXd stable_map(const Scenario& scenario, const TrueState& truth, double K, const Eigen::VectorXd& omega_hat,
                           const FDivergenceSpec& spec) {
  const BeliefState point = scenario.point_belief(omega_hat);
  return berk_minimizer(scenario, truth, induced_region(scenario, point, K, spec));
}

int StableBeliefReport::attracting_count() const {
  return static_cast<int>(std::count_if(candidates.begin(), candidates.end(), [](const auto& c) { return c.attracting; }));
}

StableBeliefReport solve_stable(const Scenario& scenario, const TrueState& truth, double K,
                                const std::vector<Eigen::VectorXd>& starts_in, const StableOptions& o) {
  if (!scenario.theta_star()) throw Error(ErrorCode::UnsupportedMode, scenario.name() + " has no context assumption");
  scenario.validate_true_state(truth);
  const ActiveBox box = active_box(scenario);
  const Eigen::Index d = box.lo.size();
  auto map = [&](const Eigen::VectorXd& x) { return stable_map(scenario, truth, K, x, o.divergence); };

  std::vector<Eigen::VectorXd> starts = starts_in;
  if (starts.empty()) {
    // Latin hypercube: one point per stratum on every axis
    const int n = std::max(1, o.starts);
    RngStream rng(o.seed, 0);
    std::vector<std::vector<int>> perm(static_cast<std::size_t>(d), std::vector<int>(static_cast<std::size_t>(n)));
    for (auto& p : perm) {
      std::iota(p.begin(), p.end(), 0);
      for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.next_u64() % static_cast<std::uint64_t>(i + 1)]);
    }
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd x(d);
      for (Eigen::Index k = 0; k < d; ++k) {
        const double jitter = d == 1 ? 0.5 : rng.uniform();
        x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * (perm[static_cast<std::size_t>(k)][i] + jitter) / n;
      }
      starts.push_back(x);
    }
  }

  StableBeliefReport report;
  report.K = K;
  report.starts.resize(starts.size());
  parallel_for(static_cast<int>(starts.size()), o.threads, [&](int i) {
    StartOutcome& out = report.starts[static_cast<std::size_t>(i)];
    out.start = starts[static_cast<std::size_t>(i)];
    Eigen::VectorXd x = out.start;
    try {
      double prev_step = std::numeric_limits<double>::infinity();
      for (out.iterations = 1; out.iterations <= o.max_iterations; ++out.iterations) {
        const Eigen::VectorXd next = map(x);
        const double step = max_abs(next - x);
        x = next;
        // the map is only resolved to the theta_bar bisection tolerance; a
        // contraction keeps shrinking its steps, noise at that floor does not
        const bool at_floor = step <= 1e-10 && (step >= prev_step || out.iterations >= 100);
        prev_step = step;
        if (step <= o.tolerance || at_floor) {
          out.converged = true;
          break;
        }
      }
      if (!out.converged) out.error = to_string(ErrorCode::NoConvergence);
    } catch (const Error& e) {
      out.error = e.what();
    }
    out.end = x;
  });

  std::vector<Eigen::VectorXd> roots;
  for (const auto& s : report.starts)
    if (s.converged) roots.push_back(s.end);

  if (d == 1 && o.scan_points > 0) {
    // repellers are invisible to iteration; find them as sign changes of map(x) - x
    const int n = std::max(3, o.scan_points);
    std::vector<double> xs(static_cast<std::size_t>(n)), gs(static_cast<std::size_t>(n));
    parallel_for(n, o.threads, [&](int k) {
      Eigen::VectorXd x(1);
      x[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * k / (n - 1);
      xs[static_cast<std::size_t>(k)] = x[0];
      gs[static_cast<std::size_t>(k)] = map(x)[0] - x[0];
    });
    auto g = [&](double v) {
      Eigen::VectorXd x(1);
      x[0] = v;
      return map(x)[0] - v;
    };
    for (int k = 0; k < n; ++k) {
      if (gs[k] == 0.0) roots.push_back(Eigen::VectorXd::Constant(1, xs[k]));
      if (k + 1 < n && gs[k] * gs[k + 1] < 0.0) {
        // Illinois regula falsi: bracketing like bisection, superlinear on smooth maps
        double a = xs[k], b = xs[k + 1], ga = gs[k], gb = gs[k + 1];
        int side = 0;
        for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
          double c = b - gb * (b - a) / (gb - ga);
          if (!(c > a && c < b)) c = 0.5 * (a + b);
          const double gc = g(c);
          if (std::abs(gc) <= 1e-15) {
            a = b = c;
            break;
          }
          if ((gc < 0.0) == (ga < 0.0)) {
            a = c, ga = gc;
            if (side == -1) gb *= 0.5;
            side = -1;
          } else {
            b = c, gb = gc;
            if (side == 1) ga *= 0.5;
            side = 1;
          }
        }
        roots.push_back(Eigen::VectorXd::Constant(1, 0.5 * (a + b)));
      }
    }
  }

  for (const auto& r : roots) {
    auto it = std::find_if(report.candidates.begin(), report.candidates.end(),
                           [&](const StableCandidate& c) { return max_abs(c.omega_hat - r) <= 1e-6; });
    if (it != report.candidates.end()) continue;
    StableCandidate c;
    c.omega_hat = r;
    c.region = induced_region(scenario, scenario.point_belief(r), K, o.divergence);
    c.objective = scenario.berk_objective(r, truth, c.region);
    c.residual = max_abs(map(r) - r);
    if (c.residual > 1e-6) continue;  // a jump of the map, not a fixed point
    report.candidates.push_back(std::move(c));
  }
  for (auto& c : report.candidates) {
    for (const auto& s : report.starts)
      if (s.converged && max_abs(s.end - c.omega_hat) <= 1e-6) ++c.starts_converged;
    if (d == 1) {
      const double h = 1e-6 * (box.hi[0] - box.lo[0]);
      const double a = std::max(box.lo[0], c.omega_hat[0] - h), b = std::min(box.hi[0], c.omega_hat[0] + h);
      c.slope = (map(Eigen::VectorXd::Constant(1, b))[0] - map(Eigen::VectorXd::Constant(1, a))[0]) / (b - a);
      c.attracting = std::abs(*c.slope) < 1.0;
      c.classification = "slope";
    } else {
      c.attracting = c.starts_converged > 0;
      c.classification = "iteration";
    }
  }
  std::sort(report.candidates.begin(), report.candidates.end(),
            [](const StableCandidate& a, const StableCandidate& b) { return a.omega_hat[0] < b.omega_hat[0]; });
  return report;
}

CertitudeSummary certitude_report(const Scenario& scenario, const StableBeliefReport& report, const TrueState& truth,
                                  double tolerance) {
  const auto& q = scenario.declared_q_star();
  CertitudeSummary out;
  bool any_attracting = false, all_biased = true;
  for (const auto& c : report.candidates) {
    Eigen::VectorXd bias(static_cast<Eigen::Index>(scenario.question().size()));
    for (std::size_t k = 0; k < scenario.question().size(); ++k) {
      const int j = scenario.question()[k];
      const auto pos = std::find(q.begin(), q.end(), j) - q.begin();
      bias[static_cast<Eigen::Index>(k)] = c.omega_hat[pos] - truth.omega[j];
    }
    const bool biased = max_abs(bias) > tolerance;
    out.bias.push_back(bias);
    out.biased.push_back(biased);
    if (c.attracting) {
      any_attracting = true;
      all_biased = all_biased && biased;
    }
  }
  out.every_attractor_biased = any_attracting && all_biased;
  return out;
}

double certitude_fraction(const Scenario& scenario, double K, const std::vector<TrueState>& states, double tolerance,
                          const StableOptions& options) {
  if (states.empty()) return 0.0;
  int flagged = 0;
  for (const auto& st : states)
    flagged += certitude_report(scenario, solve_stable(scenario, st, K, {}, options), st, tolerance).every_attractor_biased;
  return static_cast<double>(flagged) / static_cast<double>(states.size());
}

BasinEstimate simulate_convergence(const Scenario& scenario, const TrueState& truth, double K,
                                   const StableBeliefReport& report, int replications, int horizon, std::uint64_t seed,
                                   std::function<BeliefState(int)> prior, LearnerMode mode, double radius) {
  RunOptions o;
  o.K = K;
  o.horizon = horizon;
  o.replications = replications;
  o.mode = mode;
  o.seed = seed;
  o.record_rows = false;
  o.track_theta_bar = false;
  o.prior = std::move(prior);
  const auto traces = run(scenario, truth, o);
  BasinEstimate out;
  out.frequency.assign(report.candidates.size(), 0.0);
  for (const auto& tr : traces) {
    const Eigen::VectorXd m = scenario.active_means(tr.final_belief);
    out.terminal_means.push_back(m);
    double best = kInf;
    int which = -1;
    // repellers are reached with probability zero
    for (std::size_t c = 0; c < report.candidates.size(); ++c) {
      if (!report.candidates[c].attracting) continue;
      const double dist = (report.candidates[c].omega_hat - m).norm();
      if (dist < best) best = dist, which = static_cast<int>(c);
    }
    if (which >= 0 && best <= radius) out.frequency[static_cast<std::size_t>(which)] += 1.0;
    else out.unclassified += 1.0;
  }
  const double n = static_cast<double>(traces.size());
  for (auto& f : out.frequency) f /= n;
  out.unclassified /= n;
  return out;
}

BeliefState dispersed_prior(const Scenario& scenario, int replication, int replications, double spread) {
  const int coord = scenario.declared_q_star().front();
  const double lo = scenario.omega_lo()[coord], hi = scenario.omega_hi()[coord];
  const double centre = lo + (hi - lo) * (replication % replications + 0.5) / replications;
  const double sd = spread * (hi - lo);
  BeliefState p = scenario.prior();
  if (auto* g = std::get_if<GridBelief>(&p)) {
    const int b = g->block_of(coord);
    const GridBlock& blk = g->block(b);
    const Eigen::VectorXd x = blk.points().col(blk.local_axis(coord));
    const Eigen::VectorXd tilt = (-(x.array() - centre).square() / (2.0 * sd * sd)).exp();
    return g->with_block(b, blk.with_mass(blk.mass().cwiseProduct(tilt)));
  }
  auto& gb = std::get<GaussianBelief>(p);
  Eigen::VectorXd m = gb.mean();
  m[coord] = centre;
  return GaussianBelief(m, gb.covariance(), gb.frozen());
}

}  // namespace alab
