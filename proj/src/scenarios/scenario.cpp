#include <algorithm>
#include <cmath>
#include <limits>

#include "alab/scenarios.hpp"

namespace alab {

// ---------------------------------------------------------------- assumption

Assumption Assumption::context(double theta, std::string label) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "context assumption outside [0,1]");
  Assumption a;
  a.kind = Kind::Context;
  a.theta_value = theta;
  a.label = std::move(label);
  return a;
}

Assumption Assumption::fixed_parameter(int index, ValueRule rule, double value, std::string label) {
  if (index < 0) throw Error(ErrorCode::InvalidParameter, "fixed-parameter index must be nonnegative");
  Assumption a;
  a.kind = Kind::FixedParameter;
  a.index = index;
  a.rule = rule;
  a.value = value;
  a.label = label.empty() ? "omega" + std::to_string(index + 1) + "*" : std::move(label);
  return a;
}

double Assumption::resolved_value(const BeliefState& belief) const {
  if (kind != Kind::FixedParameter) throw Error(ErrorCode::InvalidParameter, "context assumptions have no parameter value");
  if (rule == ValueRule::Constant) return value;
  const Eigen::VectorXd m = belief_means(belief);
  if (index >= m.size()) throw Error(ErrorCode::InvalidParameter, "assumption index out of range");
  return m[index];
}

// ---------------------------------------------------------------- theta region

ThetaRegion ThetaRegion::interval(double hi, double lo) {
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidParameter, "theta interval reversed");
  return ThetaRegion{{{std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)}}};
}

ThetaRegion ThetaRegion::indicator(const std::vector<double>& grid, const std::vector<char>& inside) {
  if (grid.size() != inside.size() || grid.empty())
    throw Error(ErrorCode::InvalidParameter, "indicator region needs one flag per grid point");
  ThetaRegion r;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!inside[k]) continue;
    const double lo = k == 0 ? 0.0 : 0.5 * (grid[k - 1] + grid[k]);
    const double hi = k + 1 == grid.size() ? 1.0 : 0.5 * (grid[k] + grid[k + 1]);
    if (!r.intervals.empty() && r.intervals.back().second == lo) r.intervals.back().second = hi;
    else r.intervals.emplace_back(lo, hi);
  }
  return r;
}

bool ThetaRegion::contains(double theta) const {
  return std::any_of(intervals.begin(), intervals.end(),
                     [&](const auto& iv) { return theta >= iv.first && theta <= iv.second; });
}

double ThetaRegion::mass(const ContextDistribution& dist) const {
  return expect([](double) { return 1.0; }, dist);
}

namespace {
// A region made only of isolated points is read as the limit of shrinking
// intervals around them, i.e. equal point masses.
bool point_region(const ThetaRegion& r) {
  return !r.intervals.empty() &&
         std::all_of(r.intervals.begin(), r.intervals.end(), [](const auto& iv) { return iv.first == iv.second; });
}
}  // namespace

double ThetaRegion::conditional_mean(const ContextDistribution& dist) const {
  const double m = mass(dist);
  if (!(m > 0.0) && point_region(*this) && dist.kind() != ContextDistribution::Kind::Discrete) {
    double acc = 0.0;
    for (const auto& iv : intervals) acc += iv.first;
    return acc / static_cast<double>(intervals.size());
  }
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroMassRegion, "theta region has zero probability");
  if (dist.kind() == ContextDistribution::Kind::Uniform01) {
    double first = 0.0;
    for (const auto& [lo, hi] : intervals) first += 0.5 * (hi * hi - lo * lo);
    return first / m;
  }
  return expect([](double t) { return t; }, dist) / m;
}

std::vector<std::pair<double, double>> ThetaRegion::conditional_nodes(const ContextDistribution& dist,
                                                                       int per_interval) const {
  std::vector<std::pair<double, double>> out;
  if (dist.kind() == ContextDistribution::Kind::Discrete) {
    for (std::size_t k = 0; k < dist.points().size(); ++k)
      if (contains(dist.points()[k]) && dist.weights()[k] > 0.0) out.emplace_back(dist.points()[k], dist.weights()[k]);
  } else {
    const QuadratureRule base = QuadratureRule::gauss_legendre(per_interval, 0.0, 1.0);
    for (const auto& [lo, hi] : intervals) {
      if (!(hi > lo)) continue;
      const QuadratureRule r = base.on_interval(lo, hi);
      for (Eigen::Index k = 0; k < r.size(); ++k) {
        const double w = r.weights[k] * dist.pdf(r.nodes[k]);
        if (w > 0.0) out.emplace_back(r.nodes[k], w);
      }
    }
  }
  if (out.empty() && point_region(*this) && dist.kind() != ContextDistribution::Kind::Discrete)
    for (const auto& iv : intervals) out.emplace_back(iv.first, 1.0);
  double total = 0.0;
  for (const auto& nw : out) total += nw.second;
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroMassRegion, "theta region has zero probability");
  for (auto& nw : out) nw.second /= total;
  return out;
}

double ThetaRegion::upper() const { return intervals.empty() ? 0.0 : intervals.back().second; }

// ---------------------------------------------------------------- scenario base

void Scenario::set_gate_space(Space space) {
  if (space == Space::SAndU && latent_dim_ == 0)
    throw Error(ErrorCode::UnsupportedSpace, name_ + " has no latent variable");
  gate_space_ = space;
}

void Scenario::validate_true_state(const TrueState& state) const {
  if (state.omega.size() != omega_dim())
    throw Error(ErrorCode::OutOfDomain, name_ + " needs " + std::to_string(omega_dim()) + " true parameters");
  for (int i = 0; i < omega_dim(); ++i)
    if (!(state.omega[i] >= omega_lo_[i] && state.omega[i] <= omega_hi_[i]))
      throw Error(ErrorCode::OutOfDomain, omega_name(i) + " outside [" + std::to_string(omega_lo_[i]) + ", " +
                                              std::to_string(omega_hi_[i]) + "]");
}

double Scenario::likelihood(const Eigen::VectorXd& s, const Assumption& assumption, const Eigen::VectorXd& omega,
                            double theta, const BeliefState& belief) const {
  if (assumption.is_context()) return likelihood(s, assumption.theta_value, omega);
  Eigen::VectorXd w = omega;
  w[assumption.index] = assumption.resolved_value(belief);
  return likelihood(s, theta, w);
}

std::vector<std::pair<Eigen::VectorXd, double>> Scenario::discretize(const BeliefState&, double, int) const {
  throw Error(ErrorCode::UnsupportedMode, name_ + " does not discretize its statistic");
}

BeliefState Scenario::point_belief(const Eigen::VectorXd&) const {
  throw Error(ErrorCode::UnsupportedMode, name_ + " has no long-run analysis");
}

double Scenario::berk_objective(const Eigen::VectorXd&, const TrueState&, const ThetaRegion&) const {
  throw Error(ErrorCode::UnsupportedMode, name_ + " has no long-run analysis");
}

Eigen::VectorXd Scenario::active_means(const BeliefState& belief) const {
  const Eigen::VectorXd m = belief_means(belief);
  Eigen::VectorXd out(static_cast<Eigen::Index>(q_star_.size()));
  for (std::size_t k = 0; k < q_star_.size(); ++k) out[static_cast<Eigen::Index>(k)] = m[q_star_[k]];
  return out;
}

double Scenario::log_conditional(int, const Eigen::VectorXd&) const {
  throw Error(ErrorCode::UnsupportedMode, name_ + " does not expose conditional densities");
}

Eigen::VectorXd Scenario::node_values(const Sample& sample, double theta, const Eigen::VectorXd& omega) const {
  if (!dag_) throw Error(ErrorCode::UnsupportedMode, name_ + " declares no DAG");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dag_->size());
  if (theta_node_ >= 0) x[theta_node_] = theta;
  for (std::size_t k = 0; k < latent_nodes_.size(); ++k) x[latent_nodes_[k]] = sample.u[static_cast<Eigen::Index>(k)];
  for (std::size_t k = 0; k < omega_nodes_.size(); ++k) x[omega_nodes_[k]] = omega[static_cast<Eigen::Index>(k)];
  for (std::size_t k = 0; k < stat_nodes_.size(); ++k) x[stat_nodes_[k]] = sample.s[static_cast<Eigen::Index>(k)];
  return x;
}

void Scenario::declare_dag(const std::vector<std::vector<std::string>>& statistic_parents) {
  DagModel g;
  theta_node_ = theta_star_ ? g.add_node("theta", NodeRole::Context) : -1;
  latent_nodes_.clear();
  omega_nodes_.clear();
  stat_nodes_.clear();
  for (int k = 0; k < latent_dim_; ++k)
    latent_nodes_.push_back(g.add_node(latent_dim_ == 1 ? "u" : "u" + std::to_string(k + 1), NodeRole::Latent));
  for (int i = 0; i < omega_dim(); ++i) omega_nodes_.push_back(g.add_node(omega_name(i), NodeRole::Parameter));
  for (int j = 0; j < statistic_dim_; ++j)
    stat_nodes_.push_back(g.add_node(statistic_dim_ == 1 ? "s" : "s" + std::to_string(j + 1), NodeRole::Statistic));
  for (int j = 0; j < statistic_dim_; ++j)
    for (const auto& p : statistic_parents.at(static_cast<std::size_t>(j))) g.add_edge(g.index(p), stat_nodes_[static_cast<std::size_t>(j)]);
  g.check_acyclic();
  dag_ = std::move(g);
}

// ---------------------------------------------------------------- factory

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"contaminated-gaussian", "contaminated-binary",
                                                 "confounded-causal",     "instrumental-variables",
                                                 "calibration",           "heckman-selection"};
  return names;
}

std::unique_ptr<Scenario> make_scenario(const std::string& name) {
  if (name == "contaminated-gaussian") return make_contaminated_gaussian();
  if (name == "contaminated-binary") return make_contaminated_binary();
  if (name == "confounded-causal") return make_confounded_causal();
  if (name == "instrumental-variables") return make_instrumental_variables();
  if (name == "calibration") return make_calibration();
  if (name == "heckman-selection") return make_heckman_selection();
  throw Error(ErrorCode::ConfigError, "unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------- validation

namespace {

Eigen::VectorXd random_omega(const Scenario& sc, RngStream& rng) {
  Eigen::VectorXd w(sc.omega_dim());
  for (int i = 0; i < sc.omega_dim(); ++i) {
    const double lo = std::max(sc.omega_lo()[i], -1.0), hi = std::min(sc.omega_hi()[i], 1.0);
    w[i] = lo + (hi - lo) * (0.1 + 0.8 * rng.uniform());
  }
  return w;
}

double nudge(const Scenario& sc, int i, double x, double step) {
  return x + step <= sc.omega_hi()[i] ? x + step : x - step;
}

std::vector<Eigen::VectorXd> probe_statistics(const Scenario& sc, const Eigen::VectorXd& omega, double theta, int n,
                                              RngStream& rng) {
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < n; ++k) out.push_back(sc.sample(TrueState{omega}, theta, rng).s);
  return out;
}

}  // namespace

std::vector<int> active_parameters(const Scenario& sc, std::uint64_t seed) {
  if (!sc.theta_star()) throw Error(ErrorCode::InvalidParameter, sc.name() + " has no context assumption");
  const double ts = *sc.theta_star();
  RngStream rng(seed, 0);
  std::vector<char> active(static_cast<std::size_t>(sc.omega_dim()), 0);
  for (int rep = 0; rep < 3; ++rep) {
    const Eigen::VectorXd w = random_omega(sc, rng);
    const auto probes = probe_statistics(sc, w, ts, 40, rng);
    for (int i = 0; i < sc.omega_dim(); ++i) {
      Eigen::VectorXd w2 = w;
      w2[i] = nudge(sc, i, w[i], 0.1);
      for (const auto& s : probes) {
        const double a = sc.likelihood(s, ts, w), b = sc.likelihood(s, ts, w2);
        if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)})) {
          active[static_cast<std::size_t>(i)] = 1;
          break;
        }
      }
    }
  }
  std::vector<int> found;
  for (int i = 0; i < sc.omega_dim(); ++i)
    if (active[static_cast<std::size_t>(i)]) found.push_back(i);
  if (found != sc.declared_q_star()) {
    std::string msg = sc.name() + ": probe finds active set {";
    for (std::size_t k = 0; k < found.size(); ++k) msg += (k ? "," : "") + std::to_string(found[k] + 1);
    throw Error(ErrorCode::QStarMismatch, msg + "} but the declaration differs");
  }
  return found;
}

BeliefState random_history_belief(const Scenario& sc, const TrueState& state, int length, RngStream& stream) {
  BeliefState b = sc.prior();
  const auto& menu = sc.assumption_menu();
  for (int t = 0; t < length; ++t) {
    const double theta = sc.uses_context() ? sc.context().sample(stream) : 0.0;
    const Sample smp = sc.sample(state, theta, stream);
    b = sc.update_as_if(b, smp.s, menu[static_cast<std::size_t>(t) % menu.size()], theta);
  }
  return b;
}

RegularityReport regularity_check(const Scenario& sc, int probes, std::uint64_t seed) {
  RegularityReport r;
  r.proper_subset = static_cast<int>(sc.declared_q_star().size()) < sc.omega_dim();
  if (!sc.theta_star()) return r;
  const double ts = *sc.theta_star();
  const Assumption& a = sc.assumption_menu().front();
  const FDivergenceSpec kl = FDivergenceSpec::kl();
  RngStream rng(seed, 0);
  r.divergence_increasing = true;
  for (int p = 0; p < probes && r.divergence_increasing; ++p) {
    const BeliefState b = random_history_belief(sc, TrueState{random_omega(sc, rng)}, 1 + p % 7, rng);
    double prev = sc.gate_divergence(b, 0.0, a, kl).value;
    for (int k = 1; k <= 100; ++k) {
      const double d = sc.gate_divergence(b, k / 100.0, a, kl).value;
      if (!(d > prev)) {
        r.divergence_increasing = false;
        break;
      }
      prev = d;
    }
  }
  const Eigen::VectorXd w = random_omega(sc, rng);
  const auto s_probes = probe_statistics(sc, w, ts, 40, rng);
  for (int j : sc.question()) {
    Eigen::VectorXd wp = w, wm = w;
    wp[j] += 1e-5;
    wm[j] -= 1e-5;
    for (const auto& s : s_probes)
      if (std::abs(sc.likelihood(s, ts, wp) - sc.likelihood(s, ts, wm)) / 2e-5 > 1e-8) r.sensitive = true;
  }
  return r;
}

double predictive_tv_distance(const Scenario& sc, const Eigen::VectorXd& a, const Eigen::VectorXd& b, int draws,
                              std::uint64_t seed) {
  const double ts = sc.theta_star().value_or(0.0);
  RngStream rng(seed, 0);
  double acc = 0.0;
  for (int n = 0; n < draws; ++n) {
    const Eigen::VectorXd s = sc.sample(TrueState{a}, ts, rng).s;
    const double pa = sc.likelihood(s, ts, a);
    const double pb = sc.likelihood(s, ts, b);
    acc += std::abs(1.0 - pb / pa);
  }
  return 0.5 * acc / draws;
}

std::vector<std::pair<int, int>> dag_violations(const Scenario& sc, int probes, std::uint64_t seed) {
  if (!sc.dag()) throw Error(ErrorCode::UnsupportedMode, sc.name() + " declares no DAG");
  const DagModel& g = *sc.dag();
  RngStream rng(seed, 0);
  std::vector<std::pair<int, int>> bad;
  for (int p = 0; p < probes; ++p) {
    const Eigen::VectorXd w = random_omega(sc, rng);
    const double theta = 0.1 + 0.8 * rng.uniform();
    const Sample smp = sc.sample(TrueState{w}, theta, rng);
    const Eigen::VectorXd x = sc.node_values(smp, theta, w);
    for (int j = 0; j < sc.statistic_dim(); ++j) {
      const int node = sc.statistic_node(j);
      if (std::isnan(x[node])) continue;
      const double base = sc.log_conditional(j, x);
      for (int v = 0; v < g.size(); ++v) {
        if (v == node || g.has_edge(v, node) || std::isnan(x[v])) continue;
        Eigen::VectorXd y = x;
        if (g.role(v) == NodeRole::Context) y[v] = x[v] < 0.5 ? x[v] + 0.3 : x[v] - 0.3;
        else if (g.role(v) == NodeRole::Statistic && (x[v] == 0.0 || x[v] == 1.0)) y[v] = 1.0 - x[v];
        else if (g.role(v) == NodeRole::Parameter) {
          int i = 0;
          while (sc.omega_node(i) != v) ++i;
          y[v] = nudge(sc, i, x[v], 0.05);
        }
        else y[v] = x[v] + 0.37;
        const double moved = sc.log_conditional(j, y);
        if (std::abs(moved - base) > 1e-10 * std::max(1.0, std::abs(base)) &&
            std::find(bad.begin(), bad.end(), std::make_pair(node, v)) == bad.end())
          bad.emplace_back(node, v);
      }
    }
  }
  return bad;
}

// ---------------------------------------------------------------- belief operations

BeliefState update_as_if(const BeliefState& belief, const Eigen::VectorXd& statistic, const Scenario& scenario,
                         const Assumption& assumption, double theta) {
  return scenario.update_as_if(belief, statistic, assumption, theta);
}

PredictiveDistribution predictive(const BeliefState& belief, const Scenario& scenario, double theta, Space space) {
  return scenario.predictive(belief, theta, space);
}

double martingale_check(const BeliefState& belief, const Scenario& scenario, const ParameterBox& event,
                        std::optional<double> measure_theta, int bins) {
  const auto& menu = scenario.assumption_menu();
  const auto it = std::find_if(menu.begin(), menu.end(), [](const Assumption& a) { return a.is_context(); });
  if (it == menu.end()) throw Error(ErrorCode::UnsupportedMode, scenario.name() + " has no context assumption");
  const double theta = measure_theta.value_or(it->theta_value);
  const double before = box_probability(belief, event.lo, event.hi);
  double after = 0.0;
  for (const auto& [s, p] : scenario.discretize(belief, theta, bins))
    after += p * box_probability(scenario.update_as_if(belief, s, *it, theta), event.lo, event.hi);
  return std::abs(after - before);
}

BeliefState replay(const BeliefState& prior, const History& history, const Scenario& scenario) {
  BeliefState b = prior;
  for (const auto& e : history) {
    if (e.action != 1) continue;
    const int k = e.assumption < 0 ? 0 : e.assumption;
    b = scenario.update_as_if(b, e.statistic, scenario.assumption_menu().at(static_cast<std::size_t>(k)), e.theta);
  }
  return b;
}

}  // namespace alab
