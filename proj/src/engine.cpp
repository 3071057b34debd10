#include "alab/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace alab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_K(double K) {
  if (!(K > 0.0)) throw Error(ErrorCode::InvalidParameter, "K must be positive");
}
}  // namespace

const char* to_string(LearnerMode mode) noexcept {
  switch (mode) {
    case LearnerMode::AssumptionBased: return "assumption-based";
    case LearnerMode::MisspecifiedBayesian: return "misspecified-bayesian";
    case LearnerMode::CorrectBayesian: return "correct-bayesian";
  }
  return "?";
}

LearnerMode parse_mode(const std::string& text) {
  for (auto m : {LearnerMode::AssumptionBased, LearnerMode::MisspecifiedBayesian, LearnerMode::CorrectBayesian})
    if (text == to_string(m)) return m;
  throw Error(ErrorCode::UnsupportedMode, "unknown learner mode '" + text + "'");
}

GateDecision gate(const BeliefState& belief, const Scenario& scenario, double theta, double K,
                  const FDivergenceSpec& spec) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "theta outside [0,1]");
  check_K(K);
  GateDecision g;
  g.K = K;
  const auto& menu = scenario.assumption_menu();
  int best = -1;
  for (std::size_t k = 0; k < menu.size(); ++k) {
    const double d = scenario.gate_divergence(belief, theta, menu[k], spec).value;
    if (!std::isfinite(d)) throw Error(ErrorCode::NonFiniteDivergence, "gate divergence is not finite");
    g.divergences.push_back(d);
    if (best < 0 || d < g.divergences[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  // a tie at exactly K still researches
  if (best >= 0 && g.divergences[static_cast<std::size_t>(best)] <= K) g.chosen = best;
  return g;
}

double theta_bar(const BeliefState& belief, const Scenario& scenario, double K, const FDivergenceSpec& spec,
                 int assumption) {
  check_K(K);
  const Assumption& a = scenario.assumption_menu().at(static_cast<std::size_t>(assumption));
  auto D = [&](double th) { return scenario.gate_divergence(belief, th, a, spec).value; };
  constexpr int kProbe = 100;
  std::vector<double> d(kProbe + 1);
  for (int k = 0; k <= kProbe; ++k) {
    d[k] = D(static_cast<double>(k) / kProbe);
    if (!std::isfinite(d[k])) throw Error(ErrorCode::NonFiniteDivergence, "gate divergence is not finite");
    if (k > 0 && d[k] < d[k - 1] - 1e-12 * (1.0 + std::abs(d[k - 1])))
      throw Error(ErrorCode::NonMonotone, "gate divergence decreases near theta=" + std::to_string(k / 100.0));
  }
  if (d[kProbe] <= K) return 1.0;
  int k = 0;
  while (d[k] <= K) ++k;
  if (k == 0) return 0.0;
  double lo = static_cast<double>(k - 1) / kProbe, hi = static_cast<double>(k) / kProbe;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (D(mid) <= K ? lo : hi) = mid;
  }
  return lo;
}

int worker_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ASSUMPTION_LAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  const int workers = std::min(worker_count(threads), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {
bool tracks_theta_bar(const Scenario& scenario, const RunOptions& o) {
  if (o.track_theta_bar) return *o.track_theta_bar;
  return o.mode == LearnerMode::AssumptionBased && scenario.assumption_menu().size() == 1 &&
         (scenario.name() == "contaminated-gaussian" || scenario.name() == "contaminated-binary");
}
}  // namespace

TraceRow step(StepState& state, const Scenario& scenario, const TrueState& truth, const RunOptions& o, int t,
              RngStream& stream, HistoryEntry* history_out) {
  TraceRow row;
  row.t = t;
  const double theta = draw(stream, scenario.context());
  row.theta = theta;
  const auto& menu = scenario.assumption_menu();
  row.divergences.assign(menu.size(), kNaN);
  if (tracks_theta_bar(scenario, o) && std::isfinite(o.K)) {
    if (!state.theta_bar) state.theta_bar = theta_bar(state.belief, scenario, o.K, o.divergence);
    row.theta_bar = *state.theta_bar;
  }
  int chosen = -1;
  if (o.mode == LearnerMode::CorrectBayesian) {
    chosen = 0;
  } else {
    const double K = o.mode == LearnerMode::MisspecifiedBayesian ? kInfiniteK : o.K;
    if (std::isinf(K) && menu.size() == 1) {
      chosen = 0;  // gate vacuous
    } else {
      const GateDecision g = gate(state.belief, scenario, theta, K, o.divergence);
      row.divergences = g.divergences;
      chosen = g.chosen.value_or(-1);
    }
  }
  if (chosen >= 0) {
    const Sample smp = scenario.sample(truth, theta, stream);
    row.s = smp.s;
    row.action = 1;
    if (o.mode == LearnerMode::CorrectBayesian) {
      state.belief = scenario.update_true(state.belief, smp.s, theta);
    } else {
      row.assumption = chosen;
      state.belief = scenario.update_as_if(state.belief, smp.s, menu[static_cast<std::size_t>(chosen)], theta);
    }
    state.theta_bar.reset();
  } else {
    row.s = Eigen::VectorXd::Constant(scenario.statistic_dim(), kNaN);
  }
  if (history_out) *history_out = HistoryEntry{theta, row.action, row.assumption, row.action ? row.s : Eigen::VectorXd()};
  row.means = belief_means(state.belief);
  row.sds = belief_sds(state.belief);
  return row;
}

Trace run_replication(const Scenario& scenario, const TrueState& truth, const RunOptions& o, int replication) {
  if (o.horizon < 1) throw Error(ErrorCode::InvalidParameter, "horizon must be at least 1");
  scenario.validate_true_state(truth);
  Trace tr;
  tr.scenario = scenario.name();
  tr.seed = o.seed;
  tr.replication = replication;
  tr.K = o.mode == LearnerMode::MisspecifiedBayesian ? kInfiniteK : o.K;
  tr.mode = o.mode;
  StepState state{o.prior ? o.prior(replication) : scenario.prior(), std::nullopt};
  const RngStream base(o.seed, static_cast<std::uint64_t>(replication));
  if (o.record_rows) tr.rows.reserve(static_cast<std::size_t>(o.horizon));
  for (int t = 1; t <= o.horizon; ++t) {
    RngStream period = base.substream(static_cast<std::uint64_t>(t));
    HistoryEntry entry;
    TraceRow row = step(state, scenario, truth, o, t, period, o.keep_history ? &entry : nullptr);
    tr.research_periods += row.action;
    if (o.keep_history) tr.history.push_back(std::move(entry));
    if (o.record_rows) tr.rows.push_back(std::move(row));
  }
  tr.final_belief = std::move(state.belief);
  return tr;
}

std::vector<Trace> run_range(const Scenario& scenario, const TrueState& truth, const RunOptions& o, int first,
                             int count) {
  std::vector<Trace> out(static_cast<std::size_t>(count));
  parallel_for(count, o.threads, [&](int i) { out[static_cast<std::size_t>(i)] = run_replication(scenario, truth, o, first + i); });
  return out;
}

std::vector<Trace> run(const Scenario& scenario, const TrueState& truth, const RunOptions& o) {
  if (o.replications < 1) throw Error(ErrorCode::InvalidParameter, "replications must be at least 1");
  return run_range(scenario, truth, o, 0, o.replications);
}

PropensityReport propensity_dynamics_report(const std::vector<Trace>& traces, double tol) {
  PropensityReport r;
  r.replications = static_cast<int>(traces.size());
  std::size_t horizon = 0;
  for (const auto& tr : traces) horizon = std::max(horizon, tr.rows.size());
  std::vector<double> sum(horizon, 0.0), research(horizon, 0.0);
  std::vector<int> n(horizon, 0);
  for (const auto& tr : traces) {
    double prev = kNaN;
    bool pending = false;
    for (std::size_t k = 0; k < tr.rows.size(); ++k) {
      const TraceRow& row = tr.rows[k];
      research[k] += row.action;
      if (std::isnan(row.theta_bar)) continue;
      sum[k] += row.theta_bar;
      ++n[k];
      if (!std::isnan(prev)) {
        if (row.theta_bar > prev + tol) {
          ++r.expansions;
          pending = true;
        } else if (row.theta_bar < prev - tol) {
          ++r.contractions;
          pending = false;
        }
      }
      prev = row.theta_bar;
    }
    if (pending) r.unreversed_expansion.push_back(tr.replication);
  }
  r.mean_theta_bar.resize(horizon);
  r.research_frequency.resize(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    r.mean_theta_bar[k] = n[k] ? sum[k] / n[k] : kNaN;
    r.research_frequency[k] = traces.empty() ? kNaN : research[k] / static_cast<double>(traces.size());
  }
  return r;
}

GaussianBelief calibration_step(const GaussianBelief& belief, double s, Parity parity) {
  if (belief.dim() != 2) throw Error(ErrorCode::InvalidParameter, "calibration belief must be two-dimensional");
  const double v1 = belief.variance(0), v2 = belief.variance(1);
  if (!(v1 > 0.0 && v2 > 0.0)) throw Error(ErrorCode::InvalidVariance, "calibration variances must be positive");
  int i;
  if (std::abs(v1 - v2) <= 1e-15 * std::max(v1, v2)) i = parity == Parity::Odd ? 0 : 1;
  else i = v1 > v2 ? 0 : 1;
  Eigen::VectorXd m = belief.mean();
  Eigen::VectorXd v = belief.variances();
  const double gain = v[i] / (v[i] + 1.0);
  m[i] += gain * (s - m[0] - m[1]);
  v[i] = v[i] / (v[i] + 1.0);
  return GaussianBelief::product(m, v);
}

GateDecision heckman_decide(const HeckmanBelief& belief, double theta, double K) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "theta outside [0,1]");
  check_K(K);
  GateDecision g;
  g.K = K;
  g.divergences = {heckman_R(belief, theta), heckman_S(belief, theta)};
  const int best = g.divergences[1] < g.divergences[0] ? 1 : 0;
  if (g.divergences[static_cast<std::size_t>(best)] <= K) g.chosen = best;
  return g;
}

namespace {
/// sup{theta in [0,1] : h(theta) <= 0} for nondecreasing h.
template <typename H>
double last_nonpositive(H&& h) {
  if (h(1.0) <= 0.0) return 1.0;
  if (h(0.0) > 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) <= 0.0 ? lo : hi) = mid;
  }
  return lo;
}
}  // namespace

HeckmanThresholds heckman_thresholds(const HeckmanBelief& belief, double K) {
  check_K(K);
  belief.validate();
  auto R = [&](double th) { return heckman_R(belief, th); };
  auto S = [&](double th) { return heckman_S(belief, th); };
  HeckmanThresholds out;
  out.crossing = last_nonpositive([&](double th) { return R(th) - S(th); });
  const double y = last_nonpositive([&](double th) { return R(th) - K; });
  const double z = last_nonpositive([&](double th) { return K - S(th); });
  out.theta_rd = std::min(out.crossing, y);
  out.theta_s = std::max(out.crossing, z);
  return out;
}

}  // namespace alab
