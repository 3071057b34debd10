// Gaussian recursive systems with a latent confounder u: confounded causal
// inference and instrumental variables. Each statistic is
//   s_j = sum_{k<j} B_jk s_k + c_j u + e_j,   u ~ N(0,1),
// with Var(e_j) chosen so Var(s_j) = 1 when the system is evaluated at the
// normalising context (theta itself for statistics with a theta parent or under
// per-context normalisation, theta* otherwise).
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "alab/scenarios.hpp"

namespace alab {
namespace {

using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct System {
  SmallMat B;
  SmallVec c, d;
};

Eigen::VectorXd linspace(double lo, double hi, int n) {
  if (n < 2) throw Error(ErrorCode::InvalidParameter, "grid resolution must be at least 2");
  return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

double logsumexp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

class LinearSem : public Scenario {
 public:
  BeliefState prior() const override { return *prior_; }

  Sample sample(const TrueState& st, double theta, RngStream& rng) const override {
    check_theta(theta);
    const System sys = system(theta, st.omega);
    const double u = rng.standard_normal();
    Eigen::VectorXd s(statistic_dim_);
    for (int j = 0; j < statistic_dim_; ++j)
      s[j] = mean_of(sys, j, s, u) + std::sqrt(sys.d[j]) * rng.standard_normal();
    return {s, Eigen::VectorXd::Constant(1, u)};
  }

  double likelihood(const Eigen::VectorXd& s, double theta, const Eigen::VectorXd& w) const override {
    check_theta(theta);
    return std::exp(log_density(s, system(theta, w)));
  }

  PredictiveDistribution predictive(const BeliefState& belief, double theta, Space space) const override {
    check_theta(theta);
    const auto g = std::make_shared<const GridBelief>(std::get<GridBelief>(belief));
    const auto cum = std::make_shared<const std::vector<Eigen::VectorXd>>(cumulative(*g));
    SampledPredictive sp;
    sp.dim = statistic_dim_ + (space == Space::SAndU ? 1 : 0);
    if (space == Space::SAndU) {
      auto tables = std::make_shared<std::vector<Table>>();
      for (const auto& grp : groups(*g, true)) tables->push_back(tabulate(*g, grp, theta));
      sp.log_density = [this, tables](const Eigen::VectorXd& x) {
        const double u = x[statistic_dim_];
        double lp = -0.5 * (kLog2Pi + u * u);
        for (const auto& t : *tables) lp += log_mixture(t, x, u);
        return lp;
      };
    } else {
      const auto table = std::make_shared<Table>(joint_table(*g, theta));
      sp.log_density = [this, table](const Eigen::VectorXd& x) { return log_joint_mixture(*table, x); };
    }
    const bool with_u = space == Space::SAndU;
    sp.sampler = [this, g, cum, theta, with_u](RngStream& rng) { return draw_predictive(*g, *cum, theta, rng, with_u); };
    return {sp, space};
  }

  DivergenceEstimate gate_divergence(const BeliefState& belief, double theta, const Assumption& a,
                                     const FDivergenceSpec& spec) const override {
    check_theta(theta);
    if (!a.is_context()) throw Error(ErrorCode::InvalidParameter, name_ + " only has context assumptions");
    const double ts = a.theta_value;
    const auto& g = std::get<GridBelief>(belief);
    const auto cum = cumulative(g);
    const bool with_u = gate_space_ == Space::SAndU;
    auto sample_at = [&](double th) {
      return [&, th](RngStream& rng) { return draw_predictive(g, cum, th, rng, with_u); };
    };
    if (with_u) {
      // groups without a theta dependence contribute identical factors to both sides
      std::vector<Table> at_theta, at_star;
      for (const auto& grp : groups(g, false)) {
        at_theta.push_back(tabulate(g, grp, theta));
        at_star.push_back(tabulate(g, grp, ts));
      }
      auto log_ratio = [&](const Eigen::VectorXd& x) {
        const double u = x[statistic_dim_];
        double acc = 0.0;
        for (std::size_t k = 0; k < at_theta.size(); ++k)
          acc += log_mixture(at_theta[k], x, u) - log_mixture(at_star[k], x, u);
        return acc;
      };
      return divergence_from_log_ratio(sample_at(theta), sample_at(ts), log_ratio, spec, mc_draws_, mc_seed_);
    }
    const Table jt = joint_table(g, theta), js = joint_table(g, ts);
    auto log_ratio = [&](const Eigen::VectorXd& x) { return log_joint_mixture(jt, x) - log_joint_mixture(js, x); };
    return divergence_from_log_ratio(sample_at(theta), sample_at(ts), log_ratio, spec, mc_draws_, mc_seed_);
  }

  BeliefState update_as_if(const BeliefState& belief, const Eigen::VectorXd& s, const Assumption& a,
                           double) const override {
    if (!a.is_context()) throw Error(ErrorCode::InvalidParameter, name_ + " only has context assumptions");
    const auto& g = std::get<GridBelief>(belief);
    std::vector<int> ids;
    for (int i : q_star_) ids.push_back(g.block_of(i));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    // the likelihood at theta* ignores inactive coordinates, so any value works for them
    const GridBelief work = ids.size() > 1 ? g.merged(ids) : g;
    const int b = work.block_of(q_star_.front());
    return reweight(work, b, s, a.theta_value);
  }

  BeliefState update_true(const BeliefState& belief, const Eigen::VectorXd& s, double theta) const override {
    check_theta(theta);
    const auto& g = std::get<GridBelief>(belief);
    std::vector<int> ids(g.blocks().size());
    for (std::size_t k = 0; k < ids.size(); ++k) ids[k] = static_cast<int>(k);
    const GridBelief work = ids.size() > 1 ? g.merged(ids) : g;
    return reweight(work, 0, s, theta);
  }

  BeliefState point_belief(const Eigen::VectorXd& hat) const override {
    const GridBelief& p = *prior_;
    const int b = p.block_of(q_star_.front());
    const GridBlock& blk = p.block(b);
    std::vector<Eigen::VectorXd> axes, weights;
    for (int coord : blk.coords()) {
      const auto it = std::find(q_star_.begin(), q_star_.end(), coord);
      if (it == q_star_.end()) throw Error(ErrorCode::InvalidParameter, "active block mixes inactive coordinates");
      axes.push_back(Eigen::VectorXd::Constant(1, hat[it - q_star_.begin()]));
      weights.push_back(Eigen::VectorXd::Ones(1));
    }
    return p.with_block(b, GridBlock::product(blk.coords(), axes, weights));
  }

  double berk_objective(const Eigen::VectorXd& wp, const TrueState& st, const ThetaRegion& region) const override {
    const int n = statistic_dim_;
    const auto nodes = region.conditional_nodes(context_);
    std::vector<Eigen::MatrixXd> covs;
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [th, w] : nodes) {
      covs.push_back(covariance(system(th, st.omega)));
      second += w * covs.back();
    }
    Eigen::VectorXd full = prior_->means();
    for (std::size_t k = 0; k < q_star_.size(); ++k) full[q_star_[k]] = wp[static_cast<Eigen::Index>(k)];
    const System assumed = system(*theta_star_, full);
    if ((assumed.d.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd sq = covariance(assumed);
    const Eigen::LLT<Eigen::MatrixXd> llt(sq);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double cross = 0.5 * (n * kLog2Pi + logdet + (llt.solve(second)).trace());
    // negative entropy of the theta-mixture; fixed draws keep it constant in omega'
    std::vector<Eigen::LLT<Eigen::MatrixXd>> parts;
    std::vector<double> part_logdet, part_logw;
    for (std::size_t k = 0; k < covs.size(); ++k) {
      parts.emplace_back(covs[k]);
      part_logdet.push_back(2.0 * parts.back().matrixLLT().diagonal().array().log().sum());
      part_logw.push_back(std::log(nodes[k].second));
    }
    std::vector<double> cw;
    double run = 0.0;
    for (const auto& nd : nodes) cw.push_back(run += nd.second);
    RngStream rng(mc_seed_, 1);
    const int draws = 4096;
    double neg_entropy = 0.0;
    Eigen::VectorXd z(n), logs(static_cast<Eigen::Index>(covs.size()));
    for (int r = 0; r < draws; ++r) {
      RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
      const double pick = sub.uniform() * run;
      const std::size_t k = std::min<std::size_t>(
          static_cast<std::size_t>(std::lower_bound(cw.begin(), cw.end(), pick) - cw.begin()), covs.size() - 1);
      for (int i = 0; i < n; ++i) z[i] = sub.standard_normal();
      const Eigen::VectorXd x = parts[k].matrixL() * z;
      for (std::size_t m = 0; m < covs.size(); ++m) {
        const Eigen::VectorXd y = parts[m].matrixL().solve(x);
        logs[static_cast<Eigen::Index>(m)] = part_logw[m] - 0.5 * (n * kLog2Pi + part_logdet[m] + y.squaredNorm());
      }
      neg_entropy += logsumexp(logs);
    }
    return neg_entropy / draws + cross;
  }

  double log_conditional(int j, const Eigen::VectorXd& x) const override {
    Eigen::VectorXd w(omega_dim());
    for (int i = 0; i < omega_dim(); ++i) w[i] = x[omega_node(i)];
    const System sys = system(x[theta_node_], w);
    Eigen::VectorXd s(statistic_dim_);
    for (int k = 0; k < statistic_dim_; ++k) s[k] = x[statistic_node(k)];
    const double r = s[j] - mean_of(sys, j, s, x[latent_nodes_[0]]);
    return -0.5 * (kLog2Pi + std::log(sys.d[j]) + r * r / sys.d[j]);
  }

  void validate_true_state(const TrueState& st) const override {
    Scenario::validate_true_state(st);
    for (int k = 0; k <= 4; ++k) {
      const System sys = system(k / 4.0, st.omega);
      if ((sys.d.array() <= 0.0).any())
        throw Error(ErrorCode::OutOfDomain, name_ + ": true state makes a noise variance non-positive");
    }
  }

 protected:
  /// Structural coefficients at context theta.
  virtual void structural(double theta, const Eigen::VectorXd& omega, SmallMat& B, SmallVec& c) const = 0;

  void finish_setup(Normalization normalization, int mc_draws, std::uint64_t mc_seed,
                    std::vector<std::vector<int>> stat_omega, std::vector<char> theta_parent) {
    if (mc_draws < 16) throw Error(ErrorCode::InvalidParameter, "mc_draws must be at least 16");
    per_context_ = normalization == Normalization::PerContext;
    mc_draws_ = mc_draws;
    mc_seed_ = mc_seed;
    stat_omega_ = std::move(stat_omega);
    theta_dep_.resize(theta_parent.size());
    for (std::size_t j = 0; j < theta_parent.size(); ++j) theta_dep_[j] = theta_parent[j] || per_context_;
    theta_parent_ = std::move(theta_parent);
    check_feasible();
  }

  /// Noise variances must stay positive on the whole box; the subtracted
  /// variance terms are convex in each coordinate, so corners suffice.
  void check_feasible() const {
    const int n = omega_dim();
    for (long mask = 0; mask < (1L << n); ++mask) {
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w[i] = (mask >> i) & 1 ? omega_hi_[i] : omega_lo_[i];
      for (int k = 0; k <= 4; ++k) {
        const System sys = system(k / 4.0, w);
        if ((sys.d.array() <= 0.0).any())
          throw Error(ErrorCode::InvalidParameter,
                      name_ + ": parameter box allows a non-positive noise variance; shrink the bound");
      }
    }
  }

  std::optional<GridBelief> prior_;

 private:
  struct Group {
    std::vector<int> stats;
    std::vector<int> blocks;
  };
  // Per-cell coefficients of one group; per statistic: B row (n), c, log-normaliser, -1/(2d).
  struct Table {
    std::vector<int> stats;
    Eigen::VectorXd log_mass;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> coef;
  };

  static void check_theta(double theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidTheta, "theta outside [0,1]");
  }

  SmallVec normalising_noise(double theta, const Eigen::VectorXd& w) const {
    const int n = statistic_dim_;
    SmallMat B(n, n);
    SmallVec c(n);
    B.setZero();
    c.setZero();
    structural(theta, w, B, c);
    SmallMat S(n, n);
    S.setZero();
    SmallVec gamma(n), d(n);
    for (int j = 0; j < n; ++j) {
      double g = c[j], v = c[j] * c[j];
      for (int k = 0; k < j; ++k) {
        g += B(j, k) * gamma[k];
        v += 2.0 * c[j] * B(j, k) * gamma[k];
        for (int l = 0; l < j; ++l) v += B(j, k) * S(k, l) * B(j, l);
      }
      gamma[j] = g;
      d[j] = 1.0 - v;
      S(j, j) = 1.0;
      for (int i = 0; i < j; ++i) {
        double cv = c[j] * gamma[i];
        for (int k = 0; k < j; ++k) cv += B(j, k) * S(k, i);
        S(j, i) = S(i, j) = cv;
      }
    }
    return d;
  }

  System system(double theta, const Eigen::VectorXd& w) const {
    const int n = statistic_dim_;
    System sys;
    sys.B.setZero(n, n);
    sys.c.setZero(n);
    structural(theta, w, sys.B, sys.c);
    const SmallVec d_theta = normalising_noise(theta, w);
    const SmallVec d_star = normalising_noise(*theta_star_, w);
    sys.d.resize(n);
    for (int j = 0; j < n; ++j) sys.d[j] = theta_dep_[j] ? d_theta[j] : d_star[j];
    return sys;
  }

  static double mean_of(const System& sys, int j, const Eigen::VectorXd& s, double u) {
    double m = sys.c[j] * u;
    for (int k = 0; k < j; ++k) m += sys.B(j, k) * s[k];
    return m;
  }

  Eigen::MatrixXd covariance(const System& sys) const {
    const int n = statistic_dim_;
    const Eigen::MatrixXd A = (Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd(sys.B)).inverse();
    Eigen::MatrixXd inner = Eigen::VectorXd(sys.c) * Eigen::VectorXd(sys.c).transpose();
    inner.diagonal() += Eigen::VectorXd(sys.d);
    return A * inner * A.transpose();
  }

  double log_density(const Eigen::VectorXd& s, const System& sys) const {
    if ((sys.d.array() <= 0.0).any()) return kNegInf;
    const Eigen::LLT<Eigen::MatrixXd> llt(covariance(sys));
    if (llt.info() != Eigen::Success) return kNegInf;
    const Eigen::VectorXd y = llt.matrixL().solve(s.head(statistic_dim_));
    return -0.5 * (statistic_dim_ * kLog2Pi + 2.0 * llt.matrixLLT().diagonal().array().log().sum() + y.squaredNorm());
  }

  /// Connected components of statistics linked through shared belief blocks.
  std::vector<Group> groups(const GridBelief& g, bool include_theta_free) const {
    const int n = statistic_dim_;
    std::vector<int> comp(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) comp[j] = j;
    auto find = [&](int j) {
      while (comp[j] != j) j = comp[j] = comp[comp[j]];
      return j;
    };
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      for (int i : stat_omega_[j]) blocks[j].push_back(g.block_of(i));
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        for (int x : blocks[a])
          if (std::find(blocks[b].begin(), blocks[b].end(), x) != blocks[b].end()) comp[find(b)] = find(a);
    std::vector<Group> out;
    for (int root = 0; root < n; ++root) {
      if (find(root) != root) continue;
      Group grp;
      bool theta_dep = false;
      for (int j = 0; j < n; ++j) {
        if (find(j) != root) continue;
        grp.stats.push_back(j);
        theta_dep = theta_dep || theta_dep_[j];
        for (int x : blocks[j])
          if (std::find(grp.blocks.begin(), grp.blocks.end(), x) == grp.blocks.end()) grp.blocks.push_back(x);
      }
      std::sort(grp.blocks.begin(), grp.blocks.end());
      if (theta_dep || include_theta_free) out.push_back(std::move(grp));
    }
    return out;
  }

  static constexpr Eigen::Index kMaxMixtureCells = 200000;

  GridBlock group_block(const GridBelief& g, const std::vector<int>& ids) const {
    if (ids.empty()) return GridBlock({}, {}, Eigen::VectorXd::Ones(1));
    GridBlock blk = g.block(ids.front());
    for (std::size_t k = 1; k < ids.size(); ++k) {
      if (blk.cells() * g.block(ids[k]).cells() > kMaxMixtureCells)
        throw Error(ErrorCode::TooLarge, name_ + ": predictive mixture over " +
                                             std::to_string(blk.cells() * g.block(ids[k]).cells()) +
                                             " cells; use at-assumption normalisation or a coarser grid");
      blk = blk.merged_with(g.block(ids[k]));
    }
    return blk;
  }

  Table tabulate(const GridBelief& g, const Group& grp, double theta) const {
    const int n = statistic_dim_;
    const int width = n + 3;
    const GridBlock blk = group_block(g, grp.blocks);
    Table t;
    t.stats = grp.stats;
    t.log_mass = blk.mass().array().log();
    t.coef.resize(blk.cells(), static_cast<Eigen::Index>(grp.stats.size()) * width);
    Eigen::VectorXd w = g.means();
    const auto& pts = blk.points();
    for (Eigen::Index cell = 0; cell < blk.cells(); ++cell) {
      for (int k = 0; k < blk.rank(); ++k) w[blk.coords()[k]] = pts(cell, k);
      const System sys = system(theta, w);
      for (std::size_t q = 0; q < grp.stats.size(); ++q) {
        const int j = grp.stats[q];
        const Eigen::Index off = static_cast<Eigen::Index>(q) * width;
        for (int k = 0; k < n; ++k) t.coef(cell, off + k) = sys.B(j, k);
        t.coef(cell, off + n) = sys.c[j];
        const double d = sys.d[j];
        t.coef(cell, off + n + 1) = d > 0.0 ? -0.5 * (kLog2Pi + std::log(d)) : kNegInf;
        t.coef(cell, off + n + 2) = d > 0.0 ? -0.5 / d : 0.0;
      }
    }
    return t;
  }

  double log_mixture(const Table& t, const Eigen::VectorXd& x, double u) const {
    const int n = statistic_dim_;
    const int width = n + 3;
    Eigen::VectorXd acc = t.log_mass;
    for (Eigen::Index cell = 0; cell < t.coef.rows(); ++cell) {
      const double* row = t.coef.row(cell).data();
      double lp = acc[cell];
      for (std::size_t q = 0; q < t.stats.size(); ++q) {
        const int j = t.stats[q];
        const double* r = row + q * width;
        double m = r[n] * u;
        for (int k = 0; k < j; ++k) m += r[k] * x[k];
        const double e = x[j] - m;
        lp += r[n + 1] + r[n + 2] * e * e;
      }
      acc[cell] = lp;
    }
    return logsumexp(acc);
  }

  // Joint density of s with u integrated out: per cell, log-normaliser and the
  // inverse Cholesky factor (row-major n x n) of the covariance.
  Table joint_table(const GridBelief& g, double theta) const {
    const int n = statistic_dim_;
    std::vector<int> all(g.blocks().size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    const GridBlock blk = group_block(g, all);
    Table t;
    t.log_mass = blk.mass().array().log();
    t.coef.resize(blk.cells(), 1 + n * n);
    Eigen::VectorXd w = g.means();
    const auto& pts = blk.points();
    for (Eigen::Index cell = 0; cell < blk.cells(); ++cell) {
      for (int k = 0; k < blk.rank(); ++k) w[blk.coords()[k]] = pts(cell, k);
      const Eigen::LLT<Eigen::MatrixXd> llt(covariance(system(theta, w)));
      if (llt.info() != Eigen::Success) {
        t.coef(cell, 0) = kNegInf;
        continue;
      }
      const Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
      t.coef(cell, 0) = -0.5 * (n * kLog2Pi + 2.0 * llt.matrixLLT().diagonal().array().log().sum());
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) t.coef(cell, 1 + r * n + c) = Linv(r, c);
    }
    return t;
  }

  double log_joint_mixture(const Table& t, const Eigen::VectorXd& x) const {
    const int n = statistic_dim_;
    Eigen::VectorXd acc = t.log_mass;
    for (Eigen::Index cell = 0; cell < t.coef.rows(); ++cell) {
      const double* row = t.coef.row(cell).data();
      double q = 0.0;
      for (int r = 0; r < n; ++r) {
        double y = 0.0;
        for (int c = 0; c <= r; ++c) y += row[1 + r * n + c] * x[c];
        q += y * y;
      }
      acc[cell] += row[0] - 0.5 * q;
    }
    return logsumexp(acc);
  }

  static std::vector<Eigen::VectorXd> cumulative(const GridBelief& g) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& blk : g.blocks()) {
      Eigen::VectorXd c(blk.cells());
      double run = 0.0;
      for (Eigen::Index k = 0; k < blk.cells(); ++k) c[k] = run += blk.mass()[k];
      out.push_back(std::move(c));
    }
    return out;
  }

  /// Draw layout is fixed: one uniform per block, then u, then one normal per
  /// statistic. Common random numbers rely on it.
  Eigen::VectorXd draw_predictive(const GridBelief& g, const std::vector<Eigen::VectorXd>& cum, double theta,
                                  RngStream& rng, bool with_u) const {
    Eigen::VectorXd w(g.dim());
    for (std::size_t b = 0; b < cum.size(); ++b) {
      const Eigen::VectorXd& c = cum[b];
      const double pick = rng.uniform() * c[c.size() - 1];
      const Eigen::Index cell =
          std::min<Eigen::Index>(std::lower_bound(c.data(), c.data() + c.size(), pick) - c.data(), c.size() - 1);
      const GridBlock& blk = g.blocks()[b];
      for (int k = 0; k < blk.rank(); ++k) w[blk.coords()[k]] = blk.points()(cell, k);
    }
    const System sys = system(theta, w);
    const double u = rng.standard_normal();
    Eigen::VectorXd x(statistic_dim_ + (with_u ? 1 : 0));
    for (int j = 0; j < statistic_dim_; ++j) x[j] = mean_of(sys, j, x, u) + std::sqrt(sys.d[j]) * rng.standard_normal();
    if (with_u) x[statistic_dim_] = u;
    return x;
  }

  BeliefState reweight(const GridBelief& g, int b, const Eigen::VectorXd& s, double theta) const {
    const GridBlock& blk = g.block(b);
    Eigen::VectorXd w = g.means();
    Eigen::VectorXd loglik(blk.cells());
    const auto& pts = blk.points();
    for (Eigen::Index cell = 0; cell < blk.cells(); ++cell) {
      for (int k = 0; k < blk.rank(); ++k) w[blk.coords()[k]] = pts(cell, k);
      loglik[cell] = log_density(s, system(theta, w));
    }
    const double mx = loglik.maxCoeff();
    if (!std::isfinite(mx)) throw Error(ErrorCode::ZeroLikelihood, name_ + ": observation impossible on the grid");
    return g.with_block(b, blk.reweighted((loglik.array() - mx).exp().matrix()));
  }

  bool per_context_ = false;
  int mc_draws_ = 2048;
  std::uint64_t mc_seed_ = 0;
  std::vector<std::vector<int>> stat_omega_;
  std::vector<char> theta_parent_, theta_dep_;
};

class ConfoundedCausal final : public LinearSem {
 public:
  explicit ConfoundedCausal(const ConfoundedCausalConfig& cfg) : cfg_(cfg) {
    if (!(cfg.bound > 0.0)) throw Error(ErrorCode::InvalidParameter, "bound must be positive");
    name_ = "confounded-causal";
    omega_lo_ = Eigen::VectorXd::Constant(2, -cfg.bound);
    omega_hi_ = Eigen::VectorXd::Constant(2, cfg.bound);
    question_ = {0};
    q_star_ = {0};
    theta_star_ = 0.0;
    menu_ = {Assumption::context(0.0, "theta*=0")};
    statistic_dim_ = 2;
    latent_dim_ = 1;
    gate_space_ = Space::SAndU;
    const bool pc = cfg.normalization == Normalization::PerContext;
    if (pc) declare_dag({{"theta", "u", "omega2"}, {"s1", "u", "omega1", "theta", "omega2"}});
    else declare_dag({{"theta", "u", "omega2"}, {"s1", "u", "omega1"}});
    const Eigen::VectorXd axis = linspace(-cfg.bound, cfg.bound, cfg.resolution);
    const Eigen::VectorXd flat = Eigen::VectorXd::Ones(cfg.resolution);
    prior_ = GridBelief(2, {GridBlock::product({0}, {axis}, {flat}), GridBlock::product({1}, {axis}, {flat})});
    finish_setup(cfg.normalization, cfg.mc_draws, cfg.mc_seed, pc ? std::vector<std::vector<int>>{{1}, {0, 1}}
                                                                   : std::vector<std::vector<int>>{{1}, {0}},
                 {1, 0});
  }

 protected:
  void structural(double theta, const Eigen::VectorXd& w, SmallMat& B, SmallVec& c) const override {
    c[0] = theta * w[1];
    B(1, 0) = w[0];
    c[1] = cfg_.omega3;
  }

 private:
  ConfoundedCausalConfig cfg_;
};

class InstrumentalVariables final : public LinearSem {
 public:
  explicit InstrumentalVariables(const InstrumentalVariablesConfig& cfg) {
    if (!(cfg.bound > 0.0)) throw Error(ErrorCode::InvalidParameter, "bound must be positive");
    name_ = "instrumental-variables";
    omega_lo_ = Eigen::VectorXd::Constant(5, -cfg.bound);
    omega_hi_ = Eigen::VectorXd::Constant(5, cfg.bound);
    question_ = {3};
    q_star_ = {1, 2, 3, 4};
    theta_star_ = 0.0;
    menu_ = {Assumption::context(0.0, "theta*=0")};
    statistic_dim_ = 3;
    latent_dim_ = 1;
    gate_space_ = Space::SAndU;
    const bool pc = cfg.normalization == Normalization::PerContext;
    if (pc)
      declare_dag({{"theta", "u", "omega1"},
                   {"s1", "u", "omega2", "omega3", "theta", "omega1"},
                   {"s2", "u", "omega4", "omega5", "omega3", "theta", "omega1", "omega2"}});
    else
      declare_dag({{"theta", "u", "omega1"}, {"s1", "u", "omega2", "omega3"}, {"s2", "u", "omega4", "omega5", "omega3"}});
    const Eigen::VectorXd inst = linspace(-cfg.bound, cfg.bound, cfg.instrument_resolution);
    const Eigen::VectorXd st = linspace(-cfg.bound, cfg.bound, cfg.structural_resolution);
    const Eigen::VectorXd fi = Eigen::VectorXd::Ones(inst.size()), fs = Eigen::VectorXd::Ones(st.size());
    prior_ = GridBelief(5, {GridBlock::product({0}, {inst}, {fi}),
                            GridBlock::product({1, 2, 3, 4}, {st, st, st, st}, {fs, fs, fs, fs})});
    finish_setup(cfg.normalization, cfg.mc_draws, cfg.mc_seed,
                 pc ? std::vector<std::vector<int>>{{0}, {0, 1, 2}, {0, 1, 2, 3, 4}}
                    : std::vector<std::vector<int>>{{0}, {1, 2}, {2, 3, 4}},
                 {1, 0, 0});
  }

 protected:
  void structural(double theta, const Eigen::VectorXd& w, SmallMat& B, SmallVec& c) const override {
    c[0] = w[0] * theta;
    B(1, 0) = w[1];
    c[1] = w[2];
    B(2, 1) = w[3];
    c[2] = w[4];
  }
};

}  // namespace

std::unique_ptr<Scenario> make_confounded_causal(const ConfoundedCausalConfig& config) {
  return std::make_unique<ConfoundedCausal>(config);
}

std::unique_ptr<Scenario> make_instrumental_variables(const InstrumentalVariablesConfig& config) {
  return std::make_unique<InstrumentalVariables>(config);
}

}  // namespace alab
