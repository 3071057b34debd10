#include "alab/beliefs.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace alab {

// ---------------------------------------------------------------- gaussian

GaussianBelief::GaussianBelief(Eigen::VectorXd mean, Eigen::MatrixXd covariance, std::vector<int> frozen)
    : mean_(std::move(mean)), cov_(std::move(covariance)), frozen_(std::move(frozen)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw Error(ErrorCode::InvalidParameter, "covariance shape does not match mean");
  if (!mean_.allFinite() || !cov_.allFinite())
    throw Error(ErrorCode::InvalidParameter, "belief moments must be finite");
  for (Eigen::Index i = 0; i < mean_.size(); ++i)
    if (cov_(i, i) < 0.0) throw Error(ErrorCode::InvalidVariance, "negative belief variance");
  for (int f : frozen_)
    if (f < 0 || f >= mean_.size()) throw Error(ErrorCode::InvalidParameter, "frozen index out of range");
  std::sort(frozen_.begin(), frozen_.end());
  frozen_.erase(std::unique(frozen_.begin(), frozen_.end()), frozen_.end());
}

GaussianBelief GaussianBelief::product(const Eigen::VectorXd& mean, const Eigen::VectorXd& variances,
                                       std::vector<int> frozen) {
  if (mean.size() != variances.size()) throw Error(ErrorCode::InvalidParameter, "mean/variance length mismatch");
  return GaussianBelief(mean, variances.asDiagonal().toDenseMatrix(), std::move(frozen));
}

bool GaussianBelief::is_frozen(int i) const {
  return std::binary_search(frozen_.begin(), frozen_.end(), i);
}

bool GaussianBelief::is_product(double tol) const {
  for (Eigen::Index i = 0; i < cov_.rows(); ++i)
    for (Eigen::Index j = 0; j < cov_.cols(); ++j)
      if (i != j && std::abs(cov_(i, j)) > tol) return false;
  return true;
}

GaussianBelief GaussianBelief::observe_linear(const Eigen::VectorXd& h, double offset, double y,
                                              double noise_var) const {
  if (h.size() != mean_.size()) throw Error(ErrorCode::InvalidParameter, "observation vector has wrong length");
  if (!(noise_var >= 0.0)) throw Error(ErrorCode::InvalidVariance, "observation noise variance negative");
  if (!std::isfinite(y)) throw Error(ErrorCode::InvalidParameter, "observation is not finite");
  const Eigen::VectorXd ph = cov_ * h;
  const double innov_var = h.dot(ph) + noise_var;
  if (!(innov_var > 0.0)) throw Error(ErrorCode::ZeroLikelihood, "degenerate observation: zero predictive variance");
  Eigen::VectorXd gain = ph / innov_var;
  for (int f : frozen_) gain[f] = 0.0;
  const double resid = y - offset - h.dot(mean_);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim(), dim()) - gain * h.transpose();
  Eigen::MatrixXd cov = a * cov_ * a.transpose() + noise_var * gain * gain.transpose();
  cov = 0.5 * (cov + cov.transpose());
  for (Eigen::Index i = 0; i < cov.rows(); ++i) cov(i, i) = std::max(cov(i, i), 0.0);
  GaussianBelief out = *this;
  out.mean_ = mean_ + gain * resid;
  out.cov_ = std::move(cov);
  return out;
}

GaussianBelief GaussianBelief::projected_to_product() const {
  GaussianBelief out = *this;
  out.cov_ = cov_.diagonal().asDiagonal().toDenseMatrix();
  return out;
}

GaussianBelief GaussianBelief::with_point(int i, double value) const {
  GaussianBelief out = *this;
  out.mean_[i] = value;
  out.cov_.row(i).setZero();
  out.cov_.col(i).setZero();
  return out;
}

void HeckmanBelief::validate() const {
  if (!mean.allFinite()) throw Error(ErrorCode::InvalidParameter, "belief means must be finite");
  for (int i = 0; i < 3; ++i)
    if (!(variance[i] > 0.0) || !std::isfinite(variance[i]))
      throw Error(ErrorCode::InvalidVariance, "selection-model belief variances must be positive");
}

GaussianBelief HeckmanBelief::to_gaussian() const { return GaussianBelief::product(mean, variance); }

HeckmanBelief HeckmanBelief::from_gaussian(const GaussianBelief& belief) {
  if (belief.dim() != 3) throw Error(ErrorCode::InvalidParameter, "selection-model belief must be 3-dimensional");
  HeckmanBelief out;
  out.mean = belief.mean();
  out.variance = belief.variances();
  return out;
}

// ---------------------------------------------------------------- grid

std::shared_ptr<const GridBlock::Geometry> GridBlock::make_geometry(std::vector<int> coords,
                                                                    std::vector<Eigen::VectorXd> axes) {
  if (coords.empty() || coords.size() != axes.size())
    throw Error(ErrorCode::InvalidParameter, "grid block needs one axis per coordinate");
  Eigen::Index cells = 1;
  for (const auto& ax : axes) {
    if (ax.size() == 0) throw Error(ErrorCode::InvalidParameter, "grid axis is empty");
    cells *= ax.size();
  }
  auto geom = std::make_shared<Geometry>();
  geom->points.resize(cells, static_cast<Eigen::Index>(axes.size()));
  Eigen::Index stride = 1;
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const Eigen::Index n = axes[k].size();
    for (Eigen::Index c = 0; c < cells; ++c) geom->points(c, static_cast<Eigen::Index>(k)) = axes[k][(c / stride) % n];
    stride *= n;
  }
  geom->coords = std::move(coords);
  geom->axes = std::move(axes);
  return geom;
}

GridBlock::GridBlock(std::shared_ptr<const Geometry> geom, Eigen::VectorXd mass)
    : geom_(std::move(geom)), mass_(std::move(mass)) {
  cache_moments();
}

void GridBlock::cache_moments() {
  const Eigen::Index r = geom_->points.cols();
  means_.resize(r);
  variances_.resize(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const auto col = geom_->points.col(k);
    const double m = mass_.dot(col);
    means_[k] = m;
    variances_[k] = std::max(0.0, mass_.dot(col.cwiseProduct(col)) - m * m);
  }
}

GridBlock::GridBlock(std::vector<int> coords, std::vector<Eigen::VectorXd> axes, Eigen::VectorXd mass)
    : geom_(make_geometry(std::move(coords), std::move(axes))), mass_(std::move(mass)) {
  if (mass_.size() != geom_->points.rows()) throw Error(ErrorCode::InvalidParameter, "grid mass has wrong size");
  if ((mass_.array() < 0.0).any() || !mass_.allFinite())
    throw Error(ErrorCode::InvalidParameter, "grid mass must be finite and nonnegative");
  const double total = mass_.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid mass is zero");
  mass_ /= total;
  cache_moments();
}

GridBlock GridBlock::product(std::vector<int> coords, std::vector<Eigen::VectorXd> axes,
                             const std::vector<Eigen::VectorXd>& axis_weights) {
  if (axis_weights.size() != axes.size()) throw Error(ErrorCode::InvalidParameter, "one weight vector per axis");
  Eigen::VectorXd mass = Eigen::VectorXd::Ones(1);
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const Eigen::VectorXd& w = axis_weights[k];
    if (w.size() != axes[k].size()) throw Error(ErrorCode::InvalidParameter, "axis weight length mismatch");
    Eigen::VectorXd next(mass.size() * w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) next.segment(j * mass.size(), mass.size()) = mass * w[j];
    mass = std::move(next);
  }
  return GridBlock(std::move(coords), std::move(axes), std::move(mass));
}

int GridBlock::local_axis(int coord) const {
  const auto& c = geom_->coords;
  const auto it = std::find(c.begin(), c.end(), coord);
  if (it == c.end()) throw Error(ErrorCode::InvalidParameter, "coordinate not in grid block");
  return static_cast<int>(it - c.begin());
}

Eigen::VectorXd GridBlock::marginal(int local) const {
  const Eigen::Index n = geom_->axes[static_cast<std::size_t>(local)].size();
  Eigen::Index stride = 1;
  for (int k = 0; k < local; ++k) stride *= geom_->axes[static_cast<std::size_t>(k)].size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < mass_.size(); ++c) out[(c / stride) % n] += mass_[c];
  return out;
}

double GridBlock::box_probability(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < mass_.size(); ++c) {
    bool inside = true;
    for (int k = 0; k < rank() && inside; ++k) {
      const double x = geom_->points(c, k);
      const int coord = geom_->coords[static_cast<std::size_t>(k)];
      inside = x >= lo[coord] && x <= hi[coord];
    }
    if (inside) acc += mass_[c];
  }
  return acc;
}

GridBlock GridBlock::reweighted(const Eigen::Ref<const Eigen::VectorXd>& likelihood) const {
  if (likelihood.size() != mass_.size()) throw Error(ErrorCode::InvalidParameter, "likelihood has wrong size");
  Eigen::VectorXd post = mass_.cwiseProduct(likelihood);
  const double total = post.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorCode::ZeroLikelihood, "update annihilated all grid mass; refine the grid");
  post /= total;
  return GridBlock(geom_, std::move(post));
}

GridBlock GridBlock::with_mass(Eigen::VectorXd mass) const {
  if (mass.size() != mass_.size()) throw Error(ErrorCode::InvalidParameter, "grid mass has wrong size");
  const double total = mass.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid mass is zero");
  return GridBlock(geom_, mass / total);
}

GridBlock GridBlock::merged_with(const GridBlock& other) const {
  std::vector<int> coords = geom_->coords;
  coords.insert(coords.end(), other.coords().begin(), other.coords().end());
  std::vector<Eigen::VectorXd> axes = geom_->axes;
  axes.insert(axes.end(), other.axes().begin(), other.axes().end());
  // first axis fastest, so this block's cells vary fastest
  Eigen::VectorXd mass(mass_.size() * other.mass_.size());
  for (Eigen::Index j = 0; j < other.mass_.size(); ++j)
    mass.segment(j * mass_.size(), mass_.size()) = mass_ * other.mass_[j];
  return GridBlock(std::move(coords), std::move(axes), std::move(mass));
}

GridBelief::GridBelief(int dim, std::vector<GridBlock> blocks)
    : dim_(dim), blocks_(std::move(blocks)), block_index_(static_cast<std::size_t>(dim), -1) {
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    for (int c : blocks_[b].coords()) {
      if (c < 0 || c >= dim) throw Error(ErrorCode::InvalidParameter, "grid coordinate out of range");
      if (block_index_[static_cast<std::size_t>(c)] != -1)
        throw Error(ErrorCode::InvalidParameter, "grid coordinate covered twice");
      block_index_[static_cast<std::size_t>(c)] = static_cast<int>(b);
    }
  for (int b : block_index_)
    if (b < 0) throw Error(ErrorCode::InvalidParameter, "grid belief leaves a coordinate uncovered");
}

double GridBelief::mean(int coord) const {
  const GridBlock& blk = block(block_of(coord));
  return blk.mean(blk.local_axis(coord));
}

double GridBelief::variance(int coord) const {
  const GridBlock& blk = block(block_of(coord));
  return blk.variance(blk.local_axis(coord));
}

Eigen::VectorXd GridBelief::means() const {
  Eigen::VectorXd out(dim_);
  for (int i = 0; i < dim_; ++i) out[i] = mean(i);
  return out;
}

Eigen::VectorXd GridBelief::variances() const {
  Eigen::VectorXd out(dim_);
  for (int i = 0; i < dim_; ++i) out[i] = variance(i);
  return out;
}

double GridBelief::box_probability(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
  double p = 1.0;
  for (const auto& blk : blocks_) p *= blk.box_probability(lo, hi);
  return p;
}

GridBelief GridBelief::with_block(int b, GridBlock block) const {
  GridBelief out = *this;
  if (block.coords() != blocks_.at(static_cast<std::size_t>(b)).coords())
    throw Error(ErrorCode::InvalidParameter, "replacement block covers different coordinates");
  out.blocks_[static_cast<std::size_t>(b)] = std::move(block);
  return out;
}

GridBelief GridBelief::merged(std::vector<int> block_ids) const {
  std::sort(block_ids.begin(), block_ids.end());
  block_ids.erase(std::unique(block_ids.begin(), block_ids.end()), block_ids.end());
  if (block_ids.size() < 2) return *this;
  GridBlock combined = blocks_.at(static_cast<std::size_t>(block_ids[0]));
  for (std::size_t k = 1; k < block_ids.size(); ++k)
    combined = combined.merged_with(blocks_.at(static_cast<std::size_t>(block_ids[k])));
  std::vector<GridBlock> rest;
  for (std::size_t b = 0; b < blocks_.size(); ++b)
    if (!std::binary_search(block_ids.begin(), block_ids.end(), static_cast<int>(b))) rest.push_back(blocks_[b]);
  rest.push_back(std::move(combined));
  return GridBelief(dim_, std::move(rest));
}

// ---------------------------------------------------------------- variant helpers

Eigen::VectorXd belief_means(const BeliefState& belief) {
  return std::visit([](const auto& b) -> Eigen::VectorXd {
    if constexpr (std::is_same_v<std::decay_t<decltype(b)>, GaussianBelief>) return b.mean();
    else return b.means();
  }, belief);
}

Eigen::VectorXd belief_sds(const BeliefState& belief) {
  return std::visit([](const auto& b) -> Eigen::VectorXd { return b.variances().array().sqrt().matrix(); }, belief);
}

int belief_dim(const BeliefState& belief) {
  return std::visit([](const auto& b) { return static_cast<int>(b.dim()); }, belief);
}

double box_probability(const BeliefState& belief, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (const auto* g = std::get_if<GridBelief>(&belief)) return g->box_probability(lo, hi);
  const auto& gb = std::get<GaussianBelief>(belief);
  if (!gb.is_product()) throw Error(ErrorCode::UnsupportedMode, "box probability needs a product-form Gaussian belief");
  double p = 1.0;
  for (Eigen::Index i = 0; i < gb.dim(); ++i) {
    const double v = gb.variance(i), m = gb.mean(i);
    if (v == 0.0) {
      p *= (m >= lo[i] && m <= hi[i]) ? 1.0 : 0.0;
      continue;
    }
    const double sd = std::sqrt(v);
    p *= std_normal_cdf((hi[i] - m) / sd) - std_normal_cdf((lo[i] - m) / sd);
  }
  return p;
}

namespace {
std::uint64_t hash_doubles(std::uint64_t h, const double* data, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, data + i, sizeof bits);
    h = splitmix64_mix(h ^ bits) + 0x9E3779B97F4A7C15ULL;
  }
  return h;
}
}  // namespace

std::uint64_t belief_fingerprint(const BeliefState& belief) {
  if (const auto* g = std::get_if<GaussianBelief>(&belief)) {
    std::uint64_t h = hash_doubles(1, g->mean().data(), g->mean().size());
    return hash_doubles(h, g->covariance().data(), g->covariance().size());
  }
  std::uint64_t h = 2;
  for (const auto& blk : std::get<GridBelief>(belief).blocks()) h = hash_doubles(h, blk.mass().data(), blk.mass().size());
  return h;
}

ParameterBox ParameterBox::everything(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Eigen::VectorXd::Constant(dim, -inf), Eigen::VectorXd::Constant(dim, inf)};
}

}  // namespace alab
