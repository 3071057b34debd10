#include "alab/graph.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "alab/distributions.hpp"

namespace alab {

const char* to_string(NodeRole role) noexcept {
  switch (role) {
    case NodeRole::Statistic: return "s";
    case NodeRole::Latent: return "u";
    case NodeRole::Context: return "theta";
    case NodeRole::Parameter: return "omega";
  }
  return "?";
}

NodeRole parse_role(const std::string& text) {
  if (text == "s") return NodeRole::Statistic;
  if (text == "u") return NodeRole::Latent;
  if (text == "theta") return NodeRole::Context;
  if (text == "omega") return NodeRole::Parameter;
  throw Error(ErrorCode::ConfigError, "unknown node role '" + text + "'");
}

int DagModel::add_node(const std::string& name, NodeRole role) {
  if (name.empty()) throw Error(ErrorCode::InvalidParameter, "node name is empty");
  if (has_node(name)) throw Error(ErrorCode::InvalidParameter, "duplicate node '" + name + "'");
  names_.push_back(name);
  roles_.push_back(role);
  parents_.emplace_back();
  children_.emplace_back();
  return size() - 1;
}

void DagModel::check(int v) const {
  if (v < 0 || v >= size()) throw Error(ErrorCode::UnknownNode, "node index " + std::to_string(v));
}

void DagModel::add_edge(int from, int to) {
  check(from);
  check(to);
  if (from == to) throw Error(ErrorCode::CyclicInput, "self loop on '" + name(from) + "'");
  if (role(to) != NodeRole::Statistic)
    throw Error(ErrorCode::InvalidParameter, "only statistic nodes may have parents ('" + name(to) + "')");
  if (has_edge(from, to)) return;
  parents_[static_cast<std::size_t>(to)].push_back(from);
  children_[static_cast<std::size_t>(from)].push_back(to);
}

void DagModel::add_edge(const std::string& from, const std::string& to) { add_edge(index(from), index(to)); }

int DagModel::index(const std::string& n) const {
  const auto it = std::find(names_.begin(), names_.end(), n);
  if (it == names_.end()) throw Error(ErrorCode::UnknownNode, "no node named '" + n + "'");
  return static_cast<int>(it - names_.begin());
}

bool DagModel::has_node(const std::string& n) const {
  return std::find(names_.begin(), names_.end(), n) != names_.end();
}

bool DagModel::has_edge(int from, int to) const {
  const auto& p = parents_.at(static_cast<std::size_t>(to));
  return std::find(p.begin(), p.end(), from) != p.end();
}

std::vector<int> DagModel::nodes_with_role(NodeRole r) const {
  std::vector<int> out;
  for (int v = 0; v < size(); ++v)
    if (role(v) == r) out.push_back(v);
  return out;
}

std::vector<std::pair<int, int>> DagModel::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int v = 0; v < size(); ++v)
    for (int p : parents(v)) out.emplace_back(p, v);
  return out;
}

std::vector<int> DagModel::topological_order() const {
  std::vector<int> indeg(static_cast<std::size_t>(size()));
  for (int v = 0; v < size(); ++v) indeg[static_cast<std::size_t>(v)] = static_cast<int>(parents(v).size());
  std::vector<int> order, ready;
  for (int v = size() - 1; v >= 0; --v)
    if (indeg[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
  while (!ready.empty()) {
    const int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (int c : children(v))
      if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
  }
  if (static_cast<int>(order.size()) != size()) throw Error(ErrorCode::CyclicInput, "graph contains a directed cycle");
  return order;
}

void DagModel::check_acyclic() const { (void)topological_order(); }

int UndirectedGraph::edge_count() const {
  int e = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) e += linked(a, b) ? 1 : 0;
  return e;
}

namespace {

UndirectedGraph moralize_subset(const DagModel& g, const std::vector<char>& keep) {
  UndirectedGraph m;
  m.n = g.size();
  m.adj.assign(static_cast<std::size_t>(m.n * m.n), 0);
  for (int v = 0; v < g.size(); ++v) {
    if (!keep[static_cast<std::size_t>(v)]) continue;
    const auto& ps = g.parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      m.link(ps[i], v);
      for (std::size_t j = i + 1; j < ps.size(); ++j) m.link(ps[i], ps[j]);
    }
  }
  return m;
}

}  // namespace

UndirectedGraph moralize(const DagModel& g) {
  g.check_acyclic();
  return moralize_subset(g, std::vector<char>(static_cast<std::size_t>(g.size()), 1));
}

bool d_separated(const DagModel& g, const CiQuery& q) {
  const int n = g.size();
  std::vector<char> role(static_cast<std::size_t>(n), 0);  // 1 x, 2 y, 3 z
  auto mark = [&](const std::vector<int>& set, char tag) {
    for (int v : set) {
      if (v < 0 || v >= n) throw Error(ErrorCode::UnknownNode, "query node index " + std::to_string(v));
      if (role[static_cast<std::size_t>(v)] != 0 && role[static_cast<std::size_t>(v)] != tag)
        throw Error(ErrorCode::InvalidParameter, "query sets must be disjoint");
      role[static_cast<std::size_t>(v)] = tag;
    }
  };
  mark(q.x, 1);
  mark(q.y, 2);
  mark(q.z, 3);
  if (q.x.empty() || q.y.empty()) return true;
  g.check_acyclic();

  std::vector<char> anc(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  for (int v = 0; v < n; ++v)
    if (role[static_cast<std::size_t>(v)]) {
      anc[static_cast<std::size_t>(v)] = 1;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : g.parents(v))
      if (!anc[static_cast<std::size_t>(p)]) {
        anc[static_cast<std::size_t>(p)] = 1;
        stack.push_back(p);
      }
  }
  const UndirectedGraph m = moralize_subset(g, anc);

  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int v : q.x) {
    seen[static_cast<std::size_t>(v)] = 1;
    stack.push_back(v);
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < n; ++w) {
      if (!m.linked(v, w) || seen[static_cast<std::size_t>(w)] || role[static_cast<std::size_t>(w)] == 3) continue;
      if (role[static_cast<std::size_t>(w)] == 2) return false;
      seen[static_cast<std::size_t>(w)] = 1;
      stack.push_back(w);
    }
  }
  return true;
}

std::vector<int> i_set(const DagModel& g) {
  std::vector<char> in(static_cast<std::size_t>(g.size()), 0);
  // seeds are the context nodes; a parameter joins when it shares a statistic child with the current set
  std::vector<int> frontier = g.nodes_with_role(NodeRole::Context);
  std::vector<char> visited(static_cast<std::size_t>(g.size()), 0);
  for (int v : frontier) visited[static_cast<std::size_t>(v)] = 1;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int v : frontier)
      for (int child : g.children(v)) {
        if (g.role(child) != NodeRole::Statistic) continue;
        for (int p : g.parents(child))
          if (g.role(p) == NodeRole::Parameter && !visited[static_cast<std::size_t>(p)]) {
            visited[static_cast<std::size_t>(p)] = 1;
            in[static_cast<std::size_t>(p)] = 1;
            next.push_back(p);
          }
      }
    frontier = std::move(next);
  }
  std::vector<int> out;
  for (int v = 0; v < g.size(); ++v)
    if (in[static_cast<std::size_t>(v)]) out.push_back(v);
  return out;
}

GSeparability g_separable(const DagModel& g, const std::vector<int>& q_star) {
  for (int v : q_star) {
    if (v < 0 || v >= g.size()) throw Error(ErrorCode::UnknownNode, "q_star node index " + std::to_string(v));
    if (g.role(v) != NodeRole::Parameter) throw Error(ErrorCode::InvalidQStar, "'" + g.name(v) + "' is not a parameter");
  }
  const std::vector<int> contexts = g.nodes_with_role(NodeRole::Context);
  const std::vector<int> stats = g.nodes_with_role(NodeRole::Statistic);
  const std::vector<int> latents = g.nodes_with_role(NodeRole::Latent);
  if (contexts.empty() || q_star.empty()) return {};
  for (int s : stats) {
    CiQuery antecedent{{s}, contexts, latents};
    for (int o : stats)
      if (o != s) antecedent.z.push_back(o);
    if (d_separated(g, antecedent)) continue;
    if (!d_separated(g, CiQuery{{s}, q_star, {}})) return {false, s};
  }
  return {};
}

// ---------------------------------------------------------------- oracle

CiOracle::CiOracle(const DagModel& g, int levels, int factorizations, std::uint64_t seed)
    : n_(g.size()), levels_(levels) {
  if (n_ > 7) throw Error(ErrorCode::TooLarge, "brute-force oracle handles at most 7 nodes");
  if (levels != 2 && levels != 3) throw Error(ErrorCode::InvalidParameter, "levels must be 2 or 3");
  const std::vector<int> order = g.topological_order();
  std::size_t states = 1;
  for (int i = 0; i < n_; ++i) states *= static_cast<std::size_t>(levels);
  RngStream rng(seed, static_cast<std::uint64_t>(n_));
  for (int f = 0; f < factorizations; ++f) {
    // one conditional table per node, indexed by parent configuration
    std::vector<std::vector<double>> cpt(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) {
      std::size_t configs = 1;
      for (std::size_t k = 0; k < g.parents(v).size(); ++k) configs *= static_cast<std::size_t>(levels);
      auto& t = cpt[static_cast<std::size_t>(v)];
      t.resize(configs * static_cast<std::size_t>(levels));
      for (std::size_t c = 0; c < configs; ++c) {
        double total = 0.0;
        for (int l = 0; l < levels; ++l) total += t[c * levels + l] = 0.05 + rng.uniform();
        for (int l = 0; l < levels; ++l) t[c * levels + l] /= total;
      }
    }
    std::vector<double> joint(states);
    std::vector<int> val(static_cast<std::size_t>(n_));
    for (std::size_t a = 0; a < states; ++a) {
      std::size_t r = a;
      for (int v = 0; v < n_; ++v) {
        val[static_cast<std::size_t>(v)] = static_cast<int>(r % static_cast<std::size_t>(levels));
        r /= static_cast<std::size_t>(levels);
      }
      double p = 1.0;
      for (int v : order) {
        std::size_t c = 0;
        for (int par : g.parents(v)) c = c * static_cast<std::size_t>(levels) + static_cast<std::size_t>(val[static_cast<std::size_t>(par)]);
        p *= cpt[static_cast<std::size_t>(v)][c * levels + static_cast<std::size_t>(val[static_cast<std::size_t>(v)])];
      }
      joint[a] = p;
    }
    joints_.push_back(std::move(joint));
  }
}

bool CiOracle::independent(const CiQuery& q, double tolerance) const {
  for (const auto& set : {q.x, q.y, q.z})
    for (int v : set)
      if (v < 0 || v >= n_) throw Error(ErrorCode::UnknownNode, "query node index " + std::to_string(v));
  auto code = [&](std::size_t a, const std::vector<int>& vars) {
    std::size_t c = 0;
    for (int v : vars) {
      std::size_t digit = a;
      for (int k = 0; k < v; ++k) digit /= static_cast<std::size_t>(levels_);
      c = c * static_cast<std::size_t>(levels_) + digit % static_cast<std::size_t>(levels_);
    }
    return c;
  };
  auto size_of = [&](const std::vector<int>& vars) {
    std::size_t s = 1;
    for (std::size_t k = 0; k < vars.size(); ++k) s *= static_cast<std::size_t>(levels_);
    return s;
  };
  const std::size_t nx = size_of(q.x), ny = size_of(q.y), nz = size_of(q.z);
  for (const auto& joint : joints_) {
    std::vector<double> pxyz(nx * ny * nz, 0.0);
    for (std::size_t a = 0; a < joint.size(); ++a)
      pxyz[(code(a, q.z) * ny + code(a, q.y)) * nx + code(a, q.x)] += joint[a];
    for (std::size_t z = 0; z < nz; ++z) {
      double pz = 0.0;
      std::vector<double> px(nx, 0.0), py(ny, 0.0);
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x) {
          const double p = pxyz[(z * ny + y) * nx + x];
          pz += p;
          px[x] += p;
          py[y] += p;
        }
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t x = 0; x < nx; ++x)
          if (std::abs(pxyz[(z * ny + y) * nx + x] * pz - px[x] * py[y]) > tolerance) return false;
    }
  }
  return true;
}

bool brute_force_ci_oracle(const DagModel& g, const CiQuery& q, int levels, std::uint64_t seed) {
  return CiOracle(g, levels, 20, seed).independent(q);
}

// ---------------------------------------------------------------- text format

DagModel parse_graph(const std::string& text) {
  DagModel g;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::pair<std::string, std::string>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    std::string a, b, extra;
    if (!(ls >> a >> b) || (ls >> extra))
      throw Error(ErrorCode::ConfigError, "graph line " + std::to_string(lineno) + ": expected two arguments");
    if (kw == "node") g.add_node(a, parse_role(b));
    else if (kw == "edge") edges.emplace_back(a, b);
    else throw Error(ErrorCode::ConfigError, "graph line " + std::to_string(lineno) + ": unknown keyword '" + kw + "'");
  }
  for (const auto& [a, b] : edges) g.add_edge(a, b);
  g.check_acyclic();
  return g;
}

std::string format_graph(const DagModel& g) {
  std::ostringstream os;
  for (int v = 0; v < g.size(); ++v) os << "node " << g.name(v) << ' ' << to_string(g.role(v)) << '\n';
  for (const auto& [a, b] : g.edges()) os << "edge " << g.name(a) << ' ' << g.name(b) << '\n';
  return os.str();
}

}  // namespace alab
