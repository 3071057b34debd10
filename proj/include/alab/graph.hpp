#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alab/errors.hpp"

namespace alab {

enum class NodeRole { Statistic, Latent, Context, Parameter };
const char* to_string(NodeRole role) noexcept;
NodeRole parse_role(const std::string& text);

/// Recursive-structure DAG. Only statistic nodes may have parents.
class DagModel {
 public:
  int add_node(const std::string& name, NodeRole role);
  void add_edge(int from, int to);
  void add_edge(const std::string& from, const std::string& to);

  int size() const noexcept { return static_cast<int>(names_.size()); }
  const std::string& name(int v) const { return names_.at(static_cast<std::size_t>(v)); }
  NodeRole role(int v) const { return roles_.at(static_cast<std::size_t>(v)); }
  int index(const std::string& name) const;  // throws UnknownNode
  bool has_node(const std::string& name) const;
  const std::vector<int>& parents(int v) const { return parents_.at(static_cast<std::size_t>(v)); }
  const std::vector<int>& children(int v) const { return children_.at(static_cast<std::size_t>(v)); }
  bool has_edge(int from, int to) const;
  std::vector<int> nodes_with_role(NodeRole role) const;
  std::vector<std::pair<int, int>> edges() const;

  /// Throws CyclicInput when the edges contain a directed cycle.
  void check_acyclic() const;
  std::vector<int> topological_order() const;

 private:
  void check(int v) const;
  std::vector<std::string> names_;
  std::vector<NodeRole> roles_;
  std::vector<std::vector<int>> parents_, children_;
};

/// Adjacency-matrix undirected graph.
struct UndirectedGraph {
  int n = 0;
  std::vector<char> adj;  // n*n
  bool linked(int a, int b) const { return adj[static_cast<std::size_t>(a * n + b)] != 0; }
  void link(int a, int b) {
    adj[static_cast<std::size_t>(a * n + b)] = 1;
    adj[static_cast<std::size_t>(b * n + a)] = 1;
  }
  int edge_count() const;
};

struct CiQuery {
  std::vector<int> x, y, z;
};

/// Marries co-parents and drops directions.
UndirectedGraph moralize(const DagModel& g);

/// X and Y separated by Z in the moral graph of the ancestral set of X, Y, Z.
bool d_separated(const DagModel& g, const CiQuery& q);

/// Parameter nodes linked to the context through chains of shared statistic children.
std::vector<int> i_set(const DagModel& g);

struct GSeparability {
  bool separable = true;
  std::optional<int> witness;  // statistic node violating the condition
};

/// For every statistic s_i: if s_i is not separated from the context nodes given
/// the other statistics and all latents, it must be separated from q_star given nothing.
GSeparability g_separable(const DagModel& g, const std::vector<int>& q_star);

/// Exhaustive conditional-independence test on random positive factorizations of g.
class CiOracle {
 public:
  CiOracle(const DagModel& g, int levels, int factorizations = 20, std::uint64_t seed = 17);
  bool independent(const CiQuery& q, double tolerance = 1e-9) const;

 private:
  int n_, levels_;
  std::vector<std::vector<double>> joints_;
};

bool brute_force_ci_oracle(const DagModel& g, const CiQuery& q, int levels, std::uint64_t seed = 17);

/// Graph text format: one statement per line, '#' starts a comment.
///   node <name> <s|u|theta|omega>
///   edge <from> <to>
DagModel parse_graph(const std::string& text);
std::string format_graph(const DagModel& g);

}  // namespace alab
