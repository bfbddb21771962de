#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace consensus {

using Vertex = std::int32_t;

/// Undirected edge in canonical form (u < v).
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Finite simple undirected graph. Immutable once built.
///
/// Used for both roles: the spatial graph (individuals) and the opinion graph
/// (opinions). Connectivity is not enforced here; OpinionSpace and the
/// simulator validate it where it matters.
class Graph {
 public:
  /// Builds a graph from an edge list. Edges may be given in either
  /// orientation; they are stored canonicalized and sorted.
  /// Throws Error{SelfLoop | DuplicateEdge | VertexOutOfRange | InvalidParameter}.
  static Graph from_edge_list(Vertex num_vertices, std::span<const Edge> edges);

  Vertex num_vertices() const { return static_cast<Vertex>(offsets_.size() - 1); }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const Vertex> neighbors(Vertex v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const Edge> edges() const { return edges_; }
  bool has_edge(Vertex a, Vertex b) const;

  /// Half-extents L_1..L_n when this graph was produced by the lattice
  /// generator; empty otherwise. Only affects serialization.
  const std::vector<int>& lattice_extents() const { return lattice_extents_; }
  Graph with_lattice_extents(std::vector<int> extents) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_.size() == b.offsets_.size() && a.edges_ == b.edges_;
  }

 private:
  Graph() = default;

  std::vector<std::size_t> offsets_{0};
  std::vector<Vertex> adjacency_;
  std::vector<Edge> edges_;
  std::vector<int> lattice_extents_;
};

/// True iff a breadth-first traversal from vertex 0 reaches every vertex.
bool is_connected(const Graph& g);

/// Hop distances from `source`; unreachable vertices get -1.
std::vector<int> bfs_distances(const Graph& g, Vertex source);

/// All-pairs geodesic data of a connected graph.
class MetricProfile {
 public:
  using Distance = std::uint16_t;

  MetricProfile(Vertex n, std::vector<Distance> dist);

  Vertex size() const { return n_; }
  int distance(Vertex a, Vertex b) const { return dist_[static_cast<std::size_t>(a) * n_ + b]; }
  int eccentricity(Vertex a) const { return ecc_[a]; }
  std::span<const int> eccentricities() const { return ecc_; }
  int radius() const { return radius_; }
  int diameter() const { return diameter_; }

 private:
  Vertex n_;
  std::vector<Distance> dist_;
  std::vector<int> ecc_;
  int radius_ = 0;
  int diameter_ = 0;
};

/// All-pairs BFS. Throws Error{Disconnected} unless `g` is connected.
MetricProfile metric_profile(const Graph& g);

// Generators -----------------------------------------------------------------

/// Box ∏[-L_i, L_i] ∩ Z^n with unit-distance edges. Vertex ids are the
/// row-major mixed-radix encoding of (a_1+L_1, ..., a_n+L_n), first
/// coordinate most significant.
Graph lattice(std::span<const int> half_extents);
Vertex lattice_vertex(std::span<const int> half_extents, std::span<const int> coords);
std::vector<int> lattice_coordinates(std::span<const int> half_extents, Vertex id);

/// Regular rooted tree: root 0, every internal vertex has `degree` children,
/// leaves at depth `radius`. Ids in breadth-first order.
Graph regular_tree(int degree, int radius);

/// Star-like graph: center 0 plus `branches` disjoint paths of length
/// `radius`. Branch i, depth k (1-based) has id 1 + i*radius + (k-1).
Graph star_like(int branches, int radius);

Graph path_graph(int k);
Graph cycle_graph(int k);
Graph complete_graph(int k);

/// Family description used by the CLI mini-grammar
/// ("lattice:L1,L2" / "tree:n,r" / "star:n,r" / "path:k" / "cycle:k" / "complete:k").
struct FamilySpec {
  enum class Kind { Lattice, Tree, Star, Path, Cycle, Complete };
  Kind kind = Kind::Path;
  std::vector<int> params;

  /// Throws Error{InvalidParameter} on malformed text.
  static FamilySpec parse(const std::string& text);
  std::string to_string() const;
};

/// Throws Error{InvalidParameter} when parameters are out of range.
Graph generate(const FamilySpec& family);

// Text format ----------------------------------------------------------------

/// "<n> <m>\n" followed by "u v\n" per edge (u < v). Lattice graphs get an
/// extra leading "# lattice L1 ... Ln\n" line.
std::string format_graph(const Graph& g);

/// Inverse of format_graph. Throws Error{ParseError} (message names the
/// 1-based line) or the Graph::from_edge_list errors.
Graph parse_graph(const std::string& text);

}  // namespace consensus
