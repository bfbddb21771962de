#include "consensus/graph.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "consensus/error.hpp"

namespace consensus {

namespace {

constexpr Vertex kMaxGeneratedVertices = 1 << 24;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidParameter, what);
}

}  // namespace

Graph Graph::from_edge_list(Vertex num_vertices, std::span<const Edge> edges) {
  if (num_vertices < 1) throw Error(ErrorKind::InvalidParameter, "graph needs at least one vertex");

  Graph g;
  g.edges_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= num_vertices || e.v >= num_vertices) {
      throw Error(ErrorKind::VertexOutOfRange,
                  "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") with " +
                      std::to_string(num_vertices) + " vertices");
    }
    if (e.u == e.v) throw Error(ErrorKind::SelfLoop, "vertex " + std::to_string(e.u));
    g.edges_.push_back({std::min(e.u, e.v), std::max(e.u, e.v)});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  if (auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end()); dup != g.edges_.end()) {
    throw Error(ErrorKind::DuplicateEdge,
                "edge (" + std::to_string(dup->u) + "," + std::to_string(dup->v) + ")");
  }

  std::vector<std::size_t> degree(static_cast<std::size_t>(num_vertices), 0);
  for (const Edge& e : g.edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  g.offsets_.assign(static_cast<std::size_t>(num_vertices) + 1, 0);
  std::partial_sum(degree.begin(), degree.end(), g.offsets_.begin() + 1);
  g.adjacency_.resize(g.offsets_.back());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : g.edges_) {
    g.adjacency_[cursor[e.u]++] = e.v;
    g.adjacency_[cursor[e.v]++] = e.u;
  }
  for (Vertex v = 0; v < num_vertices; ++v) {
    std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
              g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]));
  }
  return g;
}

bool Graph::has_edge(Vertex a, Vertex b) const {
  if (a < 0 || b < 0 || a >= num_vertices() || b >= num_vertices()) return false;
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

Graph Graph::with_lattice_extents(std::vector<int> extents) const {
  Graph copy = *this;
  copy.lattice_extents_ = std::move(extents);
  return copy;
}

std::vector<int> bfs_distances(const Graph& g, Vertex source) {
  std::vector<int> dist(static_cast<std::size_t>(g.num_vertices()), -1);
  std::vector<Vertex> frontier{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const Vertex v = frontier[head];
    for (Vertex w : g.neighbors(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        frontier.push_back(w);
      }
    }
  }
  return dist;
}

bool is_connected(const Graph& g) {
  const auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

MetricProfile::MetricProfile(Vertex n, std::vector<Distance> dist)
    : n_(n), dist_(std::move(dist)), ecc_(static_cast<std::size_t>(n), 0) {
  for (Vertex a = 0; a < n_; ++a) {
    int e = 0;
    for (Vertex b = 0; b < n_; ++b) e = std::max(e, distance(a, b));
    ecc_[a] = e;
  }
  radius_ = *std::min_element(ecc_.begin(), ecc_.end());
  diameter_ = *std::max_element(ecc_.begin(), ecc_.end());
}

MetricProfile metric_profile(const Graph& g) {
  const Vertex n = g.num_vertices();
  if (n > std::numeric_limits<MetricProfile::Distance>::max()) {
    throw Error(ErrorKind::InvalidParameter, "too many vertices for a dense distance table");
  }
  std::vector<MetricProfile::Distance> dist(static_cast<std::size_t>(n) * n);
  for (Vertex a = 0; a < n; ++a) {
    const auto row = bfs_distances(g, a);
    for (Vertex b = 0; b < n; ++b) {
      if (row[b] < 0) throw Error(ErrorKind::Disconnected, "graph is not connected");
      dist[static_cast<std::size_t>(a) * n + b] = static_cast<MetricProfile::Distance>(row[b]);
    }
  }
  return MetricProfile(n, std::move(dist));
}

// Generators -----------------------------------------------------------------

Vertex lattice_vertex(std::span<const int> half_extents, std::span<const int> coords) {
  require(coords.size() == half_extents.size(), "coordinate dimension mismatch");
  Vertex id = 0;
  for (std::size_t i = 0; i < half_extents.size(); ++i) {
    const int side = 2 * half_extents[i] + 1;
    const int shifted = coords[i] + half_extents[i];
    require(shifted >= 0 && shifted < side, "coordinate outside the lattice box");
    id = id * side + shifted;
  }
  return id;
}

std::vector<int> lattice_coordinates(std::span<const int> half_extents, Vertex id) {
  std::vector<int> coords(half_extents.size());
  for (std::size_t i = half_extents.size(); i-- > 0;) {
    const int side = 2 * half_extents[i] + 1;
    coords[i] = id % side - half_extents[i];
    id /= side;
  }
  return coords;
}

Graph lattice(std::span<const int> half_extents) {
  require(!half_extents.empty(), "lattice needs at least one dimension");
  long long count = 1;
  for (int extent : half_extents) {
    require(extent >= 1, "lattice half-extents must be >= 1");
    count *= 2LL * extent + 1;
    require(count <= kMaxGeneratedVertices, "lattice too large");
  }
  const auto n = static_cast<Vertex>(count);
  std::vector<Edge> edges;
  // Stride of coordinate i in the mixed-radix id.
  std::vector<Vertex> stride(half_extents.size(), 1);
  for (std::size_t i = half_extents.size() - 1; i-- > 0;) {
    stride[i] = stride[i + 1] * (2 * half_extents[i + 1] + 1);
  }
  for (Vertex id = 0; id < n; ++id) {
    const auto coords = lattice_coordinates(half_extents, id);
    for (std::size_t i = 0; i < half_extents.size(); ++i) {
      if (coords[i] < half_extents[i]) edges.push_back({id, id + stride[i]});
    }
  }
  std::vector<int> extents(half_extents.begin(), half_extents.end());
  return Graph::from_edge_list(n, edges).with_lattice_extents(std::move(extents));
}

Graph regular_tree(int degree, int radius) {
  require(degree >= 2, "tree degree must be >= 2");
  require(radius >= 1, "tree radius must be >= 1");
  long long count = 1;
  long long level = 1;
  for (int k = 1; k <= radius; ++k) {
    level *= degree;
    count += level;
    require(count <= kMaxGeneratedVertices, "tree too large");
  }
  const auto n = static_cast<Vertex>(count);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) - 1);
  // Breadth-first ids: children of v are degree*v + 1 .. degree*v + degree.
  for (Vertex child = 1; child < n; ++child) edges.push_back({(child - 1) / degree, child});
  return Graph::from_edge_list(n, edges);
}

Graph star_like(int branches, int radius) {
  require(branches >= 1, "star needs at least one branch");
  require(radius >= 1, "star radius must be >= 1");
  const long long count = 1LL + static_cast<long long>(branches) * radius;
  require(count <= kMaxGeneratedVertices, "star too large");
  std::vector<Edge> edges;
  for (int b = 0; b < branches; ++b) {
    Vertex prev = 0;
    for (int k = 1; k <= radius; ++k) {
      const Vertex id = 1 + b * radius + (k - 1);
      edges.push_back({prev, id});
      prev = id;
    }
  }
  return Graph::from_edge_list(static_cast<Vertex>(count), edges);
}

Graph path_graph(int k) {
  require(k >= 1, "path needs k >= 1");
  std::vector<Edge> edges;
  for (Vertex v = 0; v + 1 < k; ++v) edges.push_back({v, v + 1});
  return Graph::from_edge_list(k, edges);
}

Graph cycle_graph(int k) {
  require(k >= 3, "cycle needs k >= 3");
  std::vector<Edge> edges;
  for (Vertex v = 0; v < k; ++v) edges.push_back({v, (v + 1) % k});
  return Graph::from_edge_list(k, edges);
}

Graph complete_graph(int k) {
  require(k >= 1, "complete graph needs k >= 1");
  std::vector<Edge> edges;
  for (Vertex u = 0; u < k; ++u)
    for (Vertex v = u + 1; v < k; ++v) edges.push_back({u, v});
  return Graph::from_edge_list(k, edges);
}

FamilySpec FamilySpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(ErrorKind::InvalidParameter, "family spec '" + text + "' lacks ':'");
  }
  const std::string name = text.substr(0, colon);
  FamilySpec spec;
  if (name == "lattice") spec.kind = Kind::Lattice;
  else if (name == "tree") spec.kind = Kind::Tree;
  else if (name == "star") spec.kind = Kind::Star;
  else if (name == "path") spec.kind = Kind::Path;
  else if (name == "cycle") spec.kind = Kind::Cycle;
  else if (name == "complete") spec.kind = Kind::Complete;
  else throw Error(ErrorKind::InvalidParameter, "unknown graph family '" + name + "'");

  std::string_view rest(text);
  rest.remove_prefix(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    const auto token = rest.substr(0, comma);
    int value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || end != token.data() + token.size()) {
      throw Error(ErrorKind::InvalidParameter, "bad integer '" + std::string(token) + "' in '" + text + "'");
    }
    spec.params.push_back(value);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }

  const std::size_t arity = spec.params.size();
  const bool ok = (spec.kind == Kind::Lattice && arity >= 1) ||
                  ((spec.kind == Kind::Tree || spec.kind == Kind::Star) && arity == 2) ||
                  ((spec.kind == Kind::Path || spec.kind == Kind::Cycle || spec.kind == Kind::Complete) && arity == 1);
  if (!ok) throw Error(ErrorKind::InvalidParameter, "wrong parameter count in '" + text + "'");
  return spec;
}

std::string FamilySpec::to_string() const {
  std::string out;
  switch (kind) {
    case Kind::Lattice: out = "lattice:"; break;
    case Kind::Tree: out = "tree:"; break;
    case Kind::Star: out = "star:"; break;
    case Kind::Path: out = "path:"; break;
    case Kind::Cycle: out = "cycle:"; break;
    case Kind::Complete: out = "complete:"; break;
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(params[i]);
  }
  return out;
}

Graph generate(const FamilySpec& family) {
  const auto& p = family.params;
  auto arity = [&](std::size_t want) {
    require(p.size() == want, "family " + family.to_string() + " expects " + std::to_string(want) + " parameters");
  };
  switch (family.kind) {
    case FamilySpec::Kind::Lattice: return lattice(p);
    case FamilySpec::Kind::Tree: arity(2); return regular_tree(p[0], p[1]);
    case FamilySpec::Kind::Star: arity(2); return star_like(p[0], p[1]);
    case FamilySpec::Kind::Path: arity(1); return path_graph(p[0]);
    case FamilySpec::Kind::Cycle: arity(1); return cycle_graph(p[0]);
    case FamilySpec::Kind::Complete: arity(1); return complete_graph(p[0]);
  }
  throw Error(ErrorKind::InvalidParameter, "unknown family");
}

// Text format ----------------------------------------------------------------

std::string format_graph(const Graph& g) {
  std::string out;
  if (!g.lattice_extents().empty()) {
    out += "# lattice";
    for (int L : g.lattice_extents()) out += ' ' + std::to_string(L);
    out += '\n';
  }
  out += std::to_string(g.num_vertices()) + ' ' + std::to_string(g.num_edges()) + '\n';
  for (const Edge& e : g.edges()) out += std::to_string(e.u) + ' ' + std::to_string(e.v) + '\n';
  return out;
}

namespace {

// Parses a line of exactly `count` non-negative decimal integers separated by
// single spaces.
bool parse_ints(std::string_view line, std::span<long long> out) {
  const char* p = line.data();
  const char* end = line.data() + line.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i > 0) {
      if (p == end || *p != ' ') return false;
      ++p;
    }
    const auto [next, ec] = std::from_chars(p, end, out[i]);
    if (ec != std::errc{} || next == p || *p == '-' || *p == '+') return false;
    p = next;
  }
  return p == end;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Graph parse_graph(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    if (nl == std::string_view::npos) {
      lines.push_back(rest);
      break;
    }
    lines.push_back(rest.substr(0, nl));
    rest.remove_prefix(nl + 1);
  }

  std::size_t idx = 0;
  std::vector<int> extents;
  if (!lines.empty() && lines[0].starts_with("# lattice")) {
    std::istringstream header{std::string(lines[0].substr(9))};
    int L = 0;
    while (header >> L) extents.push_back(L);
    if (extents.empty() || !header.eof()) parse_error(1, "malformed lattice header");
    idx = 1;
  }
  if (idx >= lines.size()) parse_error(idx + 1, "missing '<num_vertices> <num_edges>' line");

  long long counts[2];
  if (!parse_ints(lines[idx], counts)) parse_error(idx + 1, "expected '<num_vertices> <num_edges>'");
  if (counts[0] < 1 || counts[0] > std::numeric_limits<Vertex>::max()) {
    parse_error(idx + 1, "vertex count out of range");
  }
  const auto n = static_cast<Vertex>(counts[0]);
  const auto m = static_cast<std::size_t>(counts[1]);
  if (lines.size() - idx - 1 != m) {
    parse_error(std::min(lines.size(), idx + 1 + m) + 1,
                "expected " + std::to_string(m) + " edge lines, found " +
                    std::to_string(lines.size() - idx - 1));
  }

  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t i = idx + 1; i < lines.size(); ++i) {
    long long uv[2];
    if (!parse_ints(lines[i], uv)) parse_error(i + 1, "expected 'u v'");
    if (uv[0] >= n || uv[1] >= n) {
      throw Error(ErrorKind::VertexOutOfRange, "line " + std::to_string(i + 1));
    }
    if (uv[0] == uv[1]) throw Error(ErrorKind::SelfLoop, "line " + std::to_string(i + 1));
    if (uv[0] > uv[1]) parse_error(i + 1, "edge endpoints must satisfy u < v");
    edges.push_back({static_cast<Vertex>(uv[0]), static_cast<Vertex>(uv[1])});
  }
  Graph g = Graph::from_edge_list(n, edges);
  if (!extents.empty()) {
    if (!(g == lattice(extents))) parse_error(1, "lattice header does not match edge list");
    g = g.with_lattice_extents(std::move(extents));
  }
  return g;
}

}  // namespace consensus
