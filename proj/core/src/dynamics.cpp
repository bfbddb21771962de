#include "consensus/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <sstream>

namespace consensus {

std::string_view to_string(ProcessKind kind) {
  return kind == ProcessKind::Imitation ? "imitation" : "attraction";
}

ProcessKind parse_process_kind(std::string_view text) {
  if (text == "imitation") return ProcessKind::Imitation;
  if (text == "attraction") return ProcessKind::Attraction;
  throw Error(ErrorKind::InvalidParameter, "unknown process kind '" + std::string(text) + "'");
}

bool Configuration::is_constant() const {
  return std::adjacent_find(opinions.begin(), opinions.end(), std::not_equal_to<>()) == opinions.end();
}

std::string Configuration::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < opinions.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(opinions[i]);
  }
  return out;
}

Configuration Configuration::parse(const std::string& text) {
  Configuration c;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    Opinion value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size() || value < 0) {
      throw Error(ErrorKind::ParseError, "bad opinion id '" + token + "'");
    }
    c.opinions.push_back(value);
  }
  if (c.opinions.empty()) throw Error(ErrorKind::ParseError, "empty configuration");
  return c;
}

ModelInstance::ModelInstance(Graph spatial, OpinionSpace opinions, int tau, ProcessKind kind)
    : spatial_(std::move(spatial)), opinions_(std::move(opinions)), tau_(tau), kind_(kind) {
  if (tau_ < 0) throw Error(ErrorKind::InvalidParameter, "tau must be >= 0");
  if (!is_connected(spatial_)) throw Error(ErrorKind::Disconnected, "spatial graph is not connected");

  const Vertex n = spatial_.num_vertices();
  incident_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Vertex x = 0; x < n; ++x) incident_offsets_[x + 1] = incident_offsets_[x] + spatial_.degree(x);
  incident_.resize(incident_offsets_.back());
  std::vector<std::size_t> cursor(incident_offsets_.begin(), incident_offsets_.end() - 1);
  const auto edges = spatial_.edges();
  for (std::uint32_t id = 0; id < edges.size(); ++id) {
    incident_[cursor[edges[id].u]++] = id;
    incident_[cursor[edges[id].v]++] = id;
  }
}

void ModelInstance::validate(const Configuration& c) const {
  if (c.size() != static_cast<std::size_t>(num_individuals())) {
    throw Error(ErrorKind::InvalidParameter, "configuration has " + std::to_string(c.size()) +
                                                 " entries, expected " + std::to_string(num_individuals()));
  }
  for (Opinion a : c.opinions) {
    if (a < 0 || a >= opinions_.size()) {
      throw Error(ErrorKind::InvalidParameter, "opinion id " + std::to_string(a) + " out of range");
    }
  }
}

EdgeType classify_edge(const ModelInstance& m, const Configuration& c, Edge edge) {
  if (!m.spatial().has_edge(edge.u, edge.v)) {
    throw Error(ErrorKind::InvalidParameter, "(" + std::to_string(edge.u) + "," + std::to_string(edge.v) +
                                                 ") is not a spatial edge");
  }
  return m.classify(c[edge.u], c[edge.v]);
}

std::size_t phi(const ModelInstance& m, const Configuration& c) {
  std::size_t count = 0;
  for (const Edge& e : m.spatial().edges()) {
    if (m.classify(c[e.u], c[e.v]) == EdgeType::Compatible) ++count;
  }
  return count;
}

namespace {

Opinion updated_opinion(const ModelInstance& m, Opinion target, Opinion source, CounterRng& rng,
                        std::vector<Opinion>& scratch) {
  if (m.kind() == ProcessKind::Imitation) return source;
  m.opinions().descent_set_into(target, source, scratch);
  return scratch.size() == 1 ? scratch.front() : scratch[rng.below(scratch.size())];
}

}  // namespace

Configuration apply_event(const ModelInstance& m, const Configuration& c, DirectedEdge active,
                          CounterRng& rng) {
  if (!m.spatial().has_edge(active.target, active.source)) {
    throw Error(ErrorKind::InvalidParameter, "active pair is not a spatial edge");
  }
  const Opinion a = c[active.target];
  const Opinion b = c[active.source];
  if (m.classify(a, b) != EdgeType::Compatible) {
    throw Error(ErrorKind::NotCompatible, "edge (" + std::to_string(active.source) + "->" +
                                              std::to_string(active.target) + ") is not compatible");
  }
  Configuration next = c;
  std::vector<Opinion> scratch;
  next[active.target] = updated_opinion(m, a, b, rng, scratch);
  return next;
}

std::int64_t statistic_X(const ModelInstance& m, const Configuration& c) {
  return std::count_if(c.opinions.begin(), c.opinions.end(),
                       [&](Opinion a) { return m.opinions().eccentricity(a) <= m.tau(); });
}

std::int64_t statistic_Z(const ModelInstance& m, const Configuration& c) {
  std::int64_t z = 0;
  const int r = m.opinions().radius();
  for (Opinion a : c.opinions) z += m.opinions().eccentricity(a) - r;
  return z;
}

Configuration sample_uniform_config(const ModelInstance& m, CounterRng& rng) {
  Configuration c;
  c.opinions.resize(static_cast<std::size_t>(m.num_individuals()));
  const auto k = static_cast<std::uint64_t>(m.opinions().size());
  for (auto& a : c.opinions) a = static_cast<Opinion>(rng.below(k));
  return c;
}

namespace {

std::string shortest(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ec == std::errc{} ? end : buf);
}

// Swap-remove set of compatible edge ids with O(1) membership updates.
class CompatibleSet {
 public:
  explicit CompatibleSet(std::size_t num_edges) : position_(num_edges, kAbsent) {}

  std::size_t size() const { return members_.size(); }
  std::uint32_t at(std::size_t i) const { return members_[i]; }

  void set(std::uint32_t id, bool compatible) {
    const bool present = position_[id] != kAbsent;
    if (compatible && !present) {
      position_[id] = members_.size();
      members_.push_back(id);
    } else if (!compatible && present) {
      const std::size_t pos = position_[id];
      const std::uint32_t last = members_.back();
      members_[pos] = last;
      position_[last] = pos;
      members_.pop_back();
      position_[id] = kAbsent;
    }
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::vector<std::uint32_t> members_;
  std::vector<std::size_t> position_;
};

}  // namespace

SimResult run_to_fixation(const ModelInstance& m, const Configuration& init, CounterRng& rng,
                          std::uint64_t max_updates, std::ostream* trajectory) {
  if (max_updates < 1) throw Error(ErrorKind::InvalidParameter, "max_updates must be >= 1");
  m.validate(init);

  const OpinionSpace& space = m.opinions();
  const auto edges = m.spatial().edges();
  const int tau = m.tau();

  SimResult result;
  result.final = init;
  auto& config = result.final.opinions;
  result.x_initial = statistic_X(m, init);
  result.z_initial = statistic_Z(m, init);
  std::int64_t x = result.x_initial;
  std::int64_t z = result.z_initial;

  CompatibleSet compatible(edges.size());
  for (std::uint32_t id = 0; id < edges.size(); ++id) {
    if (m.classify(config[edges[id].u], config[edges[id].v]) == EdgeType::Compatible) {
      compatible.set(id, true);
    }
  }

  if (trajectory) {
    *trajectory << "event_index,time,phi,X,Z\n";
    *trajectory << "0,0," << compatible.size() << ',' << x << ',' << z << '\n';
  }

  double time = 0.0;
  std::vector<Opinion> scratch;
  while (compatible.size() > 0) {
    if (result.num_updates >= max_updates) {
      result.fixation_time = time;
      result.x_final = x;
      result.z_final = z;
      result.consensus = false;
      result.absorbed = false;
      throw UpdateBudgetExceeded("no absorption after " + std::to_string(max_updates) + " updates",
                                 std::move(result));
    }
    const auto count = compatible.size();
    time += rng.exponential(2.0 * static_cast<double>(count));
    const Edge e = edges[compatible.at(rng.below(count))];
    const bool forward = rng.coin();
    const Vertex target = forward ? e.v : e.u;
    const Vertex source = forward ? e.u : e.v;

    const Opinion before = config[target];
    const Opinion after = updated_opinion(m, before, config[source], rng, scratch);
    config[target] = after;
    ++result.num_updates;

    const int ecc_before = space.eccentricity(before);
    const int ecc_after = space.eccentricity(after);
    x += static_cast<int>(ecc_after <= tau) - static_cast<int>(ecc_before <= tau);
    z += ecc_after - ecc_before;

    for (std::uint32_t id : m.incident_edges(target)) {
      const Edge& f = edges[id];
      compatible.set(id, m.classify(config[f.u], config[f.v]) == EdgeType::Compatible);
    }

    if (trajectory) {
      *trajectory << result.num_updates << ',' << shortest(time) << ',' << compatible.size() << ',' << x << ','
                  << z << '\n';
    }
  }

  result.fixation_time = time;
  result.x_final = x;
  result.z_final = z;
  result.absorbed = true;
  result.consensus = result.final.is_constant();
  return result;
}

}  // namespace consensus
