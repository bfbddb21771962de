#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "consensus/error.hpp"
#include "consensus/graph.hpp"
#include "consensus/opinion_space.hpp"
#include "consensus/rng.hpp"

namespace consensus {

enum class ProcessKind { Imitation, Attraction };

std::string_view to_string(ProcessKind kind);
/// Accepts "imitation" / "attraction"; throws Error{InvalidParameter}.
ProcessKind parse_process_kind(std::string_view text);

enum class EdgeType { Congruent, Compatible, Discordant };

/// Directed interaction: `source` influences `target`.
struct DirectedEdge {
  Vertex target = 0;
  Vertex source = 0;
};

/// One opinion per spatial vertex.
struct Configuration {
  std::vector<Opinion> opinions;

  std::size_t size() const { return opinions.size(); }
  Opinion operator[](std::size_t x) const { return opinions[x]; }
  Opinion& operator[](std::size_t x) { return opinions[x]; }
  bool is_constant() const;

  /// Single line of space-separated opinion ids (no trailing newline).
  std::string to_string() const;
  /// Inverse of to_string; surrounding whitespace is ignored.
  /// Throws Error{ParseError}.
  static Configuration parse(const std::string& text);

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Spatial graph + opinion space + confidence threshold + update rule.
class ModelInstance {
 public:
  /// Throws Error{Disconnected} if the spatial graph is disconnected and
  /// Error{InvalidParameter} if tau < 0.
  ModelInstance(Graph spatial, OpinionSpace opinions, int tau, ProcessKind kind);

  const Graph& spatial() const { return spatial_; }
  const OpinionSpace& opinions() const { return opinions_; }
  int tau() const { return tau_; }
  ProcessKind kind() const { return kind_; }
  Vertex num_individuals() const { return spatial_.num_vertices(); }

  /// Ids of spatial edges (indices into spatial().edges()) incident to x.
  std::span<const std::uint32_t> incident_edges(Vertex x) const {
    return {incident_.data() + incident_offsets_[x], incident_.data() + incident_offsets_[x + 1]};
  }

  EdgeType classify(Opinion a, Opinion b) const {
    const int d = opinions_.distance(a, b);
    if (d == 0) return EdgeType::Congruent;
    return d <= tau_ ? EdgeType::Compatible : EdgeType::Discordant;
  }

  /// Throws Error{InvalidParameter} if `c` does not fit this instance.
  void validate(const Configuration& c) const;

 private:
  Graph spatial_;
  OpinionSpace opinions_;
  int tau_;
  ProcessKind kind_;
  std::vector<std::size_t> incident_offsets_;
  std::vector<std::uint32_t> incident_;
};

/// Throws Error{InvalidParameter} if `edge` is not a spatial edge.
EdgeType classify_edge(const ModelInstance& m, const Configuration& c, Edge edge);

/// Number of compatible spatial edges; zero exactly on absorbing states.
std::size_t phi(const ModelInstance& m, const Configuration& c);

/// Applies one update along a compatible directed edge. Imitation copies the
/// source's opinion; attraction moves the target one step toward the source,
/// uniformly over the descent set.
/// Throws Error{NotCompatible} if the edge is not compatible in `c`.
Configuration apply_event(const ModelInstance& m, const Configuration& c, DirectedEdge active,
                          CounterRng& rng);

/// Number of individuals whose opinion has eccentricity <= tau.
std::int64_t statistic_X(const ModelInstance& m, const Configuration& c);

/// Sum over individuals of (eccentricity(opinion) - radius).
std::int64_t statistic_Z(const ModelInstance& m, const Configuration& c);

/// Independent uniform opinion per individual.
Configuration sample_uniform_config(const ModelInstance& m, CounterRng& rng);

struct SimResult {
  bool consensus = false;
  bool absorbed = false;
  Configuration final;
  double fixation_time = 0.0;
  std::uint64_t num_updates = 0;
  std::int64_t x_initial = 0;
  std::int64_t x_final = 0;
  std::int64_t z_initial = 0;
  std::int64_t z_final = 0;
};

/// Raised when a run hits its update budget; carries the partial state.
class UpdateBudgetExceeded : public Error {
 public:
  UpdateBudgetExceeded(const std::string& what, SimResult partial)
      : Error(ErrorKind::UpdateBudgetExceeded, what), partial_(std::move(partial)) {}

  const SimResult& partial() const { return partial_; }

 private:
  SimResult partial_;
};

inline constexpr std::uint64_t kDefaultMaxUpdates = 1'000'000'000;

/// Samples the continuous-time process from `init` until absorption.
///
/// Only compatible edges can change the state, so the sampler draws holding
/// times ~ Exp(2*phi) and picks a compatible undirected edge uniformly, then a
/// fair direction. The compatible set is maintained incrementally.
///
/// When `trajectory` is non-null, writes CSV rows
/// "event_index,time,phi,X,Z" (with header; row 0 is the initial state).
SimResult run_to_fixation(const ModelInstance& m, const Configuration& init, CounterRng& rng,
                          std::uint64_t max_updates = kDefaultMaxUpdates,
                          std::ostream* trajectory = nullptr);

}  // namespace consensus
