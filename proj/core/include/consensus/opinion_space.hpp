#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "consensus/graph.hpp"

namespace consensus {

using Opinion = Vertex;

/// Opinion graph together with its precomputed all-pairs metric.
class OpinionSpace {
 public:
  /// Throws Error{Disconnected} if `g` is not connected.
  static OpinionSpace build(Graph g);

  const Graph& graph() const { return graph_; }
  const MetricProfile& metric() const { return metric_; }
  Vertex size() const { return graph_.num_vertices(); }

  int distance(Opinion a, Opinion b) const { return metric_.distance(a, b); }
  int eccentricity(Opinion a) const { return metric_.eccentricity(a); }
  int radius() const { return metric_.radius(); }
  int diameter() const { return metric_.diameter(); }

  /// D(a,b): neighbors of `a` that are one step closer to `b`, ascending.
  /// Throws Error{EqualOpinions} when a == b.
  std::vector<Opinion> descent_set(Opinion a, Opinion b) const;

  /// Same as descent_set but appends into `out` (cleared first) and skips
  /// the a != b check; used on the simulation hot path.
  void descent_set_into(Opinion a, Opinion b, std::vector<Opinion>& out) const;

 private:
  OpinionSpace(Graph g, MetricProfile m) : graph_(std::move(g)), metric_(std::move(m)) {}

  Graph graph_;
  MetricProfile metric_;
};

/// Exact non-negative-denominator rational, kept in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

struct EccViolation {
  Opinion a = 0;
  Opinion b = 0;
  Rational lhs;  // strictly positive
};

struct EccReport {
  bool holds = true;
  std::vector<EccViolation> violations;  // sorted by (a, b), a < b
};

/// Left-hand side of the eccentricity inequality for the pair (a, b):
///   sum_{a' in D(a,b)} (ecc(a') - ecc(a)) / |D(a,b)|
/// + sum_{b' in D(b,a)} (ecc(b') - ecc(b)) / |D(b,a)|
Rational eccentricity_lhs(const OpinionSpace& s, Opinion a, Opinion b);

/// Evaluates the eccentricity inequality over every unordered pair a != b in
/// exact arithmetic. When `max_distance` is set, only pairs with
/// d(a,b) <= *max_distance are reported (the verdict covers the same pairs).
EccReport check_eccentricity_inequalities(const OpinionSpace& s,
                                          std::optional<int> max_distance = std::nullopt);

/// JSON form: {"holds": bool, "violations": [{"a","b","lhs_num","lhs_den"}]}.
std::string to_json(const EccReport& report);

/// Random search for a connected graph violating the eccentricity
/// inequalities. Samples G(n, p) graphs with n in [1, max_vertices] and p on a
/// fixed grid, rejecting disconnected draws; each draw counts as one attempt.
std::optional<Graph> find_ecc_violation(int max_vertices, std::uint64_t rng_seed,
                                        std::uint64_t max_attempts);

}  // namespace consensus
