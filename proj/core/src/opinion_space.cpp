#include "consensus/opinion_space.hpp"

#include <array>
#include <numeric>

#include "consensus/error.hpp"
#include "consensus/rng.hpp"
#include "json.hpp"

namespace consensus {

OpinionSpace OpinionSpace::build(Graph g) {
  MetricProfile m = metric_profile(g);
  return OpinionSpace(std::move(g), std::move(m));
}

void OpinionSpace::descent_set_into(Opinion a, Opinion b, std::vector<Opinion>& out) const {
  out.clear();
  const int target = distance(a, b) - 1;
  for (Opinion next : graph_.neighbors(a)) {
    if (distance(next, b) == target) out.push_back(next);
  }
}

std::vector<Opinion> OpinionSpace::descent_set(Opinion a, Opinion b) const {
  if (a == b) throw Error(ErrorKind::EqualOpinions, "D(a,a) is undefined");
  std::vector<Opinion> out;
  descent_set_into(a, b, out);
  return out;
}

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorKind::InvalidParameter, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

namespace {

// Sum of (ecc(a') - ecc(a)) over a' in D(a,b), with |D(a,b)|.
std::pair<std::int64_t, std::int64_t> descent_drift(const OpinionSpace& s, Opinion a, Opinion b) {
  std::int64_t sum = 0;
  std::int64_t count = 0;
  const int target = s.distance(a, b) - 1;
  const int base = s.eccentricity(a);
  for (Opinion next : s.graph().neighbors(a)) {
    if (s.distance(next, b) == target) {
      sum += s.eccentricity(next) - base;
      ++count;
    }
  }
  return {sum, count};
}

// Numerator of the pair's left-hand side over |D(a,b)|*|D(b,a)|; the sign is
// all the verdict needs.
std::int64_t lhs_numerator(const OpinionSpace& s, Opinion a, Opinion b, std::int64_t& den) {
  const auto [sa, na] = descent_drift(s, a, b);
  const auto [sb, nb] = descent_drift(s, b, a);
  den = na * nb;
  return sa * nb + sb * na;
}

bool has_violation(const OpinionSpace& s) {
  for (Opinion a = 0; a < s.size(); ++a) {
    for (Opinion b = a + 1; b < s.size(); ++b) {
      std::int64_t den = 1;
      if (lhs_numerator(s, a, b, den) > 0) return true;
    }
  }
  return false;
}

}  // namespace

Rational eccentricity_lhs(const OpinionSpace& s, Opinion a, Opinion b) {
  if (a == b) throw Error(ErrorKind::EqualOpinions, "eccentricity inequality needs a != b");
  std::int64_t den = 1;
  const std::int64_t num = lhs_numerator(s, a, b, den);
  return Rational::make(num, den);
}

EccReport check_eccentricity_inequalities(const OpinionSpace& s, std::optional<int> max_distance) {
  EccReport report;
  for (Opinion a = 0; a < s.size(); ++a) {
    for (Opinion b = a + 1; b < s.size(); ++b) {
      if (max_distance && s.distance(a, b) > *max_distance) continue;
      std::int64_t den = 1;
      const std::int64_t num = lhs_numerator(s, a, b, den);
      if (num > 0) report.violations.push_back({a, b, Rational::make(num, den)});
    }
  }
  report.holds = report.violations.empty();
  return report;
}

std::string to_json(const EccReport& report) {
  nlohmann::ordered_json j;
  j["holds"] = report.holds;
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : report.violations) {
    j["violations"].push_back({{"a", v.a}, {"b", v.b}, {"lhs_num", v.lhs.num}, {"lhs_den", v.lhs.den}});
  }
  return j.dump();
}

std::optional<Graph> find_ecc_violation(int max_vertices, std::uint64_t rng_seed,
                                        std::uint64_t max_attempts) {
  if (max_vertices < 1) throw Error(ErrorKind::InvalidParameter, "max_vertices must be >= 1");
  constexpr std::array<double, 6> kEdgeProbability{0.15, 0.2, 0.25, 0.3, 0.4, 0.5};
  CounterRng rng(rng_seed);
  std::uint64_t attempts = 0;
  // Disconnected draws are rejected without counting; the draw cap keeps a
  // sparse grid point from looping forever.
  const std::uint64_t max_draws = max_attempts * 64 + 64;
  for (std::uint64_t draw = 0; draw < max_draws && attempts < max_attempts; ++draw) {
    const auto n = static_cast<Vertex>(1 + rng.below(static_cast<std::uint64_t>(max_vertices)));
    const double p = kEdgeProbability[rng.below(kEdgeProbability.size())];
    std::vector<Edge> edges;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = u + 1; v < n; ++v)
        if (rng.unit() < p) edges.push_back({u, v});
    Graph g = Graph::from_edge_list(n, edges);
    if (!is_connected(g)) continue;
    ++attempts;
    if (has_violation(OpinionSpace::build(g))) return g;
  }
  return std::nullopt;
}

}  // namespace consensus
