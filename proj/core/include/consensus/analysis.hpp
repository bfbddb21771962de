#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "consensus/dynamics.hpp"

namespace consensus {

// Initial laws ---------------------------------------------------------------

/// Product-form initial law: uniform, a fixed configuration, or independent
/// per-individual marginals.
class InitialDistribution {
 public:
  enum class Kind { UniformProduct, Fixed, PerVertexMarginals };

  static InitialDistribution uniform();
  static InitialDistribution fixed(Configuration c);
  /// rows[x][a] = P(opinion at x is a); each row must sum to 1 within 1e-12.
  static InitialDistribution marginals(std::vector<std::vector<double>> rows);

  Kind kind() const { return kind_; }
  const Configuration& configuration() const { return fixed_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

  /// Throws Error{InvalidParameter} if the law does not fit the instance.
  void validate(const ModelInstance& m) const;

  /// P(opinion at x is a).
  double marginal(const ModelInstance& m, Vertex x, Opinion a) const;

  Configuration sample(const ModelInstance& m, CounterRng& rng) const;

 private:
  Kind kind_ = Kind::UniformProduct;
  Configuration fixed_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::vector<double>> cumulative_;
};

// Monte Carlo ----------------------------------------------------------------

struct Estimate {
  double p_hat = 0.0;
  std::uint64_t n_runs = 0;
  double std_error = 0.0;
  std::pair<double, double> ci95{0.0, 1.0};
};

/// Normal-approximation 95% interval, switching to the exact Clopper-Pearson
/// endpoint when every run (or no run) succeeded.
Estimate make_estimate(std::uint64_t successes, std::uint64_t n_runs);

/// Per-run summary kept by the batch runner.
struct RunRecord {
  bool consensus = false;
  std::uint64_t num_updates = 0;
  double fixation_time = 0.0;
  std::int64_t x_initial = 0;
  std::int64_t x_final = 0;
  std::int64_t z_initial = 0;
  std::int64_t z_final = 0;
};

/// Runs `n_runs` independent simulations; run i uses CounterRng(master_seed, i)
/// for both its initial state and its dynamics, so the records do not depend
/// on `threads`. `threads` = 0 means hardware concurrency. An exhausted update
/// budget is rethrown as UpdateBudgetExceeded naming the run index.
std::vector<RunRecord> simulate_runs(const ModelInstance& m, const InitialDistribution& init,
                                     std::uint64_t n_runs, std::uint64_t master_seed,
                                     unsigned threads = 0,
                                     std::uint64_t max_updates = kDefaultMaxUpdates);

Estimate estimate_consensus(const ModelInstance& m, const InitialDistribution& init,
                            std::uint64_t n_runs, std::uint64_t master_seed, unsigned threads = 0);

// Exact oracle ---------------------------------------------------------------

inline constexpr std::uint64_t kDefaultStateCap = 1'000'000;

/// Absorption probability into constant configurations for the embedded jump
/// chain, averaged over `init`. Enumerates all |V|^|individuals| states.
/// Throws Error{StateSpaceTooLarge} above `state_cap`.
double exact_consensus(const ModelInstance& m, const InitialDistribution& init,
                       std::uint64_t state_cap = kDefaultStateCap);

// Lower bounds -----------------------------------------------------------------

struct BoundResult {
  double value = 0.0;
  bool applicable = false;
  std::string reason;
};

/// E(#{x : ecc(opinion at x) <= tau}) / #individuals; applicable iff
/// radius <= tau < diameter. Throws Error{WrongProcessKind}.
BoundResult bound_imitation(const ModelInstance& m, const InitialDistribution& init);

/// 1 - (1/#individuals) sum_x (E ecc(opinion at x) - radius) / (tau + 1 - radius);
/// applicable iff radius <= tau < diameter and the eccentricity inequalities
/// hold. Negative values are returned as-is. Throws Error{WrongProcessKind}.
BoundResult bound_attraction(const ModelInstance& m, const InitialDistribution& init);

/// Closed-form attraction bound under the uniform law for lattice, regular
/// tree and star-like opinion graphs. tau must lie in [radius, 2*radius).
/// Throws Error{InvalidParameter | TauOutOfRange}.
BoundResult closed_form_bound(const FamilySpec& family, int tau);

/// Families covered by the positivity thresholds.
struct ThresholdFamily {
  enum class Kind { Cube, Rect, Star };
  Kind kind = Kind::Cube;
  int a = 1;  // cube: dimension n | rect: L1 | star: branches n
  int b = 1;  // cube: half-extent L | rect: L2 | star: radius r

  static ThresholdFamily cube(int n, int L) { return {Kind::Cube, n, L}; }
  static ThresholdFamily rect(int L1, int L2) { return {Kind::Rect, L1, L2}; }
  static ThresholdFamily star(int n, int r) { return {Kind::Star, n, r}; }

  int radius() const;
  int diameter() const { return 2 * radius(); }
  /// The matching opinion-graph family for closed_form_bound.
  FamilySpec opinion_family() const;
};

/// Smallest tau for which the closed-form bound is strictly positive,
/// computed in exact integer arithmetic. Throws Error{InvalidParameter}.
int min_positive_tau(const ThresholdFamily& family);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

/// Parameter grid for reproduce_threshold_tables: every (first, second)
/// pair is one cell.
struct ThresholdGrid {
  enum class Kind { Cube, Rect, Tree, Star };
  Kind kind = Kind::Cube;
  std::vector<int> first;   // cube: n | rect: L1 | tree, star: n
  std::vector<int> second;  // cube: L | rect: L2 | tree, star: r
};

/// cube/rect/star: columns <p1>,<p2>,radius,diameter,min_positive_tau.
/// tree: n,r,radius,diameter,tau,bound with tau = 2r - 1.
Table reproduce_threshold_tables(const ThresholdGrid& grid);

// Martingale diagnostics -----------------------------------------------------

struct MartingaleReport {
  std::string statistic;  // "X" (imitation) or "Z" (attraction)
  bool two_sided = true;
  std::uint64_t n_runs = 0;
  double mean_initial = 0.0;
  double mean_final = 0.0;
  double mean_difference = 0.0;  // mean(final - initial)
  double std_error = 0.0;        // sample stddev of the differences / sqrt(n)
  bool passed = false;
  /// Imitation only: every absorbed run ended with X in {0, #individuals}.
  bool range_ok = true;
};

/// Imitation: two-sided 3-sigma test of E(X_T) = E(X_0).
/// Attraction: one-sided 3-sigma test of E(Z_T) <= E(Z_0).
MartingaleReport martingale_diagnostic(const ModelInstance& m, const InitialDistribution& init,
                                       std::uint64_t n_runs, std::uint64_t master_seed,
                                       unsigned threads = 0);

}  // namespace consensus
