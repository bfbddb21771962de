#include "consensus/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace consensus {

// Initial laws ---------------------------------------------------------------

InitialDistribution InitialDistribution::uniform() { return {}; }

InitialDistribution InitialDistribution::fixed(Configuration c) {
  InitialDistribution d;
  d.kind_ = Kind::Fixed;
  d.fixed_ = std::move(c);
  return d;
}

InitialDistribution InitialDistribution::marginals(std::vector<std::vector<double>> rows) {
  InitialDistribution d;
  d.kind_ = Kind::PerVertexMarginals;
  for (const auto& row : rows) {
    double total = 0.0;
    std::vector<double> cumulative;
    cumulative.reserve(row.size());
    for (double p : row) {
      if (!(p >= 0.0)) throw Error(ErrorKind::InvalidParameter, "negative marginal probability");
      total += p;
      cumulative.push_back(total);
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw Error(ErrorKind::InvalidParameter, "marginal row sums to " + std::to_string(total));
    }
    d.cumulative_.push_back(std::move(cumulative));
  }
  d.rows_ = std::move(rows);
  return d;
}

void InitialDistribution::validate(const ModelInstance& m) const {
  switch (kind_) {
    case Kind::UniformProduct: return;
    case Kind::Fixed: m.validate(fixed_); return;
    case Kind::PerVertexMarginals:
      if (rows_.size() != static_cast<std::size_t>(m.num_individuals())) {
        throw Error(ErrorKind::InvalidParameter, "marginal table needs one row per individual");
      }
      for (const auto& row : rows_) {
        if (row.size() != static_cast<std::size_t>(m.opinions().size())) {
          throw Error(ErrorKind::InvalidParameter, "marginal row needs one entry per opinion");
        }
      }
      return;
  }
}

double InitialDistribution::marginal(const ModelInstance& m, Vertex x, Opinion a) const {
  switch (kind_) {
    case Kind::UniformProduct: return 1.0 / static_cast<double>(m.opinions().size());
    case Kind::Fixed: return fixed_[x] == a ? 1.0 : 0.0;
    case Kind::PerVertexMarginals: return rows_[x][a];
  }
  return 0.0;
}

Configuration InitialDistribution::sample(const ModelInstance& m, CounterRng& rng) const {
  switch (kind_) {
    case Kind::UniformProduct: return sample_uniform_config(m, rng);
    case Kind::Fixed: return fixed_;
    case Kind::PerVertexMarginals: {
      Configuration c;
      c.opinions.reserve(cumulative_.size());
      for (const auto& cumulative : cumulative_) {
        const double u = rng.unit() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        // Skip zero-probability opinions that share the boundary value.
        if (it == cumulative.end()) it = std::prev(cumulative.end());
        c.opinions.push_back(static_cast<Opinion>(it - cumulative.begin()));
      }
      return c;
    }
  }
  return {};
}

// Monte Carlo ----------------------------------------------------------------

Estimate make_estimate(std::uint64_t successes, std::uint64_t n_runs) {
  if (n_runs == 0) throw Error(ErrorKind::InvalidParameter, "n_runs must be >= 1");
  Estimate e;
  e.n_runs = n_runs;
  const double n = static_cast<double>(n_runs);
  e.p_hat = static_cast<double>(successes) / n;
  e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / n);
  constexpr double kZ = 1.959963984540054;
  constexpr double kHalfAlpha = 0.025;
  if (successes == n_runs) {
    e.ci95 = {std::pow(kHalfAlpha, 1.0 / n), 1.0};
  } else if (successes == 0) {
    e.ci95 = {0.0, 1.0 - std::pow(kHalfAlpha, 1.0 / n)};
  } else {
    e.ci95 = {std::max(0.0, e.p_hat - kZ * e.std_error), std::min(1.0, e.p_hat + kZ * e.std_error)};
  }
  return e;
}

std::vector<RunRecord> simulate_runs(const ModelInstance& m, const InitialDistribution& init,
                                     std::uint64_t n_runs, std::uint64_t master_seed, unsigned threads,
                                     std::uint64_t max_updates) {
  if (n_runs == 0) throw Error(ErrorKind::InvalidParameter, "n_runs must be >= 1");
  init.validate(m);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_runs));

  std::vector<RunRecord> records(n_runs);
  std::mutex failure_mutex;
  std::uint64_t failed_run = std::numeric_limits<std::uint64_t>::max();
  std::exception_ptr failure;

  auto worker = [&](unsigned w) {
    for (std::uint64_t i = w; i < n_runs; i += threads) {
      try {
        CounterRng rng(master_seed, i);
        const Configuration start = init.sample(m, rng);
        const SimResult r = run_to_fixation(m, start, rng, max_updates);
        records[i] = {r.consensus, r.num_updates, r.fixation_time, r.x_initial, r.x_final,
                      r.z_initial, r.z_final};
      } catch (const UpdateBudgetExceeded& e) {
        std::lock_guard lock(failure_mutex);
        // Report the lowest failing index so the error is thread-count independent.
        if (i < failed_run) {
          failed_run = i;
          failure = std::make_exception_ptr(
              UpdateBudgetExceeded("run " + std::to_string(i) + ": " + e.what(), e.partial()));
        }
        return;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_run) {
          failed_run = i;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

Estimate estimate_consensus(const ModelInstance& m, const InitialDistribution& init, std::uint64_t n_runs,
                            std::uint64_t master_seed, unsigned threads) {
  const auto records = simulate_runs(m, init, n_runs, master_seed, threads);
  const auto successes = static_cast<std::uint64_t>(
      std::count_if(records.begin(), records.end(), [](const RunRecord& r) { return r.consensus; }));
  return make_estimate(successes, n_runs);
}

// Exact oracle ---------------------------------------------------------------

namespace {

constexpr std::size_t kDenseLimit = 2000;
constexpr double kResidualTolerance = 1e-12;
constexpr int kMaxSweeps = 1'000'000;

struct Transition {
  std::uint64_t to;
  double probability;
};

}  // namespace

double exact_consensus(const ModelInstance& m, const InitialDistribution& init, std::uint64_t state_cap) {
  init.validate(m);
  const auto k = static_cast<std::uint64_t>(m.opinions().size());
  const auto n = static_cast<std::size_t>(m.num_individuals());

  // State id = sum_x opinion(x) * k^x.
  std::vector<std::uint64_t> place(n, 1);
  std::uint64_t num_states = 1;
  for (std::size_t x = 0; x < n; ++x) {
    place[x] = num_states;
    if (num_states > state_cap / k) {
      throw Error(ErrorKind::StateSpaceTooLarge,
                  std::to_string(k) + "^" + std::to_string(n) + " states exceed cap " + std::to_string(state_cap));
    }
    num_states *= k;
  }

  const auto edges = m.spatial().edges();
  constexpr std::uint64_t kAbsorbing = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> transient_index(num_states, kAbsorbing);
  std::vector<double> absorbed_value(num_states, 0.0);
  std::vector<std::uint64_t> transient_states;

  // Sparse rows of the jump chain restricted to transient states; mass
  // flowing straight into consensus is folded into `rhs`.
  std::vector<std::size_t> row_offsets{0};
  std::vector<Transition> entries;
  std::vector<double> rhs;

  Configuration c;
  c.opinions.resize(n);
  auto decode = [&](std::uint64_t s) {
    for (std::size_t x = 0; x < n; ++x) {
      c[x] = static_cast<Opinion>(s % k);
      s /= k;
    }
  };

  std::vector<Edge> compatible;
  for (std::uint64_t s = 0; s < num_states; ++s) {
    decode(s);
    bool any = false;
    for (const Edge& e : edges) {
      if (m.classify(c[e.u], c[e.v]) == EdgeType::Compatible) {
        any = true;
        break;
      }
    }
    if (!any) absorbed_value[s] = c.is_constant() ? 1.0 : 0.0;
    else {
      transient_index[s] = transient_states.size();
      transient_states.push_back(s);
    }
  }

  std::vector<Opinion> descent;
  for (std::uint64_t s : transient_states) {
    decode(s);
    compatible.clear();
    for (const Edge& e : edges) {
      if (m.classify(c[e.u], c[e.v]) == EdgeType::Compatible) compatible.push_back(e);
    }
    const double per_direction = 1.0 / (2.0 * static_cast<double>(compatible.size()));
    double into_consensus = 0.0;
    const std::size_t row_start = entries.size();
    auto add = [&](Vertex target, Opinion next, double probability) {
      const std::uint64_t to = s + (static_cast<std::uint64_t>(next) - static_cast<std::uint64_t>(c[target])) * place[target];
      if (transient_index[to] == kAbsorbing) {
        into_consensus += probability * absorbed_value[to];
        return;
      }
      for (std::size_t i = row_start; i < entries.size(); ++i) {
        if (entries[i].to == to) {
          entries[i].probability += probability;
          return;
        }
      }
      entries.push_back({to, probability});
    };
    for (const Edge& e : compatible) {
      for (const auto& [target, source] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
        if (m.kind() == ProcessKind::Imitation) {
          add(target, c[source], per_direction);
        } else {
          m.opinions().descent_set_into(c[target], c[source], descent);
          const double share = per_direction / static_cast<double>(descent.size());
          for (Opinion next : descent) add(target, next, share);
        }
      }
    }
    for (std::size_t i = row_start; i < entries.size(); ++i) entries[i].to = transient_index[entries[i].to];
    row_offsets.push_back(entries.size());
    rhs.push_back(into_consensus);
  }

  const std::size_t t = transient_states.size();
  std::vector<double> h(t, 0.0);
  if (t > 0 && t < kDenseLimit) {
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t));
    Eigen::VectorXd b(static_cast<Eigen::Index>(t));
    for (std::size_t i = 0; i < t; ++i) {
      b(static_cast<Eigen::Index>(i)) = rhs[i];
      for (std::size_t j = row_offsets[i]; j < row_offsets[i + 1]; ++j) {
        system(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(entries[j].to)) -= entries[j].probability;
      }
    }
    const Eigen::VectorXd solution = system.partialPivLu().solve(b);
    for (std::size_t i = 0; i < t; ++i) h[i] = solution(static_cast<Eigen::Index>(i));
  } else if (t > 0) {
    double residual = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < kMaxSweeps && residual > kResidualTolerance; ++sweep) {
      for (std::size_t i = 0; i < t; ++i) {
        double v = rhs[i];
        for (std::size_t j = row_offsets[i]; j < row_offsets[i + 1]; ++j) v += entries[j].probability * h[entries[j].to];
        h[i] = v;
      }
      residual = 0.0;
      for (std::size_t i = 0; i < t; ++i) {
        double v = rhs[i];
        for (std::size_t j = row_offsets[i]; j < row_offsets[i + 1]; ++j) v += entries[j].probability * h[entries[j].to];
        residual = std::max(residual, std::abs(v - h[i]));
      }
    }
    if (residual > kResidualTolerance) {
      throw Error(ErrorKind::StateSpaceTooLarge, "Gauss-Seidel did not reach the residual tolerance");
    }
  }

  auto value_of = [&](std::uint64_t s) {
    return transient_index[s] == kAbsorbing ? absorbed_value[s] : h[transient_index[s]];
  };

  switch (init.kind()) {
    case InitialDistribution::Kind::Fixed: {
      std::uint64_t s = 0;
      for (std::size_t x = 0; x < n; ++x) s += static_cast<std::uint64_t>(init.configuration()[x]) * place[x];
      return value_of(s);
    }
    case InitialDistribution::Kind::UniformProduct: {
      double total = 0.0;
      for (std::uint64_t s = 0; s < num_states; ++s) total += value_of(s);
      return total / static_cast<double>(num_states);
    }
    case InitialDistribution::Kind::PerVertexMarginals: {
      double total = 0.0;
      for (std::uint64_t s = 0; s < num_states; ++s) {
        decode(s);
        double weight = 1.0;
        for (std::size_t x = 0; x < n && weight > 0.0; ++x) weight *= init.rows()[x][c[x]];
        total += weight * value_of(s);
      }
      return total;
    }
  }
  return 0.0;
}

// Lower bounds -----------------------------------------------------------------

namespace {

// E(f(opinion at x)) summed over individuals.
template <typename F>
double expected_sum(const ModelInstance& m, const InitialDistribution& init, F f) {
  double total = 0.0;
  const Vertex n = m.num_individuals();
  const Opinion k = m.opinions().size();
  if (init.kind() == InitialDistribution::Kind::UniformProduct) {
    double per_vertex = 0.0;
    for (Opinion a = 0; a < k; ++a) per_vertex += f(a);
    return per_vertex * static_cast<double>(n) / static_cast<double>(k);
  }
  for (Vertex x = 0; x < n; ++x) {
    for (Opinion a = 0; a < k; ++a) {
      const double p = init.marginal(m, x, a);
      if (p != 0.0) total += p * f(a);
    }
  }
  return total;
}

std::string tau_range_reason(const ModelInstance& m) {
  return "tau=" + std::to_string(m.tau()) + " outside [radius, diameter) = [" +
         std::to_string(m.opinions().radius()) + ", " + std::to_string(m.opinions().diameter()) + ")";
}

bool tau_in_range(const ModelInstance& m) {
  return m.tau() >= m.opinions().radius() && m.tau() < m.opinions().diameter();
}

}  // namespace

BoundResult bound_imitation(const ModelInstance& m, const InitialDistribution& init) {
  if (m.kind() != ProcessKind::Imitation) throw Error(ErrorKind::WrongProcessKind, "imitation bound needs the imitation process");
  init.validate(m);
  const auto& space = m.opinions();
  BoundResult result;
  if (init.kind() == InitialDistribution::Kind::UniformProduct) {
    // Integer count over opinions avoids rounding in the headline value.
    Opinion central = 0;
    for (Opinion a = 0; a < space.size(); ++a) central += space.eccentricity(a) <= m.tau();
    result.value = static_cast<double>(central) / static_cast<double>(space.size());
  } else {
    result.value = expected_sum(m, init, [&](Opinion a) { return space.eccentricity(a) <= m.tau() ? 1.0 : 0.0; }) /
                   static_cast<double>(m.num_individuals());
  }
  result.applicable = tau_in_range(m);
  if (!result.applicable) result.reason = tau_range_reason(m);
  return result;
}

BoundResult bound_attraction(const ModelInstance& m, const InitialDistribution& init) {
  if (m.kind() != ProcessKind::Attraction) throw Error(ErrorKind::WrongProcessKind, "attraction bound needs the attraction process");
  init.validate(m);
  const auto& space = m.opinions();
  const int r = space.radius();
  const double scale = static_cast<double>(m.tau() + 1 - r);
  BoundResult result;
  double excess = 0.0;  // average over individuals of E(ecc) - radius
  if (init.kind() == InitialDistribution::Kind::UniformProduct) {
    std::int64_t total = 0;
    for (Opinion a = 0; a < space.size(); ++a) total += space.eccentricity(a) - r;
    excess = static_cast<double>(total) / static_cast<double>(space.size());
  } else {
    excess = expected_sum(m, init, [&](Opinion a) { return static_cast<double>(space.eccentricity(a) - r); }) /
             static_cast<double>(m.num_individuals());
  }
  result.value = 1.0 - excess / scale;

  if (!tau_in_range(m)) {
    result.reason = tau_range_reason(m);
  } else if (!check_eccentricity_inequalities(space).holds) {
    result.reason = "opinion graph violates the eccentricity inequalities";
  } else {
    result.applicable = true;
  }
  return result;
}

BoundResult closed_form_bound(const FamilySpec& family, int tau) {
  const auto& p = family.params;
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::InvalidParameter, what);
  };
  int radius = 0;
  double mean_excess = 0.0;  // mean over opinions of ecc(a) - radius
  switch (family.kind) {
    case FamilySpec::Kind::Lattice:
      require(!p.empty(), "lattice needs at least one half-extent");
      for (int L : p) {
        require(L >= 1, "lattice half-extents must be >= 1");
        radius += L;
        mean_excess += static_cast<double>(L) * (L + 1) / (2.0 * L + 1);
      }
      break;
    case FamilySpec::Kind::Tree: {
      require(p.size() == 2 && p[0] >= 2 && p[1] >= 1, "tree needs degree >= 2 and radius >= 1");
      const long double n = p[0];
      const int r = p[1];
      radius = r;
      const long double nr = std::pow(n, static_cast<long double>(r));
      const long double nr1 = nr * n;
      mean_excess = static_cast<double>(n * (r * nr1 - (r + 1) * nr + 1) / ((1 - n) * (1 - nr1)));
      break;
    }
    case FamilySpec::Kind::Star: {
      require(p.size() == 2 && p[0] >= 2 && p[1] >= 1, "star needs >= 2 branches and radius >= 1");
      const double n = p[0];
      const double r = p[1];
      radius = p[1];
      mean_excess = r * (r + 1) * n / (2.0 * (1 + r * n));
      break;
    }
    default:
      throw Error(ErrorKind::InvalidParameter, "no closed form for family " + family.to_string());
  }
  if (tau < radius || tau >= 2 * radius) {
    throw Error(ErrorKind::TauOutOfRange, "tau=" + std::to_string(tau) + " outside [" + std::to_string(radius) +
                                              ", " + std::to_string(2 * radius) + ")");
  }
  BoundResult result;
  result.value = 1.0 - mean_excess / static_cast<double>(tau + 1 - radius);
  result.applicable = true;
  return result;
}

int ThresholdFamily::radius() const {
  switch (kind) {
    case Kind::Cube: return a * b;
    case Kind::Rect: return a + b;
    case Kind::Star: return b;
  }
  return 0;
}

FamilySpec ThresholdFamily::opinion_family() const {
  switch (kind) {
    case Kind::Cube: return {FamilySpec::Kind::Lattice, std::vector<int>(static_cast<std::size_t>(a), b)};
    case Kind::Rect: return {FamilySpec::Kind::Lattice, {a, b}};
    case Kind::Star: return {FamilySpec::Kind::Star, {a, b}};
  }
  return {};
}

int min_positive_tau(const ThresholdFamily& family) {
  const std::int64_t a = family.a;
  const std::int64_t b = family.b;
  if (a < 1 || b < 1 || (family.kind == ThresholdFamily::Kind::Star && a < 2)) {
    throw Error(ErrorKind::InvalidParameter, "threshold family parameters out of range");
  }
  // Bound > 0  <=>  tau > radius - 1 + S, with S = mean excess as a fraction.
  std::int64_t num = 0;
  std::int64_t den = 1;
  switch (family.kind) {
    case ThresholdFamily::Kind::Cube:
      num = a * b * (b + 1);
      den = 2 * b + 1;
      break;
    case ThresholdFamily::Kind::Rect:
      num = a * (a + 1) * (2 * b + 1) + b * (b + 1) * (2 * a + 1);
      den = (2 * a + 1) * (2 * b + 1);
      break;
    case ThresholdFamily::Kind::Star:
      num = b * (b + 1) * a;
      den = 2 * (1 + b * a);
      break;
  }
  return static_cast<int>(family.radius() - 1 + num / den + 1);
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc{} ? end : buf);
}

}  // namespace

Table reproduce_threshold_tables(const ThresholdGrid& grid) {
  Table table;
  using K = ThresholdGrid::Kind;
  switch (grid.kind) {
    case K::Cube: table.header = {"n", "L", "radius", "diameter", "min_positive_tau"}; break;
    case K::Rect: table.header = {"L1", "L2", "radius", "diameter", "min_positive_tau"}; break;
    case K::Star: table.header = {"n", "r", "radius", "diameter", "min_positive_tau"}; break;
    case K::Tree: table.header = {"n", "r", "radius", "diameter", "tau", "bound"}; break;
  }
  for (int first : grid.first) {
    for (int second : grid.second) {
      std::vector<std::string> row{std::to_string(first), std::to_string(second)};
      if (grid.kind == K::Tree) {
        const int tau = 2 * second - 1;
        const auto bound = closed_form_bound({FamilySpec::Kind::Tree, {first, second}}, tau);
        row.insert(row.end(), {std::to_string(second), std::to_string(2 * second), std::to_string(tau),
                               format_double(bound.value)});
      } else {
        const ThresholdFamily family = grid.kind == K::Cube   ? ThresholdFamily::cube(first, second)
                                       : grid.kind == K::Rect ? ThresholdFamily::rect(first, second)
                                                              : ThresholdFamily::star(first, second);
        row.insert(row.end(), {std::to_string(family.radius()), std::to_string(family.diameter()),
                               std::to_string(min_positive_tau(family))});
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

// Martingale diagnostics -----------------------------------------------------

MartingaleReport martingale_diagnostic(const ModelInstance& m, const InitialDistribution& init,
                                       std::uint64_t n_runs, std::uint64_t master_seed, unsigned threads) {
  const auto records = simulate_runs(m, init, n_runs, master_seed, threads);
  const bool imitation = m.kind() == ProcessKind::Imitation;

  MartingaleReport report;
  report.statistic = imitation ? "X" : "Z";
  report.two_sided = imitation;
  report.n_runs = n_runs;

  double sum_initial = 0.0;
  double sum_final = 0.0;
  double sum_diff = 0.0;
  for (const auto& r : records) {
    const double initial = static_cast<double>(imitation ? r.x_initial : r.z_initial);
    const double final_value = static_cast<double>(imitation ? r.x_final : r.z_final);
    sum_initial += initial;
    sum_final += final_value;
    sum_diff += final_value - initial;
    if (imitation && r.x_final != 0 && r.x_final != m.num_individuals()) report.range_ok = false;
  }
  const double n = static_cast<double>(n_runs);
  report.mean_initial = sum_initial / n;
  report.mean_final = sum_final / n;
  report.mean_difference = sum_diff / n;

  double squares = 0.0;
  for (const auto& r : records) {
    const double d = static_cast<double>(imitation ? r.x_final - r.x_initial : r.z_final - r.z_initial) -
                     report.mean_difference;
    squares += d * d;
  }
  const double variance = n_runs > 1 ? squares / (n - 1.0) : 0.0;
  report.std_error = std::sqrt(variance / n);

  constexpr double kSigmas = 3.0;
  report.passed = imitation ? std::abs(report.mean_difference) <= kSigmas * report.std_error
                            : report.mean_difference <= kSigmas * report.std_error;
  return report;
}

}  // namespace consensus
