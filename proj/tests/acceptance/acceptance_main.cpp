// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "brute_force_chain.hpp"
#include "consensus/analysis.hpp"
#include "consensus_cli/cli.hpp"

using namespace consensus;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

ModelInstance make(const std::string& spatial, const std::string& opinion, int tau, ProcessKind kind) {
  return ModelInstance(generate(FamilySpec::parse(spatial)), OpinionSpace::build(generate(FamilySpec::parse(opinion))),
                       tau, kind);
}

oracle::TinyGraph tiny(const Graph& g) {
  oracle::TinyGraph t{g.num_vertices(), {}};
  for (const Edge& e : g.edges()) t.edges.emplace_back(e.u, e.v);
  return t;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

constexpr ProcessKind kKinds[] = {ProcessKind::Imitation, ProcessKind::Attraction};
// Star spatial graphs are given by their total vertex count: star(4) = star:3,1.
const std::vector<std::string> kBoundSpatials{"path:5", "cycle:6", "star:4,1"};

Outcome criterion1() {
  Outcome o;
  const std::pair<const char*, const char*> cases[] = {{"star:3,1", "path:5"}, {"path:4", "tree:2,2"}};
  for (const auto& [s, op] : cases) {
    for (ProcessKind kind : kKinds) {
      const int diameter = OpinionSpace::build(generate(FamilySpec::parse(op))).diameter();
      const auto m = make(s, op, diameter, kind);
      try {
        const auto records = simulate_runs(m, InitialDistribution::uniform(), 1000, 1);
        std::size_t failures = 0;
        for (const auto& r : records) failures += r.consensus ? 0 : 1;
        o.require(failures == 0, std::string(s) + " x " + op + " " + std::string(to_string(kind)) + ": " +
                                     std::to_string(failures) + " non-consensus runs");
      } catch (const std::exception& e) {
        o.require(false, e.what());
      }
    }
  }
  if (o.ok) o.detail = "4 instances x 1000 runs, all consensus";
  return o;
}

Outcome criterion2() {
  Outcome o;
  const double target = 7.0 / 9.0;
  for (ProcessKind kind : kKinds) {
    const auto m = make("complete:2", "path:3", 1, kind);
    const double exact = exact_consensus(m, InitialDistribution::uniform());
    o.require(std::abs(exact - target) <= 1e-12, std::string(to_string(kind)) + " exact " + fmt(exact));
    const auto e = estimate_consensus(m, InitialDistribution::uniform(), 100000, 2);
    o.require(std::abs(e.p_hat - target) <= 4 * e.std_error,
              std::string(to_string(kind)) + " p_hat " + fmt(e.p_hat) + " stderr " + fmt(e.std_error));
    if (o.ok) o.detail += std::string(to_string(kind)) + " p_hat=" + fmt(e.p_hat) + " ";
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  int checked = 0;
  double worst = 0;
  for (const char* s : {"path:2", "path:3", "complete:3"}) {
    for (const char* op : {"path:3", "path:4"}) {
      for (int tau : {1, 2}) {
        for (ProcessKind kind : kKinds) {
          const auto m = make(s, op, tau, kind);
          const double exact = exact_consensus(m, InitialDistribution::uniform());
          const double brute = static_cast<double>(oracle::uniform_consensus_probability(
              tiny(m.spatial()), tiny(m.opinions().graph()), tau, kind == ProcessKind::Attraction));
          worst = std::max(worst, std::abs(exact - brute));
          o.require(std::abs(exact - brute) <= 1e-10, std::string(s) + " x " + op + " tau=" + std::to_string(tau));
          ++checked;
        }
      }
    }
  }
  if (o.ok) o.detail = std::to_string(checked) + " instances, max |diff| " + fmt(worst);
  return o;
}

Outcome bound_validity(ProcessKind kind, double expected_bound, std::uint64_t seed) {
  Outcome o;
  for (const auto& s : kBoundSpatials) {
    const auto m = make(s, "lattice:2", 3, kind);
    const auto b = kind == ProcessKind::Imitation ? bound_imitation(m, InitialDistribution::uniform())
                                                  : bound_attraction(m, InitialDistribution::uniform());
    o.require(b.applicable && std::abs(b.value - expected_bound) <= 1e-12, s + " bound " + fmt(b.value));
    const auto e = estimate_consensus(m, InitialDistribution::uniform(), 20000, seed);
    o.require(e.p_hat >= expected_bound - 3 * e.std_error, s + " p_hat " + fmt(e.p_hat));
    o.detail += o.ok ? s + " p_hat=" + fmt(e.p_hat) + " " : "";
  }
  return o;
}

Outcome criterion4() {
  Outcome o = bound_validity(ProcessKind::Imitation, 0.6, 4);
  // path:5 is the same graph as lattice:2.
  const auto p5 = make("path:5", "path:5", 3, ProcessKind::Imitation);
  o.require(std::abs(bound_imitation(p5, InitialDistribution::uniform()).value - 0.6) <= 1e-12, "path:5 opinion bound");
  return o;
}

Outcome criterion5() {
  Outcome o = bound_validity(ProcessKind::Attraction, 0.4, 5);
  const double closed = closed_form_bound(FamilySpec::parse("lattice:2"), 3).value;
  o.require(std::abs(closed - 0.4) <= 1e-12, "closed form " + fmt(closed));
  return o;
}

Outcome criterion6() {
  Outcome o;
  const std::pair<const char*, double> cases[] = {{"tree:2,2", 2.0 / 7.0}, {"star:3,2", 5.0 / 14.0}};
  for (const auto& [family, expected] : cases) {
    const auto spec = FamilySpec::parse(family);
    const double closed = closed_form_bound(spec, 3).value;
    o.require(std::abs(closed - expected) <= 1e-12, std::string(family) + " closed " + fmt(closed));
    const ModelInstance m(path_graph(2), OpinionSpace::build(generate(spec)), 3, ProcessKind::Attraction);
    const auto direct = bound_attraction(m, InitialDistribution::uniform());
    o.require(direct.applicable && std::abs(direct.value - closed) <= 1e-12,
              std::string(family) + " direct " + fmt(direct.value));
    o.detail += o.ok ? std::string(family) + "=" + fmt(closed) + " " : "";
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::vector<std::string> families{"lattice:1", "lattice:2", "lattice:1,1", "lattice:2,1", "lattice:1,1,1"};
  for (int n : {2, 3})
    for (int r : {1, 2, 3}) families.push_back("tree:" + std::to_string(n) + "," + std::to_string(r));
  for (int n = 1; n <= 4; ++n)
    for (int r = 1; r <= 3; ++r) families.push_back("star:" + std::to_string(n) + "," + std::to_string(r));
  for (const auto& f : families) {
    const auto report = check_eccentricity_inequalities(OpinionSpace::build(generate(FamilySpec::parse(f))));
    o.require(report.holds, f + " violates");
  }
  const auto witness = find_ecc_violation(12, 1, 100000);
  o.require(witness.has_value(), "no witness found");
  if (witness) {
    const auto report = check_eccentricity_inequalities(OpinionSpace::build(*witness));
    o.require(!report.holds, "witness passes the checker");
    if (o.ok)
      o.detail = std::to_string(families.size()) + " families hold; witness on " +
                 std::to_string(witness->num_vertices()) + " vertices with " +
                 std::to_string(report.violations.size()) + " violating pairs";
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::vector<ThresholdFamily> families;
  for (int n : {1, 2, 3})
    for (int L : {1, 2, 3}) families.push_back(ThresholdFamily::cube(n, L));
  for (int n : {2, 4})
    for (int r : {2, 3}) families.push_back(ThresholdFamily::star(n, r));
  for (const auto& f : families) {
    int swept = -1;
    for (int tau = f.radius(); tau < 2 * f.radius(); ++tau) {
      if (closed_form_bound(f.opinion_family(), tau).value > 0) {
        swept = tau;
        break;
      }
    }
    const int threshold = min_positive_tau(f);
    const std::string name = f.opinion_family().to_string();
    o.require(threshold == swept, name + " threshold " + std::to_string(threshold) + " sweep " + std::to_string(swept));
    o.require(threshold < f.diameter(), name + " threshold not below diameter");
  }
  if (o.ok) o.detail = std::to_string(families.size()) + " cells agree with the sweep";
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto im = make("star:4,1", "path:5", 3, ProcessKind::Imitation);
  const auto x = martingale_diagnostic(im, InitialDistribution::uniform(), 20000, 9);
  o.require(x.passed, "X mean diff " + fmt(x.mean_difference) + " stderr " + fmt(x.std_error));
  o.require(x.range_ok, "X_final outside {0, 5}");
  const auto at = make("star:4,1", "path:5", 3, ProcessKind::Attraction);
  const auto z = martingale_diagnostic(at, InitialDistribution::uniform(), 20000, 10);
  o.require(z.passed, "Z mean diff " + fmt(z.mean_difference) + " stderr " + fmt(z.std_error));
  if (o.ok)
    o.detail = "X diff " + fmt(x.mean_difference) + " (se " + fmt(x.std_error) + "), Z diff " +
               fmt(z.mean_difference) + " (se " + fmt(z.std_error) + ")";
  return o;
}

Outcome criterion10() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "consensus_acceptance_determinism";
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  for (const auto& s : kBoundSpatials) {
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path file = dir / ("run" + std::to_string(rep) + ".json");
      cli::RunSpec spec;
      spec.command = cli::Command::Simulate;
      spec.spatial_source = s;
      spec.opinion_source = "lattice:2";
      spec.tau = 3;
      spec.kind = ProcessKind::Attraction;
      spec.n_runs = 20000;
      spec.seed = 5;
      spec.threads = rep == 0 ? 1 : 4;
      spec.output_path = file.string();
      std::ostringstream out, err;
      const int code = cli::dispatch(spec, out, err);
      o.require(code == cli::kExitOk, s + ": exit " + std::to_string(code) + " " + err.str());
      std::ifstream in(file, std::ios::binary);
      std::ostringstream text;
      text << in.rdbuf();
      outputs.push_back(text.str());
    }
    const auto n = outputs.size();
    o.require(!outputs[n - 1].empty() && outputs[n - 1] == outputs[n - 2], s + ": outputs differ");
  }
  fs::remove_all(dir);
  if (o.ok) o.detail = "3 instances, byte-identical JSON across repeats";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "consensus at tau = diameter", 10, criterion1},
      {2, "exact oracle agreement on K2 x P3", 30, criterion2},
      {3, "brute-force equivalence", 60, criterion3},
      {4, "imitation bound validity", 60, criterion4},
      {5, "attraction bound validity", 60, criterion5},
      {6, "tree and star closed forms", 0, criterion6},
      {7, "eccentricity inequality suite", 120, criterion7},
      {8, "threshold formulas", 0, criterion8},
      {9, "martingale diagnostics", 120, criterion9},
      {10, "determinism", 0, criterion10},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0) o.require(seconds < c.limit_seconds, "over time budget");
    failed += o.ok ? 0 : 1;
    std::printf("criterion %2d %s: %s (%.2fs) %s\n", c.id, o.ok ? "PASS" : "FAIL", c.name, seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
