#include "consensus_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace consensus::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kFilePrefix = "file:";

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void require_file(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw FileNotFound(path);
}

// For "file:<path>" graph sources and "fixed:/marginals:" init specs.
void check_source_file(const std::string& source, std::string_view prefix) {
  if (source.starts_with(prefix)) require_file(source.substr(prefix.size()));
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> values;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw UsageError(flag + ": bad integer '" + token + "'");
    }
  }
  if (values.empty()) throw UsageError(flag + ": empty list");
  return values;
}

std::string format_json(const Json& j) { return j.dump(2) + "\n"; }

void emit(const RunSpec& spec, const std::string& payload, std::ostream& out) {
  if (spec.output_path.empty()) {
    out << payload;
    return;
  }
  std::ofstream file(spec.output_path, std::ios::binary | std::ios::trunc);
  if (!file) throw CliError(kExitIo, "cannot write " + spec.output_path);
  file << payload;
  if (!file) throw CliError(kExitIo, "write failed for " + spec.output_path);
}

unsigned effective_threads(unsigned requested) {
  if (const char* env = std::getenv("CONSENSUS_THREADS")) {
    try {
      const int value = std::stoi(env);
      if (value >= 1) return static_cast<unsigned>(value);
    } catch (const std::exception&) {
    }
    throw UsageError("CONSENSUS_THREADS must be a positive integer");
  }
  return requested;
}

InitialDistribution load_init(const std::string& spec, const ModelInstance& m) {
  if (spec == "uniform") return InitialDistribution::uniform();
  if (spec.starts_with("fixed:")) {
    const std::string text = read_text(spec.substr(6));
    try {
      auto c = Configuration::parse(text);
      m.validate(c);
      return InitialDistribution::fixed(std::move(c));
    } catch (const Error& e) {
      throw CliError(kExitIo, spec.substr(6) + ": " + e.what());
    }
  }
  if (spec.starts_with("marginals:")) {
    std::istringstream in(read_text(spec.substr(10)));
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream cells(line);
      std::vector<double> row;
      double p = 0.0;
      while (cells >> p) row.push_back(p);
      if (!cells.eof()) throw CliError(kExitIo, spec.substr(10) + ": malformed probability row");
      if (!row.empty()) rows.push_back(std::move(row));
    }
    try {
      auto init = InitialDistribution::marginals(std::move(rows));
      init.validate(m);
      return init;
    } catch (const Error& e) {
      throw CliError(kExitIo, spec.substr(10) + ": " + e.what());
    }
  }
  throw UsageError("--init must be uniform, fixed:<path> or marginals:<path>");
}

ModelInstance build_instance(const RunSpec& spec) {
  Graph spatial = load_graph(spec.spatial_source);
  Graph opinion = load_graph(spec.opinion_source);
  return ModelInstance(std::move(spatial), OpinionSpace::build(std::move(opinion)), spec.tau, spec.kind);
}

Json instance_json(const RunSpec& spec, const ModelInstance& m) {
  return Json{{"spatial", spec.spatial_source},
              {"opinion", spec.opinion_source},
              {"num_individuals", m.num_individuals()},
              {"num_opinions", m.opinions().size()},
              {"radius", m.opinions().radius()},
              {"diameter", m.opinions().diameter()}};
}

BoundResult bound_for(const ModelInstance& m, const InitialDistribution& init) {
  return m.kind() == ProcessKind::Imitation ? bound_imitation(m, init) : bound_attraction(m, init);
}

void put_bound(Json& j, const BoundResult& b) {
  j["bound"] = b.applicable ? Json(b.value) : Json(nullptr);
  j["bound_applicable"] = b.applicable;
}

std::string csv_of(const Json& flat) {
  std::string header;
  std::string values;
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    if (!header.empty()) {
      header += ',';
      values += ',';
    }
    header += it.key();
    values += it->is_string() ? it->get<std::string>() : it->dump();
  }
  return header + "\n" + values + "\n";
}

// Flattens one level of nesting ("instance.spatial" -> "instance_spatial",
// ci95 -> ci95_lo / ci95_hi) for CSV output.
Json flatten(const Json& j) {
  Json flat;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it->is_object()) {
      for (auto inner = it->begin(); inner != it->end(); ++inner) flat[it.key() + "_" + inner.key()] = *inner;
    } else if (it.key() == "ci95") {
      flat["ci95_lo"] = (*it)[0];
      flat["ci95_hi"] = (*it)[1];
    } else {
      flat[it.key()] = *it;
    }
  }
  return flat;
}

std::string render(const RunSpec& spec, const Json& j) {
  return spec.format == OutputFormat::Json ? format_json(j) : csv_of(flatten(j));
}

int run_generate(const RunSpec& spec, std::ostream& out) {
  emit(spec, format_graph(load_graph(spec.family)), out);
  return kExitOk;
}

int run_check_ecc(const RunSpec& spec, std::ostream& out) {
  const auto space = OpinionSpace::build(load_graph(spec.opinion_source));
  emit(spec, to_json(check_eccentricity_inequalities(space, spec.max_distance)) + "\n", out);
  return kExitOk;
}

int run_simulate(const RunSpec& spec, std::ostream& out) {
  const ModelInstance m = build_instance(spec);
  const InitialDistribution init = load_init(spec.init, m);
  const Estimate e = estimate_consensus(m, init, spec.n_runs, spec.seed, effective_threads(spec.threads));

  if (!spec.trajectory_path.empty()) {
    std::ofstream log(spec.trajectory_path, std::ios::binary | std::ios::trunc);
    if (!log) throw CliError(kExitIo, "cannot write " + spec.trajectory_path);
    // Replays run 0 of the batch.
    CounterRng rng(spec.seed, 0);
    const Configuration start = init.sample(m, rng);
    run_to_fixation(m, start, rng, kDefaultMaxUpdates, &log);
  }

  Json j;
  j["instance"] = instance_json(spec, m);
  j["tau"] = spec.tau;
  j["kind"] = std::string(to_string(spec.kind));
  j["init"] = spec.init;
  j["p_hat"] = e.p_hat;
  j["stderr"] = e.std_error;
  j["ci95"] = Json::array({e.ci95.first, e.ci95.second});
  put_bound(j, bound_for(m, init));
  j["n_runs"] = spec.n_runs;
  j["master_seed"] = spec.seed;
  emit(spec, render(spec, j), out);
  return kExitOk;
}

int run_exact(const RunSpec& spec, std::ostream& out) {
  const ModelInstance m = build_instance(spec);
  const InitialDistribution init = load_init(spec.init, m);
  const double value = exact_consensus(m, init, spec.state_cap);

  Json j;
  j["instance"] = instance_json(spec, m);
  j["tau"] = spec.tau;
  j["kind"] = std::string(to_string(spec.kind));
  j["init"] = spec.init;
  j["value"] = value;
  put_bound(j, bound_for(m, init));
  emit(spec, render(spec, j), out);
  return kExitOk;
}

int run_bounds(const RunSpec& spec, std::ostream& out) {
  const ModelInstance m = build_instance(spec);
  const InitialDistribution init = load_init(spec.init, m);
  const BoundResult b = bound_for(m, init);

  Json j;
  j["instance"] = instance_json(spec, m);
  j["tau"] = spec.tau;
  j["kind"] = std::string(to_string(spec.kind));
  j["init"] = spec.init;
  j["value"] = b.value;
  put_bound(j, b);
  j["reason"] = b.reason;
  // Closed forms exist for the uniform law on lattice/tree/star opinion graphs.
  if (spec.kind == ProcessKind::Attraction && init.kind() == InitialDistribution::Kind::UniformProduct &&
      !spec.opinion_source.starts_with(kFilePrefix)) {
    const auto family = FamilySpec::parse(spec.opinion_source);
    try {
      j["closed_form"] = closed_form_bound(family, spec.tau).value;
    } catch (const Error&) {
      j["closed_form"] = nullptr;
    }
  }
  emit(spec, render(spec, j), out);
  return kExitOk;
}

int run_tables(const RunSpec& spec, std::ostream& out) {
  const Table table = reproduce_threshold_tables(spec.grid);
  if (spec.format == OutputFormat::Csv) {
    emit(spec, table.to_csv(), out);
    return kExitOk;
  }
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r;
    for (std::size_t i = 0; i < row.size(); ++i) r[table.header[i]] = Json::parse(row[i]);
    rows.push_back(std::move(r));
  }
  emit(spec, format_json(rows), out);
  return kExitOk;
}

}  // namespace

Graph read_graph_file(const std::string& path) { return parse_graph(read_text(path)); }

Graph load_graph(const std::string& source) {
  if (source.starts_with(kFilePrefix)) {
    const std::string path = source.substr(kFilePrefix.size());
    try {
      return read_graph_file(path);
    } catch (const Error& e) {
      throw CliError(kExitIo, path + ": " + e.what());
    }
  }
  try {
    return generate(FamilySpec::parse(source));
  } catch (const Error& e) {
    throw UsageError(source + ": " + e.what());
  }
}

RunSpec parse_args(const std::vector<std::string>& args) {
  RunSpec spec;
  CLI::App app{"Spatial opinion dynamics with a confidence threshold", "consensus"};
  app.require_subcommand(1);

  std::string kind = "imitation";
  std::string format;
  std::string grid_kind = "cube";
  std::string first;
  std::string second;
  int max_distance = -1;
  long long tau = -1;

  auto common_graphs = [&](CLI::App* sub, bool spatial_required) {
    auto* s = sub->add_option("--spatial", spec.spatial_source, "Spatial graph: family spec or file:<path>");
    if (spatial_required) s->required();
    sub->add_option("--opinion", spec.opinion_source, "Opinion graph: family spec or file:<path>")->required();
  };
  auto model_options = [&](CLI::App* sub) {
    sub->add_option("--tau", tau, "Confidence threshold (>= 0)")->required();
    sub->add_option("--kind", kind, "imitation | attraction")->check(CLI::IsMember({"imitation", "attraction"}));
    sub->add_option("--init", spec.init, "uniform | fixed:<path> | marginals:<path>");
  };
  auto output_options = [&](CLI::App* sub) {
    sub->add_option("--out", spec.output_path, "Output file (default: stdout)");
    sub->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* generate_cmd = app.add_subcommand("generate", "Write a generated graph in the text format");
  generate_cmd->add_option("--family", spec.family, "lattice:L1,.. | tree:n,r | star:n,r | path:k | cycle:k | complete:k")
      ->required();
  generate_cmd->add_option("--out", spec.output_path, "Output file (default: stdout)");

  auto* check_cmd = app.add_subcommand("check-ecc", "Check the eccentricity inequalities of an opinion graph");
  check_cmd->add_option("--opinion", spec.opinion_source, "Opinion graph")->required();
  check_cmd->add_option("--max-distance", max_distance, "Only report pairs at distance <= this");
  check_cmd->add_option("--out", spec.output_path, "Output file (default: stdout)");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of the consensus probability");
  common_graphs(simulate_cmd, true);
  model_options(simulate_cmd);
  output_options(simulate_cmd);
  simulate_cmd->add_option("--runs", spec.n_runs, "Number of runs (>= 1)");
  simulate_cmd->add_option("--seed", spec.seed, "Master seed");
  simulate_cmd->add_option("--threads", spec.threads, "Worker threads (default: available parallelism)");
  simulate_cmd->add_option("--trajectory", spec.trajectory_path, "CSV trajectory of run 0");

  auto* exact_cmd = app.add_subcommand("exact", "Exact consensus probability for small instances");
  common_graphs(exact_cmd, true);
  model_options(exact_cmd);
  output_options(exact_cmd);
  exact_cmd->add_option("--state-cap", spec.state_cap, "Maximum number of configurations");

  auto* bounds_cmd = app.add_subcommand("bounds", "Lower bounds for the consensus probability");
  common_graphs(bounds_cmd, false);
  model_options(bounds_cmd);
  output_options(bounds_cmd);

  auto* tables_cmd = app.add_subcommand("tables", "Positivity thresholds over a parameter grid");
  tables_cmd->add_option("--grid", grid_kind, "cube | rect | tree | star")
      ->check(CLI::IsMember({"cube", "rect", "tree", "star"}));
  tables_cmd->add_option("--first", first, "Comma list: cube n | rect L1 | tree/star n");
  tables_cmd->add_option("--second", second, "Comma list: cube L | rect L2 | tree/star r");
  output_options(tables_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw CliError(kExitOk, app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (generate_cmd->parsed()) spec.command = Command::Generate;
  else if (check_cmd->parsed()) spec.command = Command::CheckEcc;
  else if (simulate_cmd->parsed()) spec.command = Command::Simulate;
  else if (exact_cmd->parsed()) spec.command = Command::Exact;
  else if (bounds_cmd->parsed()) spec.command = Command::Bounds;
  else spec.command = Command::Tables;

  const bool has_model = spec.command == Command::Simulate || spec.command == Command::Exact ||
                         spec.command == Command::Bounds;
  if (has_model) {
    if (tau < 0) throw UsageError("--tau must be >= 0");
    if (tau > std::numeric_limits<int>::max()) throw UsageError("--tau too large");
    spec.tau = static_cast<int>(tau);
    spec.kind = parse_process_kind(kind);
    if (spec.spatial_source.empty()) spec.spatial_source = "complete:1";
    check_source_file(spec.init, "fixed:");
    check_source_file(spec.init, "marginals:");
    if (spec.init != "uniform" && !spec.init.starts_with("fixed:") && !spec.init.starts_with("marginals:")) {
      throw UsageError("--init must be uniform, fixed:<path> or marginals:<path>");
    }
  }
  if (spec.command == Command::Simulate && spec.n_runs < 1) throw UsageError("--runs must be >= 1");
  if (spec.command == Command::Exact && spec.state_cap < 1) throw UsageError("--state-cap must be >= 1");
  if (spec.command == Command::CheckEcc && max_distance >= 0) spec.max_distance = max_distance;
  check_source_file(spec.spatial_source, kFilePrefix);
  check_source_file(spec.opinion_source, kFilePrefix);

  if (spec.command == Command::Tables) {
    using K = ThresholdGrid::Kind;
    spec.grid.kind = grid_kind == "cube" ? K::Cube : grid_kind == "rect" ? K::Rect : grid_kind == "tree" ? K::Tree : K::Star;
    switch (spec.grid.kind) {
      case K::Cube: spec.grid.first = {1, 2, 3}; spec.grid.second = {1, 2, 3}; break;
      case K::Rect: spec.grid.first = {1, 2, 3}; spec.grid.second = {1, 2, 3}; break;
      case K::Tree: spec.grid.first = {2, 3}; spec.grid.second = {1, 2, 3}; break;
      case K::Star: spec.grid.first = {2, 4}; spec.grid.second = {2, 3}; break;
    }
    if (!first.empty()) spec.grid.first = parse_int_list(first, "--first");
    if (!second.empty()) spec.grid.second = parse_int_list(second, "--second");
    spec.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  } else {
    spec.format = format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  }
  return spec;
}

int dispatch(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    switch (spec.command) {
      case Command::Generate: return run_generate(spec, out);
      case Command::CheckEcc: return run_check_ecc(spec, out);
      case Command::Simulate: return run_simulate(spec, out);
      case Command::Exact: return run_exact(spec, out);
      case Command::Bounds: return run_bounds(spec, out);
      case Command::Tables: return run_tables(spec, out);
    }
  } catch (const CliError& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitAnalysisError;
  }
  return kExitAnalysisError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunSpec spec;
  try {
    spec = parse_args(args);
  } catch (const CliError& e) {
    if (e.exit_code() == kExitOk) {
      out << e.what();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return dispatch(spec, out, err);
}

}  // namespace consensus::cli
