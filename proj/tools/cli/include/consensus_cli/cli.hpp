#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "consensus/analysis.hpp"
#include "consensus/graph.hpp"

namespace consensus::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysisError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// Error that maps directly to a process exit code.
class CliError : public std::runtime_error {
 public:
  CliError(int exit_code, const std::string& what) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

struct UsageError : CliError {
  explicit UsageError(const std::string& what) : CliError(kExitUsage, what) {}
};

struct FileNotFound : CliError {
  explicit FileNotFound(const std::string& path) : CliError(kExitIo, "file not found: " + path) {}
};

enum class Command { Generate, CheckEcc, Simulate, Exact, Bounds, Tables };
enum class OutputFormat { Json, Csv };

struct RunSpec {
  Command command = Command::Simulate;
  std::string family;           // generate
  std::string spatial_source;   // family spec or "file:<path>"
  std::string opinion_source;
  int tau = -1;
  ProcessKind kind = ProcessKind::Imitation;
  std::string init = "uniform";  // "uniform" | "fixed:<path>" | "marginals:<path>"
  std::uint64_t n_runs = 1000;
  std::uint64_t seed = 0;
  std::uint64_t state_cap = kDefaultStateCap;
  std::optional<int> max_distance;  // check-ecc filter
  ThresholdGrid grid;
  std::string output_path;  // empty = stdout
  std::string trajectory_path;
  OutputFormat format = OutputFormat::Json;
  unsigned threads = 0;  // 0 = available parallelism
};

/// Parses argv (without the program name). Throws UsageError or
/// FileNotFound. `--help` is reported as UsageError with exit code 0.
RunSpec parse_args(const std::vector<std::string>& args);

/// Reads a graph in the text format. Throws FileNotFound or consensus::Error
/// {ParseError | SelfLoop | DuplicateEdge | VertexOutOfRange}.
Graph read_graph_file(const std::string& path);

/// Resolves a "family:params" or "file:<path>" source.
Graph load_graph(const std::string& source);

/// Runs the command and writes its output. Returns the process exit code;
/// diagnostics go to `err`.
int dispatch(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// parse_args + dispatch with exit-code mapping.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace consensus::cli
