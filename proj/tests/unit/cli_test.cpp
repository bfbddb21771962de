#include "consensus_cli/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace consensus;
using namespace consensus::cli;

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("consensus_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

int exit_code_of(const std::vector<std::string>& args) {
  try {
    parse_args(args);
  } catch (const CliError& e) {
    return e.exit_code();
  }
  return -1;
}

}  // namespace

TEST_F(CliTest, ParsesSimulateHappyPath) {
  const auto spec = parse_args({"simulate", "--spatial", "path:4", "--opinion", "lattice:2", "--tau", "3", "--kind",
                                "attraction", "--runs", "10000", "--seed", "7"});
  EXPECT_EQ(spec.command, Command::Simulate);
  EXPECT_EQ(spec.spatial_source, "path:4");
  EXPECT_EQ(spec.opinion_source, "lattice:2");
  EXPECT_EQ(spec.tau, 3);
  EXPECT_EQ(spec.kind, ProcessKind::Attraction);
  EXPECT_EQ(spec.n_runs, 10000u);
  EXPECT_EQ(spec.seed, 7u);
  EXPECT_EQ(spec.init, "uniform");
  EXPECT_EQ(spec.format, OutputFormat::Json);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(exit_code_of({"simulate", "--spatial", "path:4", "--opinion", "lattice:2", "--tau", "-1"}), kExitUsage);
  EXPECT_EQ(exit_code_of({"simulate", "--spatial", "path:4", "--opinion", "lattice:2"}), kExitUsage);
  EXPECT_EQ(exit_code_of({"simulate", "--spatial", "path:4", "--opinion", "lattice:2", "--tau", "1", "--runs", "0"}),
            kExitUsage);
  EXPECT_EQ(exit_code_of({"simulate", "--spatial", "path:4", "--opinion", "lattice:2", "--tau", "1", "--kind", "x"}),
            kExitUsage);
  EXPECT_EQ(exit_code_of({"exact", "--spatial", "path:4", "--opinion", "lattice:2", "--tau", "1", "--init", "bogus"}),
            kExitUsage);
  EXPECT_EQ(exit_code_of({"frobnicate"}), kExitUsage);
  EXPECT_EQ(exit_code_of({}), kExitUsage);
  EXPECT_EQ(exit_code_of({"tables", "--grid", "cube", "--first", "1,x"}), kExitUsage);
  EXPECT_EQ(exit_code_of({"--help"}), kExitOk);
}

TEST_F(CliTest, MissingFileIsIoError) {
  EXPECT_EQ(exit_code_of({"check-ecc", "--opinion", "file:" + path("g.txt")}), kExitIo);
  EXPECT_EQ(exit_code_of({"exact", "--spatial", "path:2", "--opinion", "path:3", "--tau", "1", "--init",
                          "fixed:" + path("c.txt")}),
            kExitIo);
  std::ostringstream out, err;
  EXPECT_EQ(run({"check-ecc", "--opinion", "file:" + path("g.txt")}, out, err), kExitIo);
  EXPECT_NE(err.str().find("g.txt"), std::string::npos);
}

TEST_F(CliTest, ReadGraphFileExamples) {
  EXPECT_EQ(read_graph_file(write("k2.txt", "2 1\n0 1\n")), complete_graph(2));
  EXPECT_EQ(read_graph_file(write("p3.txt", "3 2\n0 1\n1 2\n")), path_graph(3));
  try {
    read_graph_file(write("loop.txt", "2 1\n0 0\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SelfLoop);
  }
  try {
    read_graph_file(write("dup.txt", "2 2\n0 1\n0 1\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DuplicateEdge);
  }
  try {
    read_graph_file(write("bad.txt", "3 2\n0 1\n1 x\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_graph_file(path("missing.txt")), FileNotFound);
}

TEST_F(CliTest, MalformedGraphFileExitsThree) {
  const std::string g = write("loop.txt", "2 1\n0 0\n");
  std::ostringstream out, err;
  EXPECT_EQ(run({"check-ecc", "--opinion", "file:" + g}, out, err), kExitIo);
  EXPECT_TRUE(out.str().empty());
}

TEST_F(CliTest, ExactSevenNinths) {
  std::ostringstream out, err;
  ASSERT_EQ(run({"exact", "--spatial", "complete:2", "--opinion", "path:3", "--tau", "1"}, out, err), kExitOk)
      << err.str();
  EXPECT_NE(out.str().find("\"value\": 0.7777777777"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("\"kind\": \"imitation\""), std::string::npos);
}

TEST_F(CliTest, SimulateAtDiameterReportsOne) {
  std::ostringstream out, err;
  ASSERT_EQ(run({"simulate", "--spatial", "star:4,1", "--opinion", "path:5", "--tau", "4", "--runs", "200", "--seed",
                 "3", "--threads", "2"},
                out, err),
            kExitOk)
      << err.str();
  const std::string s = out.str();
  EXPECT_NE(s.find("\"p_hat\": 1.0"), std::string::npos) << s;
  EXPECT_NE(s.find("\"bound\": null"), std::string::npos);
  EXPECT_NE(s.find("\"bound_applicable\": false"), std::string::npos);
  EXPECT_NE(s.find("\"n_runs\": 200"), std::string::npos);
  EXPECT_NE(s.find("\"master_seed\": 3"), std::string::npos);
  // Key order follows the documented schema.
  const char* keys[] = {"\"instance\"", "\"tau\"", "\"kind\"", "\"p_hat\"", "\"stderr\"", "\"ci95\"",
                        "\"bound\"", "\"bound_applicable\"", "\"n_runs\"", "\"master_seed\""};
  std::size_t last = 0;
  for (const char* k : keys) {
    const auto at = s.find(k);
    ASSERT_NE(at, std::string::npos) << k;
    EXPECT_GT(at, last) << k;
    last = at;
  }
}

TEST_F(CliTest, AnalysisErrorExitsOne) {
  std::ostringstream out, err;
  EXPECT_EQ(run({"exact", "--spatial", "path:6", "--opinion", "path:5", "--tau", "2", "--state-cap", "100"}, out, err),
            kExitAnalysisError);
  EXPECT_FALSE(err.str().empty());
  std::ostringstream out2, err2;
  EXPECT_EQ(run({"simulate", "--spatial", "path:3", "--opinion", "path:3", "--tau", "1"}, out2, err2), kExitOk);
  std::ostringstream out3, err3;
  const std::string g = write("split.txt", "4 2\n0 1\n2 3\n");
  EXPECT_EQ(run({"exact", "--spatial", "file:" + g, "--opinion", "path:3", "--tau", "1"}, out3, err3),
            kExitAnalysisError);
}

TEST_F(CliTest, DeterministicOutputFiles) {
  auto args = [&](const std::string& out_file, const std::string& threads) {
    return std::vector<std::string>{"simulate", "--spatial", "cycle:6", "--opinion", "lattice:2", "--tau", "3",
                                    "--kind", "attraction", "--runs", "2000", "--seed", "99", "--threads", threads,
                                    "--out", out_file};
  };
  std::ostringstream out, err;
  ASSERT_EQ(run(args(path("a.json"), "1"), out, err), kExitOk) << err.str();
  ASSERT_EQ(run(args(path("b.json"), "3"), out, err), kExitOk) << err.str();
  EXPECT_TRUE(out.str().empty());
  const std::string a = slurp(path("a.json"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.json")));
}

TEST_F(CliTest, GenerateRoundTrip) {
  for (const std::string family : {"lattice:2,1", "tree:3,2", "star:3,2", "cycle:5", "complete:4", "path:1"}) {
    const std::string file = path("g.txt");
    std::ostringstream out, err;
    ASSERT_EQ(run({"generate", "--family", family, "--out", file}, out, err), kExitOk) << err.str();
    EXPECT_EQ(read_graph_file(file), generate(FamilySpec::parse(family))) << family;
    EXPECT_EQ(load_graph("file:" + file), generate(FamilySpec::parse(family)));
  }
  std::ostringstream out, err;
  EXPECT_EQ(run({"generate", "--family", "tree:1,2"}, out, err), kExitUsage);
}

TEST_F(CliTest, InitFilesAndFormats) {
  const std::string fixed = write("c.txt", "0 2\n");
  const std::string rows = write("m.txt", "1 0 0\n0 0 1\n");
  std::ostringstream a, b, err;
  ASSERT_EQ(run({"exact", "--spatial", "path:2", "--opinion", "path:3", "--tau", "2", "--init", "fixed:" + fixed}, a,
                err),
            kExitOk)
      << err.str();
  ASSERT_EQ(run({"exact", "--spatial", "path:2", "--opinion", "path:3", "--tau", "2", "--init", "marginals:" + rows},
                b, err),
            kExitOk)
      << err.str();
  EXPECT_NE(a.str().find("\"value\": 1.0"), std::string::npos) << a.str();
  EXPECT_EQ(a.str().substr(a.str().find("\"value\"")), b.str().substr(b.str().find("\"value\"")));

  const std::string bad = write("bad.txt", "0 7\n");
  std::ostringstream c, err2;
  EXPECT_EQ(run({"exact", "--spatial", "path:2", "--opinion", "path:3", "--tau", "2", "--init", "fixed:" + bad}, c,
                err2),
            kExitIo);

  std::ostringstream csv, err3;
  ASSERT_EQ(run({"bounds", "--opinion", "lattice:2", "--tau", "3", "--kind", "attraction", "--format", "csv"}, csv,
                err3),
            kExitOk)
      << err3.str();
  std::istringstream lines(csv.str());
  std::string header, values;
  std::getline(lines, header);
  std::getline(lines, values);
  EXPECT_EQ(header.substr(0, 17), "instance_spatial,");
  EXPECT_NE(header.find("closed_form"), std::string::npos);
  EXPECT_NE(values.find("0.4"), std::string::npos);
}

TEST_F(CliTest, BoundsJson) {
  std::ostringstream out, err;
  ASSERT_EQ(run({"bounds", "--spatial", "path:5", "--opinion", "path:5", "--tau", "3"}, out, err), kExitOk)
      << err.str();
  EXPECT_NE(out.str().find("\"bound\": 0.6"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("\"bound_applicable\": true"), std::string::npos);
}

TEST_F(CliTest, TablesMatchThresholds) {
  std::ostringstream out, err;
  ASSERT_EQ(run({"tables", "--grid", "cube", "--first", "1,2,3", "--second", "1,2,3"}, out, err), kExitOk)
      << err.str();
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "n,L,radius,diameter,min_positive_tau");
  int rows = 0;
  while (std::getline(lines, line)) {
    int n = 0, L = 0, radius = 0, diameter = 0, tau = 0;
    char c = 0;
    std::istringstream cells(line);
    cells >> n >> c >> L >> c >> radius >> c >> diameter >> c >> tau;
    EXPECT_EQ(tau, min_positive_tau(ThresholdFamily::cube(n, L))) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 9);

  std::ostringstream json, err2;
  ASSERT_EQ(run({"tables", "--grid", "tree", "--format", "json"}, json, err2), kExitOk) << err2.str();
  EXPECT_NE(json.str().find("\"bound\":"), std::string::npos);
}

TEST_F(CliTest, ThreadsEnvironmentOverride) {
  ::setenv("CONSENSUS_THREADS", "0", 1);
  std::ostringstream out, err;
  EXPECT_EQ(run({"simulate", "--spatial", "path:2", "--opinion", "path:3", "--tau", "1", "--runs", "10"}, out, err),
            kExitUsage);
  ::setenv("CONSENSUS_THREADS", "2", 1);
  std::ostringstream out2, err2;
  EXPECT_EQ(run({"simulate", "--spatial", "path:2", "--opinion", "path:3", "--tau", "1", "--runs", "10"}, out2, err2),
            kExitOk);
  ::unsetenv("CONSENSUS_THREADS");
}

TEST_F(CliTest, TrajectoryFile) {
  const std::string traj = path("t.csv");
  std::ostringstream out, err;
  ASSERT_EQ(run({"simulate", "--spatial", "path:3", "--opinion", "path:4", "--tau", "2", "--runs", "5",
                 "--trajectory", traj},
                out, err),
            kExitOk)
      << err.str();
  const std::string text = slurp(traj);
  EXPECT_EQ(text.substr(0, 26), "event_index,time,phi,X,Z\n0");
}
