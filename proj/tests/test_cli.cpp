#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "test_util.hpp"

using namespace laplax;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kFixtures = LAPLAX_FIXTURES;

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("laplax_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                       "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write_graph(const std::string& name, const WeightedMultigraph& g) {
    const std::string path = (dir / name).string();
    std::ofstream out(path);
    write_edge_list(out, g);
    return path;
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, SolveFixture) {
  const auto r = run({"--deterministic", "solve", "--matrix", kFixtures + "/grid50.mtx", "--rhs", kFixtures + "/b.txt",
                      "--eps", "1e-8", "--output", (dir / "x.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GE(j["outer_iters"].get<int>(), 1);
  EXPECT_EQ(j["wall_ms"].get<double>(), 0.0);
  EXPECT_FALSE(j["lifted"].get<bool>());
  EXPECT_EQ(read_vector((dir / "x.txt").string()).size(), 2500u);
}

TEST_F(Cli, VerifySolveOnLiftedFixture) {
  const auto r = run({"verify", "solve", "--matrix", kFixtures + "/sdd600.mtx", "--rhs", kFixtures + "/sdd600_b.txt",
                      "--eps", "1e-6"});
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  EXPECT_TRUE(nlohmann::json::parse(r.out)["holds"].get<bool>());
}

TEST_F(Cli, MissingFileNamesThePath) {
  const std::string missing = (dir / "nope.txt").string();
  const auto r = run({"partition", "--input", missing, "--rho", "4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
}

TEST_F(Cli, ZeroRhoIsRejected) {
  const auto path = write_graph("g.txt", gen::grid(4, 4));
  const auto r = run({"partition", "--input", path, "--rho", "0"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--rho"), std::string::npos);
}

TEST_F(Cli, UnknownFlagPrintsUsage) {
  const auto r = run({"partition", "--bogus"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--rho"), std::string::npos);
}

TEST_F(Cli, PartitionWritesAssignmentAndAudit) {
  const auto path = write_graph("g.txt", gen::grid(10, 10));
  const auto r = run({"partition", "--input", path, "--rho", "6", "--seed", "3", "--output",
                      (dir / "a.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GE(j["components"].get<int>(), 1);
  std::ifstream in(dir / "a.txt");
  std::size_t lines = 0;
  for (std::string s; std::getline(in, s);) ++lines;
  EXPECT_EQ(lines, 100u);
}

TEST_F(Cli, ClassFileMustCoverEveryEdge) {
  const auto path = write_graph("g.txt", gen::cycle(5));
  {
    std::ofstream c(dir / "classes.txt");
    c << "1\n1\n2\n";
  }
  const auto r = run({"partition", "--input", path, "--rho", "3", "--classes", (dir / "classes.txt").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("3 class entries for 5 edges"), std::string::npos) << r.err;
}

TEST_F(Cli, LowStretchTreeReport) {
  const auto g = gen::with_uniform_weights(gen::random_connected(60, 40, 2), 1.0, 8.0, 2);
  const auto path = write_graph("g.txt", g);
  const auto r = run({"lowstretch", "--input", path, "--mode", "tree", "--output", (dir / "t.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["tree_edges"].get<int>(), 59);
  const auto v = run({"verify", "stretch", "--input", path, "--other", (dir / "t.txt").string()});
  EXPECT_EQ(v.code, 0) << v.err;
  const auto jv = nlohmann::json::parse(v.out);
  EXPECT_NEAR(jv["total_stretch"].get<double>(), j["total_stretch"].get<double>(), 1e-9 * jv["oracle"].get<double>());
}

TEST_F(Cli, VerifySandwichBuildsH) {
  const auto g = gen::with_uniform_weights(gen::random_connected(80, 120, 5), 1.0, 10.0, 5);
  const auto path = write_graph("g.txt", g);
  const auto r = run({"verify", "sandwich", "--input", path, "--kappa", "10"});
  EXPECT_TRUE(r.code == 0 || r.code == 2) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["holds"].get<bool>(), r.code == 0);
  EXPECT_GT(j["lambda_min"].get<double>(), 0.0);
}

TEST_F(Cli, ConfigRoundTrip) {
  const auto path = write_graph("g.txt", gen::grid(8, 8));
  const std::string cfg = (dir / "opts.toml").string();
  const auto first = run({"--write-config", cfg, "partition", "--input", path, "--rho", "5", "--seed", "9", "--c1",
                          "100", "--output", (dir / "a1.txt").string()});
  ASSERT_EQ(first.code, 0) << first.err;
  ASSERT_TRUE(fs::exists(cfg));
  const auto second = run({"--config", cfg, "partition", "--output", (dir / "a2.txt").string()});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(slurp(dir / "a1.txt"), slurp(dir / "a2.txt"));

  // flags on the command line win over the file
  const auto third = run({"--config", cfg, "partition", "--seed", "10", "--output", (dir / "a3.txt").string(),
                          "--write-config", (dir / "opts2.toml").string()});
  ASSERT_EQ(third.code, 0) << third.err;
  EXPECT_NE(slurp(dir / "opts2.toml").find("seed=10"), std::string::npos) << slurp(dir / "opts2.toml");
}

TEST_F(Cli, ReportsIdenticalAcrossThreadCounts) {
  std::string ref;
  for (const char* t : {"1", "2", "8"}) {
    const auto r = run({"--threads", t, "--deterministic", "solve", "--matrix", kFixtures + "/sdd600.mtx", "--rhs",
                        kFixtures + "/sdd600_b.txt", "--eps", "1e-6", "--output", (dir / "x.txt").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string both = r.out + slurp(dir / "x.txt");
    if (ref.empty())
      ref = both;
    else
      EXPECT_EQ(both, ref) << t << " threads";
  }
}

TEST_F(Cli, BenchRows) {
  const auto r = run({"bench", "--family", "grid", "--n", "100", "--rho", "8", "--seeds", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("family,n,m,rho,R,", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(in, row)) {
    ++rows;
    EXPECT_NE(row.find(",pass,"), std::string::npos) << row;
  }
  EXPECT_EQ(rows, 2u);

  const auto tiny = run({"bench", "--family", "grid", "--n", "1", "--rho", "1", "--R", "1"});
  ASSERT_EQ(tiny.code, 0) << tiny.err;
  EXPECT_NE(tiny.out.find("\ngrid,1,0,1,1,"), std::string::npos) << tiny.out;
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string exe = LAPLAX_CLI;
  EXPECT_EQ(std::system((exe + " --help > /dev/null").c_str()), 0);
  EXPECT_NE(std::system((exe + " solve > /dev/null 2>&1").c_str()), 0);
}
