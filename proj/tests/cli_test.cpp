#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "geovote/verification.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using geovote::testing::count_lines;
using geovote::testing::read_file;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = geovote::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const char* base = std::getenv("GEOVOTE_TEST_TMP");
    dir_ = fs::path(base ? base : ::testing::TempDir()) /
           ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  std::string write(const std::string& name, const std::string& body) const {
    const auto path = dir_ / name;
    std::ofstream(path) << body;
    return path.string();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* kRbf2 = R"({"seed": 11, "stream": {"kind": "rbf", "n_classes": 2}, "sizes": [2, 4], "limit": 300,
                        "checkpoint_interval": 100})";

}  // namespace

TEST_F(Cli, GenerateWritesHeaderAndRows) {
  const auto cfg = write("gen.json", kRbf2);
  const auto r = run({"generate", "--config", cfg, "--count", "100", "--out", path("a.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("fingerprint "), std::string::npos);
  const auto text = read_file(path("a.csv"));
  EXPECT_EQ(count_lines(text), 101u);
  EXPECT_EQ(text.substr(0, text.find('\n')), "x0,x1,x2,x3,x4,x5,x6,x7,x8,x9,label");
}

TEST_F(Cli, GenerateIsDeterministic) {
  const auto cfg = write("gen.json", kRbf2);
  const auto a = run({"generate", "--config", cfg, "--count", "500", "--out", path("a.csv")});
  const auto b = run({"generate", "--config", cfg, "--count", "500", "--out", path("b.csv")});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));
  EXPECT_EQ(a.out.substr(0, 28), b.out.substr(0, 28));

  run({"generate", "--config", cfg, "--seed", "12", "--count", "500", "--out", path("c.csv")});
  EXPECT_NE(read_file(path("a.csv")), read_file(path("c.csv")));
}

TEST_F(Cli, GenerateZeroCountWritesHeaderOnly) {
  const auto cfg = write("gen.json", kRbf2);
  const auto r = run({"generate", "--config", cfg, "--count", "0", "--out", path("empty.csv")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(count_lines(read_file(path("empty.csv"))), 1u);
}

TEST_F(Cli, SweepMinimalConfig) {
  const auto cfg = write("sweep.json", kRbf2);
  const auto r = run({"sweep", "--config", cfg, "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(read_file(path("out/summary.csv"))), 1u + 4u);
  EXPECT_TRUE(fs::exists(path("out/plot_rbf-C2.csv")));
  EXPECT_TRUE(fs::exists(path("out/series.csv")));
}

TEST_F(Cli, SweepFullSizeScheduleFlagsTheClassCount) {
  const auto cfg = write("sweep.json", R"({"seed": 3, "stream": {"kind": "rbf", "n_classes": 8},
      "sizes": [2, 4, 8, 16, 32, 64, 128], "limit": 40, "checkpoint_interval": 20})");
  const auto r = run({"sweep", "--config", cfg, "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(read_file(path("out/summary.csv"))), 1u + 14u);
  const auto plot = read_file(path("out/plot_rbf-C8.csv"));
  EXPECT_EQ(count_lines(plot), 1u + 7u);
  std::istringstream lines(plot);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const bool flagged = line.substr(line.rfind(',') + 1) == "1";
    EXPECT_EQ(flagged, line.rfind("8,", 0) == 0) << line;
  }
}

TEST_F(Cli, SweepOutputsAreByteIdenticalAcrossRunsAndJobCounts) {
  const auto cfg = write("sweep.json", R"({"seed": 5, "stream": {"kind": "rbf", "n_classes": 4},
      "sizes": [2, 4, 8], "limit": 300, "checkpoint_interval": 50})");
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", path("a")}).code, 0);
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", path("b")}).code, 0);
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", path("c"), "--jobs", "8"}).code, 0);
  for (const char* f : {"summary.csv", "series.csv", "plot_rbf-C4.csv"}) {
    const auto a = read_file(path(std::string("a/") + f));
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, read_file(path(std::string("b/") + f))) << f;
    EXPECT_EQ(a, read_file(path(std::string("c/") + f))) << f;
  }
}

TEST_F(Cli, MissingSeedIsAValidationError) {
  const auto cfg = write("bad.json", R"({"stream": {"kind": "rbf"}, "sizes": [2]})");
  const auto r = run({"sweep", "--config", cfg, "--out", path("out")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;
}

TEST_F(Cli, UnknownKeyIsNamed) {
  const auto cfg = write("bad.json", R"({"seed": 1, "stream": {"kind": "rbf", "clases": 3}, "sizes": [2]})");
  const auto r = run({"sweep", "--config", cfg});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("stream.clases"), std::string::npos) << r.err;
}

TEST_F(Cli, ValidationExitCodes) {
  EXPECT_EQ(run({"sweep"}).code, 1);
  EXPECT_EQ(run({"nonsense"}).code, 1);
  EXPECT_EQ(run({"sweep", "--config", path("missing.json")}).code, 1);
  EXPECT_EQ(run({"sweep", "--config", write("x.json", "{not json")}).code, 1);
  EXPECT_EQ(run({"sweep", "--config", write("y.json", R"({"seed": 1, "stream": {"kind": "rbf", "n_classes": 1}, "sizes": [2]})")}).code, 1);
  EXPECT_EQ(run({"sweep", "--config", write("z.json", R"({"seed": 1, "stream": {"kind": "rbf"}, "sizes": [1]})")}).code, 1);
}

TEST_F(Cli, MalformedCsvRowIsAValidationError) {
  write("data.csv", "1,2,a\n3,x,b\n");
  const auto cfg = write("csv.json", R"({"seed": 1, "sizes": [2], "limit": 0, "stream": {"kind": "csv",
      "csv": {"path": "data.csv", "feature_columns": [0, 1], "label_column": 2, "labels": {"a": 0, "b": 1}}}})");
  const auto r = run({"sweep", "--config", cfg, "--out", path("out")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(Cli, UnwritableOutputIsARuntimeError) {
  write("blocker", "x");
  const auto cfg = write("sweep.json", kRbf2);
  const auto r = run({"sweep", "--config", cfg, "--out", path("blocker/out")});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const auto cfg = write("sweep.json", kRbf2);
  ::setenv("GEOVOTE_OUT", path("from-env").c_str(), 1);
  const auto r = run({"sweep", "--config", cfg});
  ::unsetenv("GEOVOTE_OUT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("from-env/summary.csv")));
}

TEST_F(Cli, DiversityHybridOnSea) {
  const auto cfg = write("hyb.json", R"({"seed": 2, "stream": {"kind": "sea"}, "scenario": "hyb_htnb", "limit": 2000})");
  const auto r = run({"diversity", "--config", cfg, "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(read_file(path("out/summary.csv"))), 2u);
  EXPECT_EQ(count_lines(read_file(path("out/pair_q.csv"))), 2u);
  EXPECT_NE(r.out.find("Q = "), std::string::npos);
}

TEST_F(Cli, DiversitySel2DivWritesQMatrix) {
  const auto cfg = write("sel.json", R"({"seed": 2, "stream": {"kind": "sea"}, "scenario": "sel2div", "limit": 1000})");
  const auto r = run({"diversity", "--config", cfg, "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto text = read_file(path("out/q_matrix.csv"));
  std::vector<std::vector<std::string>> cells;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    cells.emplace_back();
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.back().push_back(cell);
  }
  ASSERT_EQ(cells.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    ASSERT_EQ(cells[i].size(), 10u);
    EXPECT_EQ(cells[i][i], "1.000000");
    for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(cells[i][j], cells[j][i]);
  }
}

TEST_F(Cli, DiversityLevBagInstantiatesEveryComponent) {
  const auto cfg = write("lev.json", R"({"seed": 2, "stream": {"kind": "sea"}, "scenario": "levbag_m", "m": 128,
      "limit": 30})");
  const auto r = run({"diversity", "--config", cfg, "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("components instantiated: 128"), std::string::npos) << r.out;
}

TEST_F(Cli, FriedmanOnTheReferenceTable) {
  const auto& table = geovote::reference_accuracy_table();
  std::ostringstream csv;
  csv << "dataset";
  for (const auto& m : table.methods) csv << ',' << m;
  csv << '\n';
  for (std::size_t d = 0; d < table.datasets.size(); ++d) {
    csv << table.datasets[d];
    for (double v : table.values[d]) csv << ',' << v;
    csv << '\n';
  }
  const auto input = write("table.csv", csv.str());
  const auto r = run({"friedman", "--input", input});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mean rank 2.583"), std::string::npos);
  EXPECT_NE(r.out.find("(reject)"), std::string::npos);
  EXPECT_NE(r.out.find("minimum mean-rank difference 2.635"), std::string::npos);

  const auto o = run({"friedman", "--input", input, "--threshold", "3"});
  EXPECT_NE(o.out.find("3.000 (override)"), std::string::npos);
  EXPECT_EQ(run({"friedman", "--input", write("bad.csv", "d,a\nx,1\n")}).code, 1);
}

TEST_F(Cli, VerifySuites) {
  const auto t = run({"verify", "theorems", "--cases", "500"});
  EXPECT_EQ(t.code, 0) << t.out;
  EXPECT_EQ(count_lines(t.out), 5u);
  EXPECT_EQ(t.out.find("FAIL"), std::string::npos);

  const auto s = run({"verify", "stats"});
  EXPECT_EQ(s.code, 0) << s.out;
  EXPECT_NE(s.out.find("PASS stats"), std::string::npos);
}

TEST_F(Cli, VerifyStatsRejectsACorruptedTable) {
  auto table = geovote::reference_accuracy_table();
  table.values[0][0] = 99.0;
  std::ostringstream csv;
  csv << "dataset";
  for (const auto& m : table.methods) csv << ',' << m;
  csv << '\n';
  for (std::size_t d = 0; d < table.datasets.size(); ++d) {
    csv << table.datasets[d];
    for (double v : table.values[d]) csv << ',' << v;
    csv << '\n';
  }
  const auto r = run({"verify", "stats", "--matrix", write("corrupt.csv", csv.str())});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("cell (Airlines, LevBag-2)"), std::string::npos) << r.out;
}
