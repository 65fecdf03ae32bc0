#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "spdc/dataset_io.hpp"
#include "spdc/synth.hpp"
#include "test_util.hpp"

using namespace spdc;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::filesystem::path& dir) {
  const auto log = dir / "cli_output.txt";
  const std::string cmd = std::string("\"") + SPDC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

void write_text(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSmallConfig =
    "synth.clusters = 2\nsynth.points_per_cluster = 6\nsynth.dim = 3\nexperiment.trials = 2\n";

}  // namespace

TEST(Cli, RunSucceeds) {
  const auto dir = spdc::testing::temp_dir("cli_run");
  write_text(dir / "a.cfg", kSmallConfig);
  const auto r = run_cli("run \"" + (dir / "a.cfg").string() + "\" --out \"" + (dir / "out").string() + "\" --trials 3",
                         dir);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "results.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "summary.csv"));
  std::ifstream in(dir / "out" / "results.csv");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 4);
}

TEST(Cli, SweepSucceeds) {
  const auto dir = spdc::testing::temp_dir("cli_sweep");
  write_text(dir / "a.cfg", kSmallConfig);
  const auto r = run_cli("sweep \"" + (dir / "a.cfg").string() + "\" --gamma 0.1,1 --out \"" +
                             (dir / "out").string() + "\"",
                         dir);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "sweep.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "gamma_1" / "results.csv"));
}

TEST(Cli, Describe) {
  const auto dir = spdc::testing::temp_dir("cli_describe");
  SynthSpec s;
  s.clusters = 3;
  s.points_per_cluster = 4;
  s.dim = 5;
  const auto gen = generate(s);
  write_dataset(SpdDataset{gen.points, gen.labels}, dir / "l.spds");
  write_dataset(SpdDataset{gen.points, std::nullopt}, dir / "u.spds");
  auto r = run_cli("describe \"" + (dir / "l.spds").string() + "\"", dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("N: 12"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("d: 5"), std::string::npos);
  EXPECT_NE(r.out.find("labels: yes (3 classes)"), std::string::npos);
  r = run_cli("describe \"" + (dir / "u.spds").string() + "\"", dir);
  EXPECT_NE(r.out.find("labels: no"), std::string::npos) << r.out;
}

TEST(Cli, InvalidConfigExitsOne) {
  const auto dir = spdc::testing::temp_dir("cli_invalid");
  write_text(dir / "bad.cfg", "experiment.trials = zero\n");
  EXPECT_EQ(run_cli("run \"" + (dir / "bad.cfg").string() + "\"", dir).code, 1);
  write_text(dir / "mismatch.cfg", "experiment.method = kssce\nkernel.kind = stein\n");
  EXPECT_EQ(run_cli("run \"" + (dir / "mismatch.cfg").string() + "\"", dir).code, 1);
  write_text(dir / "ok.cfg", kSmallConfig);
  EXPECT_EQ(run_cli("run \"" + (dir / "ok.cfg").string() + "\" --method lrr", dir).code, 1);
  EXPECT_EQ(run_cli("sweep \"" + (dir / "ok.cfg").string() + "\" --gamma 1,abc", dir).code, 1);
  EXPECT_EQ(run_cli("frobnicate", dir).code, 1);
}

TEST(Cli, UnreadableInputExitsTwo) {
  const auto dir = spdc::testing::temp_dir("cli_unreadable");
  EXPECT_EQ(run_cli("run \"" + (dir / "missing.cfg").string() + "\"", dir).code, 2);
  EXPECT_EQ(run_cli("describe \"" + (dir / "missing.spds").string() + "\"", dir).code, 2);
  std::ofstream(dir / "junk.spds") << "not a dataset";
  EXPECT_EQ(run_cli("describe \"" + (dir / "junk.spds").string() + "\"", dir).code, 2);
  write_text(dir / "ds.cfg", "data.source = dataset\ndata.path = junk.spds\n");
  EXPECT_EQ(run_cli("run \"" + (dir / "ds.cfg").string() + "\"", dir).code, 2);
}

TEST(Cli, NumericFailureExitsThreeAndNamesStage) {
  const auto dir = spdc::testing::temp_dir("cli_numeric");
  // Identical points give an all-ones Gram; with a vanishing penalty the
  // A-update system 2K + rho I has a zero pivot.
  SpdDataset ds;
  ds.points.assign(4, SpdMatrix::identity(3));
  ds.labels = std::vector<int>{0, 0, 1, 1};
  write_dataset(ds, dir / "same.spds");
  write_text(dir / "n.cfg", "data.source = dataset\ndata.path = same.spds\nsolver.rho = 1e-300\nexperiment.output_dir = " +
                                (dir / "out").string() + "\n");
  const auto r = run_cli("run \"" + (dir / "n.cfg").string() + "\"", dir);
  EXPECT_EQ(r.code, 3) << r.out;
  EXPECT_NE(r.out.find("solver"), std::string::npos) << r.out;
}
