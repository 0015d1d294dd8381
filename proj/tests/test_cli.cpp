#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "cnc/io.hpp"
#include "commands.hpp"
#include "config.hpp"

using namespace cnc;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cnc_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Invocation cncctl(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(CNCCTL_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          err.string();
  const int status = std::system(cmd.c_str());
  Invocation r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_file(err);
  return r;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  }
  return out;
}

cli::ExperimentConfig quick(const fs::path& out, std::vector<std::string> extra = {}) {
  std::vector<std::string> o{"seed=3", "dataset.n_per_class=60", "dataset.test_n_per_class=40", "train.epochs=30",
                             "model.hidden=[8, 8]", "eval.ood_count=100", "output_dir=" + out.string()};
  o.insert(o.end(), extra.begin(), extra.end());
  return cli::parse_config("", "<test>", o);
}

double polytope_area(const fs::path& dir) {
  const std::string csv = read_file(dir / "polytope.csv");
  const auto row = csv.substr(csv.find('\n') + 1);
  const auto a = row.find(',');
  return std::stod(row.substr(a + 1, row.find(',', a + 1) - a - 1));
}

}  // namespace

TEST(Config, DefaultsParse) {
  const auto c = cli::parse_config("", "<test>");
  EXPECT_EQ(c.dataset.kind, "two_moons");
  EXPECT_EQ(c.dataset.n_per_class, 500);
  EXPECT_EQ(c.gen.variant, Variant::cnc);
  EXPECT_EQ(c.train.epochs, 2000);
}

TEST(Config, ErrorsCarryLineAndColumn) {
  try {
    (void)cli::parse_config("seed: 1\ntrain:\n  epochs: many\n", "exp.yaml");
    FAIL();
  } catch (const cli::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("exp.yaml:3:11"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("train.epochs"), std::string::npos);
  }
  try {
    (void)cli::parse_config("dataset:\n  kindd: clusters\n", "exp.yaml");
    FAIL();
  } catch (const cli::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("exp.yaml:2:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("unknown key"), std::string::npos);
  }
  EXPECT_THROW(cli::parse_config("a: [1,\n", "exp.yaml"), cli::ConfigError);
  EXPECT_THROW(cli::parse_config("", "x", {"generation.variant=bogus"}), cli::ConfigError);
  EXPECT_THROW(cli::parse_config("", "x", {"generation.ops=[blur]"}), cli::ConfigError);
}

TEST(Config, EmitRoundTrips) {
  const auto c = cli::parse_config("", "x", {"seed=9", "generation.variant=r_cnc", "model.hidden=[4]"});
  const std::string y = cli::emit_config(c);
  EXPECT_EQ(cli::emit_config(cli::parse_config(y, "y")), y);
  EXPECT_EQ(y.find("output_dir"), std::string::npos);
}

TEST(Cncctl, ConfigErrorExitsTwo) {
  const fs::path dir = scratch("exit");
  write_file(dir / "bad.yaml", "train:\n  lr: fast\n");
  const Invocation r = cncctl("train -c " + (dir / "bad.yaml").string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.yaml:2:7"), std::string::npos) << r.err;
  EXPECT_EQ(cncctl("train --set train.epochs=-1", dir).code, 2);
  EXPECT_EQ(cncctl("nosuchcommand", dir).code, 2);
}

TEST(Cncctl, RuntimeErrorExitsOne) {
  const fs::path dir = scratch("runtime");
  const Invocation r = cncctl("polytope -o " + (dir / "out").string(), dir);
  EXPECT_EQ(r.code, 1) << r.err;
}

TEST(Cncctl, TrainEvalPolytopeSmoke) {
  const fs::path dir = scratch("smoke");
  const std::string common = " -o " + (dir / "out").string() +
                             " --seed 4 --set dataset.n_per_class=50 --set train.epochs=20 --set model.hidden=[8]";
  ASSERT_EQ(cncctl("train" + common, dir).code, 0);
  ASSERT_EQ(cncctl("eval" + common, dir).code, 0);
  ASSERT_EQ(cncctl("polytope" + common, dir).code, 0);
  for (const char* f : {"model.ckpt", "loss_history.csv", "train.config.yaml", "eval_report.csv", "scores.csv",
                        "roc.svg", "regions.csv", "complex.svg", "polytope.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  EXPECT_NE(read_file(dir / "out" / "train.config.yaml").find("epochs: 20"), std::string::npos);
}

TEST(Commands, ByteIdenticalAcrossRuns) {
  std::vector<std::map<std::string, std::string>> trees;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = scratch("det" + std::to_string(run));
    const auto cfg = quick(dir);
    std::ostringstream log;
    cli::cmd_train(cfg, log);
    cli::cmd_eval(cfg, log);
    cli::cmd_polytope(cfg, log);
    trees.push_back(read_tree(dir));
  }
  ASSERT_FALSE(trees[0].empty());
  EXPECT_EQ(trees[0], trees[1]);
}

TEST(Commands, ReplayFromResolvedConfig) {
  const fs::path a = scratch("replay_a");
  std::ostringstream log;
  cli::cmd_train(quick(a), log);
  const fs::path b = scratch("replay_b");
  auto again = cli::load_config(a / "train.config.yaml", {"output_dir=" + b.string()});
  cli::cmd_train(again, log);
  EXPECT_EQ(read_file(a / "model.ckpt"), read_file(b / "model.ckpt"));
  EXPECT_EQ(read_file(a / "train.config.yaml"), read_file(b / "train.config.yaml"));
}

TEST(Commands, EvalNeedsRejectHead) {
  const fs::path dir = scratch("vanilla_eval");
  const auto cfg = quick(dir, {"generation.variant=none"});
  std::ostringstream log;
  cli::cmd_train(cfg, log);
  EXPECT_THROW(cli::cmd_eval(cfg, log), std::runtime_error);
}

TEST(Commands, GenerateAndFig2AndDiversity) {
  const fs::path dir = scratch("misc");
  const auto cfg = quick(dir, {"dataset.kind=clusters", "fig2.samples=200", "diversity.samples=50"});
  std::ostringstream log;
  cli::cmd_generate(cfg, log);
  cli::cmd_fig2(cfg, log);
  cli::cmd_diversity(cfg, log);
  const std::string pts = read_file(dir / "ood_points.csv");
  EXPECT_EQ(static_cast<long>(std::count(pts.begin(), pts.end(), '\n')), 240 + 1);
  EXPECT_NE(read_file(dir / "fig2.svg").find("<svg"), std::string::npos);
  const std::string div = read_file(dir / "diversity.csv");
  for (const char* v : {"pbcc_only", "corruption_only", "r_cnc", "cnc"}) EXPECT_NE(div.find(v), std::string::npos);
}

// The synthetic reject class should shrink the ID-claimed area far from the data.
TEST(Commands, CncShrinksEmptyIdAreaOnHalfMoons) {
  std::map<std::string, double> area;
  for (const char* v : {"none", "cnc"}) {
    const fs::path dir = scratch(std::string("area_") + v);
    const auto cfg = cli::parse_config("", "<test>", {"seed=2", "dataset.n_per_class=200", "train.epochs=600",
                                                      std::string("generation.variant=") + v,
                                                      "output_dir=" + dir.string()});
    std::ostringstream log;
    cli::cmd_train(cfg, log);
    cli::cmd_polytope(cfg, log);
    area[v] = polytope_area(dir);
  }
  EXPECT_LT(area["cnc"], area["none"]);
}
