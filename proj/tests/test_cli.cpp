#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "expmart/cli.hpp"
#include "json.hpp"

using namespace expmart;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = EXPMART_CONFIG_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "expmart");
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("expmart_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, BrownianConditionRow) {
  const auto dir = scratch("brownian");
  const auto r = run({"check-conditions", kConfigs + "/brownian.cfg", "-o", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto l = lines(slurp(dir / "conditions.csv"));
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[1], "condition,horizon,value,bound,verdict");
  EXPECT_EQ(l[2], "B1,1,0.5,,pass");
}

TEST(Cli, DivergentTailRow) {
  const auto dir = scratch("tail");
  const auto r = run({"check-conditions", kConfigs + "/exp_tail.cfg", "-o", dir.string()});
  EXPECT_EQ(r.code, 2);
  const auto l = lines(slurp(dir / "conditions.csv"));
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[2], "B1,1,inf,,fail");
}

TEST(Cli, TooFewPaths) {
  const auto dir = scratch("few");
  const auto r = run({"test-martingale", kConfigs + "/gbm_martingale.cfg", "--n-paths", "50", "-o", dir.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Cli, MalformedConfigNamesLine) {
  const auto dir = scratch("bad");
  const auto cfg = write(dir, "bad.cfg", "dimension = 1\ndiffusion = 1\nlevy.family = merton\nlevy.params.rate = x\nlevy.params.sd = 0.2\n");
  const fs::path out = dir / "out";
  const auto r = run({"check-conditions", cfg.string(), "-o", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bad.cfg:4"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("levy.params.rate"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out));
  const auto r2 = run({"check-conditions", write(dir, "noeq.cfg", "dimension 1\n").string(), "-o", out.string()});
  EXPECT_EQ(r2.code, 1);
  EXPECT_NE(r2.err.find("noeq.cfg:1"), std::string::npos) << r2.err;
  const auto r3 = run({"check-conditions", write(dir, "nosd.cfg", "levy.family = merton\nlevy.params.rate = 1\n").string(),
                       "-o", out.string()});
  EXPECT_EQ(r3.code, 1);
  EXPECT_NE(r3.err.find("levy.params.sd"), std::string::npos) << r3.err;
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"frobnicate", kConfigs + "/brownian.cfg"}).code, 1);
  EXPECT_EQ(run({"check-conditions"}).code, 1);
  EXPECT_EQ(run({"check-conditions", "/nonexistent.cfg"}).code, 1);
}

TEST(Cli, ManifestAndHashes) {
  const auto dir = scratch("manifest");
  const auto r = run({"test-martingale", kConfigs + "/gbm_martingale.cfg", "--n-paths", "2000", "-o", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  for (const char* key : {"config_sha", "seed", "n_paths", "grid", "command", "tool_version"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
  EXPECT_EQ(m["n_paths"], 2000);
  EXPECT_EQ(m["seed"], 20240311);
  EXPECT_EQ(m["command"], "test-martingale");
  const std::string sha = m["config_sha"];
  EXPECT_EQ(sha, sha256_hex(slurp(kConfigs + "/gbm_martingale.cfg") + slurp(kConfigs + "/brownian.cfg")));
  const std::string csv = slurp(dir / "tests.csv");
  EXPECT_EQ(lines(csv)[0], "# config_sha=" + sha);
  EXPECT_EQ(lines(csv)[1], "quantity,estimate,stderr,z,verdict");
  EXPECT_EQ(m["outputs"]["tests.csv"], sha256_hex(csv));
}

TEST(Cli, ConfigChangeChangesHash) {
  const auto dir = scratch("hash");
  const auto a = write(dir, "a.cfg", "diffusion = 1\nlambda = 1\n");
  const auto b = write(dir, "b.cfg", "diffusion = 1\nlambda = 1.0\n");
  EXPECT_EQ(run({"check-conditions", a.string(), "-o", (dir / "a").string()}).code, 0);
  EXPECT_EQ(run({"check-conditions", b.string(), "-o", (dir / "b").string()}).code, 0);
  EXPECT_EQ(lines(slurp(dir / "a/conditions.csv"))[2], lines(slurp(dir / "b/conditions.csv"))[2]);
  EXPECT_NE(slurp(dir / "a/manifest.json"), slurp(dir / "b/manifest.json"));
}

TEST(Cli, BitwiseDeterministicAcrossThreads) {
  const auto dir = scratch("det");
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"test-martingale", "merton_martingale.cfg"}, {"price-call", "black_scholes.cfg"}, {"libor-build", "libor_merton.cfg"}};
  for (const auto& [cmd, cfg] : cmds) {
    std::vector<std::string> outs;
    for (const char* threads : {"1", "4", "1"}) {
      const fs::path out = dir / (cmd + threads + std::to_string(outs.size()));
      const auto r = run({cmd, kConfigs + "/" + cfg, "--n-paths", "3000", "--steps", "48", "--threads", threads, "-o",
                          out.string()});
      ASSERT_EQ(r.code, 0) << cmd << r.err;
      std::string all;
      for (const auto& e : fs::directory_iterator(out)) all += e.path().filename().string() + "\n" + slurp(e.path());
      outs.push_back(all);
    }
    EXPECT_EQ(outs[0], outs[1]) << cmd;
    EXPECT_EQ(outs[0], outs[2]) << cmd;
  }
}

TEST(Cli, OtherCommands) {
  const auto dir = scratch("other");
  auto r = run({"cumulant-table", kConfigs + "/merton_martingale.cfg", "--steps", "4", "-o", (dir / "k").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(dir / "k/cumulant.csv")).size(), 2u + 5u);
  r = run({"simulate", kConfigs + "/merton_martingale.cfg", "--n-paths", "100", "--steps", "4", "-o",
           (dir / "s").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(dir / "s/ensemble.csv")).size(), 2u + 400u);
  r = run({"libor-check", kConfigs + "/libor_merton.cfg", "-o", (dir / "l").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(dir / "l/conditions.csv")).size(), 5u);
  r = run({"price-caplet", kConfigs + "/caplet_black.cfg", "--n-paths", "5000", "-o", (dir / "c").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "c/prices.csv"));
  r = run({"price-call", kConfigs + "/exp_tail_asset.cfg", "--n-paths", "1000", "-o", (dir / "p").string()});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_FALSE(fs::exists(dir / "p/prices.csv"));
}
