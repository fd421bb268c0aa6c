#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "symdyn/cli.hpp"

namespace fs = std::filesystem;
using symdyn::cli::dispatch;
using Json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("symdyn_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  fs::path dir_;
};

const Json* find_check(const Json& rep, const std::string& name) {
  for (const auto& c : rep["checks"])
    if (c["name"] == name) return &c;
  return nullptr;
}

}  // namespace

TEST_F(Cli, ExitCodeMatrix) {
  EXPECT_EQ(run({"construct5", "--tower", "4,3", "--max-stage", "2"}).code, 0);
  EXPECT_EQ(run({"sft-pair", "--sft", "golden"}).code, 0);
  EXPECT_EQ(run({"sft-pair", "--sft", "single"}).code, 1);
  EXPECT_EQ(run({"shadow", "--poly", "1-t", "--window", "-5:5"}).code, 1);
  EXPECT_EQ(run({"shadow", "--orbit", "perturbed", "--window", "-3:3"}).code, 0);  // radius widens
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"construct5", "--tower", "4,3", "--bogus"}).code, 2);
  EXPECT_EQ(run({"construct5", "--tower", "4,1"}).code, 2);
  EXPECT_EQ(run({"shadow", "--poly", "3 x"}).code, 2);
  EXPECT_EQ(run({"shadow", "--epsilon", "-1"}).code, 2);
  EXPECT_EQ(run({"construct5", "--tower", "4,11", "--max-stage", "2", "--enumeration-cap", "10"}).code, 2);
  EXPECT_EQ(run({"groupshift4", "--factors", "20,10", "--cmd", "count"}).code, 2);
  EXPECT_EQ(run({"verify5", "--stages", path("missing.json")}).code, 2);
  EXPECT_EQ(run({"entropy", "--tower", "4,3", "--factors", "1,2"}).code, 2);
  const auto help = run({"report", "--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("--inputs"), std::string::npos);
}

TEST_F(Cli, ReportSchema) {
  const auto r = run({"tower", "--tower", "4,3"});
  ASSERT_EQ(r.code, 0);
  const auto j = r.json();
  EXPECT_EQ(j["schema"], "symdyn-report/1");
  EXPECT_EQ(j["manifest"]["subcommand"], "tower");
  EXPECT_EQ(j["manifest"]["tool_version"], "1.0.0");
  EXPECT_FALSE(j["manifest"]["params"].contains("threads"));
  EXPECT_FALSE(j.contains("timing"));
  EXPECT_TRUE(j["pass"].get<bool>());
  for (const auto& c : j["checks"]) {
    EXPECT_TRUE(c.contains("name"));
    EXPECT_TRUE(c.contains("pass"));
    EXPECT_EQ(c["status"], "pass");
  }
  EXPECT_TRUE(run({"tower", "--tower", "4,3", "--timing"}).json().contains("timing"));
  EXPECT_EQ(r.out.back(), '\n');
}

TEST_F(Cli, ConfigFileAndPrecedence) {
  write("c.json", R"({"tower": [4, 3], "max_stage": 2})");
  const auto a = run({"construct5", "--config", path("c.json")});
  const auto b = run({"construct5", "--tower", "4,3", "--max-stage", "2"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.json()["result"], b.json()["result"]);
  EXPECT_EQ(a.json()["manifest"]["params"], b.json()["manifest"]["params"]);
  const auto c = run({"construct5", "--config=" + path("c.json"), "--max-stage", "1"});
  EXPECT_EQ(c.json()["result"]["stages"].size(), 2u);

  write("s.json", R"({"poly": "3-1t", "window": "-5:5", "orbit": "perturbed"})");
  EXPECT_EQ(run({"shadow", "--config", path("s.json")}).code, 0);
  write("bad.json", "{ not json");
  EXPECT_EQ(run({"construct5", "--config", path("bad.json")}).code, 2);
  write("arr.json", "[1, 2]");
  EXPECT_EQ(run({"construct5", "--config", path("arr.json")}).code, 2);
  EXPECT_EQ(run({"construct5", "--config", path("none.json")}).code, 2);
}

TEST_F(Cli, DeterministicAcrossRunsAndThreads) {
  const std::vector<std::vector<std::string>> cmds{
      {"construct5", "--tower", "4,11", "--max-stage", "2"},
      {"groupshift4", "--factors", "1,2", "--cmd", "independence", "--n", "1"},
      {"shadow", "--orbit", "perturbed", "--window", "-10:10", "--seed", "3"},
      {"entropy", "--rule", "linear"}};
  for (const auto& cmd : cmds) {
    const auto a = run(cmd), b = run(cmd);
    auto t = cmd;
    t.insert(t.end(), {"--threads", "4"});
    const auto c = run(t);
    EXPECT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out) << cmd[0];
  }
  const auto s1 = run({"shadow", "--orbit", "perturbed", "--window", "-5:5", "--seed", "1"});
  const auto s2 = run({"shadow", "--orbit", "perturbed", "--window", "-5:5", "--seed", "2"});
  EXPECT_NE(s1.out, s2.out);
}

TEST_F(Cli, ShadowCsvAndOutFile) {
  const auto r = run({"shadow", "--window", "-10:10", "--orbit", "perturbed", "--csv", path("e.csv"),
                      "--out", path("t.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("shadow: PASS"), std::string::npos);
  std::istringstream csv(slurp(path("e.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("g,", 0), 0u) << line;
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 21);
  const auto j = Json::parse(slurp(path("t.json")));
  EXPECT_EQ(j["manifest"]["outputs"][0], path("t.json"));
  EXPECT_DOUBLE_EQ(j["result"]["params"]["delta"].get<double>(), 1.0 / 16);
}

TEST_F(Cli, Verify5CatchesCorruption) {
  ASSERT_EQ(run({"construct5", "--tower", "4,3", "--max-stage", "2", "--out", path("st.json")}).code, 0);
  const auto clean = run({"verify5", "--stages", path("st.json")});
  EXPECT_EQ(clean.code, 0) << clean.err;

  auto j = Json::parse(slurp(path("st.json")));
  auto& word = j["result"]["stages"][2]["A"][1];
  std::string w = word.get<std::string>();
  w[3] = w[3] == '0' ? '1' : '0';
  word = w;
  write("bad.json", j.dump(2));
  const auto r = run({"verify5", "--stages", path("bad.json"), "--check", "rigidity"});
  EXPECT_EQ(r.code, 1);
  const auto rep = r.json();
  const Json* c = find_check(rep, "rigidity_2");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE((*c)["pass"].get<bool>());
  EXPECT_FALSE((*c)["witness"].is_null());
  EXPECT_NE(r.err.find("rigidity_2"), std::string::npos);

  write("junk.json", R"({"result": {"tower": {"a": [4, 3]}, "stages": 5}})");
  EXPECT_EQ(run({"verify5", "--stages", path("junk.json")}).code, 2);
}

TEST_F(Cli, GroupShiftCommands) {
  const auto count = run({"groupshift4", "--factors", "1,2", "--cmd", "count"});
  ASSERT_EQ(count.code, 0) << count.err;
  const auto ext = run({"groupshift4", "--factors", "1,2", "--cmd", "extend"});
  EXPECT_EQ(ext.code, 0) << ext.err;
  const auto hom = run({"groupshift4", "--factors", "1,2", "--cmd", "homoclinic", "--n", "1"});
  EXPECT_EQ(hom.code, 0) << hom.err;
  EXPECT_EQ(hom.json()["result"]["candidate_count"], 3);
  const auto off = run({"groupshift4", "--factors", "1,2", "--cmd", "homoclinic", "--support",
                        "0.00,1.00,0.01,0.10"});
  EXPECT_EQ(off.code, 1);
  // E_2 = {0.00, 0.01, 0.11} under the default gammas.
  EXPECT_EQ(run({"groupshift4", "--factors", "1,2", "--cmd", "extend", "--pattern",
                 R"({"0.11": 1, "0.01": 0})"})
                .code,
            0);
  EXPECT_EQ(run({"groupshift4", "--factors", "1,2", "--cmd", "extend", "--pattern",
                 R"({"1.11": 1})"})
                .code,
            2);
  EXPECT_EQ(run({"groupshift4", "--factors", "1,2", "--cmd", "nope"}).code, 2);
}

TEST_F(Cli, SpliceAndReport) {
  const auto sp = run({"splice", "--out", path("sp.json")});
  EXPECT_EQ(sp.code, 0) << sp.err;
  EXPECT_EQ(run({"splice", "--F", "0:20"}).code, 1);
  EXPECT_EQ(run({"sft-pair", "--sft", "single", "--out", path("bad.json")}).code, 1);
  EXPECT_EQ(run({"report", "--inputs", path("sp.json")}).code, 0);
  const auto both = run({"report", "--inputs", path("sp.json") + "," + path("bad.json")});
  EXPECT_EQ(both.code, 1);
  EXPECT_EQ(both.json()["manifest"]["inputs"].size(), 2u);
}
