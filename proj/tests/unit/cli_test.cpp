// SPDX-License-Identifier: Apache-2.0
// Runs the calconf binary end to end. CALCONF_CLI is the executable path.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("calconf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of `calconf <args>`; stderr is kept in err().
  int run(const std::string& args) {
    const std::string command = std::string(CALCONF_CLI) + " " + args + " 2>" + path("stderr.txt") + " >" + path("stdout.txt");
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  }
  std::vector<std::string> lines(const std::string& name) const {
    std::vector<std::string> out;
    std::stringstream stream(read(name));
    for (std::string line; std::getline(stream, line);) {
      if (!line.empty()) out.push_back(line);
    }
    return out;
  }
  std::string err() const { return read("stderr.txt"); }
  std::string out() const { return read("stdout.txt"); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  // Synthetic records + quality sidecar, then score and quality files.
  void pipeline(const std::string& tag, double coupling, std::uint64_t seed, std::size_t n = 200) {
    ASSERT_EQ(run("synth --output " + path(tag + ".jsonl") + " --n-records " + std::to_string(n) + " --coupling " +
                  std::to_string(coupling) + " --seed " + std::to_string(seed)),
              0)
        << err();
    ASSERT_EQ(run("score --input " + path(tag + ".jsonl") + " --output " + path(tag + ".scores")), 0) << err();
    ASSERT_EQ(run("quality --input " + path(tag + ".jsonl") + " --output " + path(tag + ".quality")), 0) << err();
  }

  fs::path dir_;
};

std::string record_line(const std::string& id, const std::string& task, const std::string& text,
                        const std::string& reference) {
  nlohmann::json beam1 = {{"text", text}, {"seq_log_prob", -1.0}, {"tokens", {{{"token", "x"}, {"log_prob", -1.0}}}}};
  nlohmann::json beam2 = {{"text", "zzz"}, {"seq_log_prob", -2.5}, {"tokens", {{{"token", "z"}, {"log_prob", -2.5}}}}};
  nlohmann::json record = {{"id", id}, {"input", "in"}, {"references", {reference}}, {"task", task}, {"beams", {beam1, beam2}}};
  return record.dump() + "\n";
}

TEST_F(Cli, ScoreFiveRecordsAndSkips) {
  std::string text;
  for (int i = 0; i < 5; ++i) text += record_line("r" + std::to_string(i), "qa", "answer", "answer");
  write("five.jsonl", text);
  ASSERT_EQ(run("score --input " + path("five.jsonl") + " --output " + path("five.scores")), 0) << err();
  const auto rows = lines("five.scores");
  ASSERT_EQ(rows.size(), 5u);
  const auto doc = nlohmann::json::parse(rows[0]);
  EXPECT_EQ(doc["id"], "r0");
  for (const char* method : {"dae", "dsm", "dvb", "dvk"}) EXPECT_TRUE(doc["scores"][method].contains("skipped"));
  EXPECT_DOUBLE_EQ(doc["scores"]["ratio"]["value"].get<double>(), 1.5);
  EXPECT_NE(err().find("dae: skipped on 5"), std::string::npos);
}

TEST_F(Cli, UnreadableInput) {
  EXPECT_EQ(run("score --input " + path("missing.jsonl") + " --output " + path("x")), 5);
  write("bad.jsonl", "{oops\n");
  EXPECT_EQ(run("score --input " + path("bad.jsonl") + " --output " + path("x")), 2);
  EXPECT_NE(err().find("line 1"), std::string::npos);
  write("invalid.jsonl", record_line("a", "qa", "t", "t") + record_line("a", "qa", "t", "t"));
  EXPECT_EQ(run("score --input " + path("invalid.jsonl") + " --output " + path("x")), 3);
  EXPECT_EQ(run("score --bogus"), 1);
  write("valid.jsonl", record_line("a", "qa", "t", "t"));
  EXPECT_EQ(run("score --input " + path("valid.jsonl") + " --output " + path("x") + " --methods ratio,nope"), 1);
  EXPECT_EQ(run("score --input " + path("valid.jsonl") + " --output " + path("x") + " --k 0"), 1);
}

TEST_F(Cli, QualityRouting) {
  write("mixed.jsonl", record_line("t", "translation", "a b c", "a b d e") + record_line("q", "qa", "The answer", "answer") +
                           record_line("s", "summarization", "the cat", "the cat sat"));
  ASSERT_EQ(run("quality --input " + path("mixed.jsonl") + " --output " + path("mixed.quality")), 0) << err();
  const auto rows = lines("mixed.quality");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(nlohmann::json::parse(rows[0])["metric"], "bleu");
  EXPECT_EQ(nlohmann::json::parse(rows[1])["metric"], "f1");
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(rows[1])["value"].get<double>(), 1.0);
  EXPECT_EQ(nlohmann::json::parse(rows[2])["metric"], "rouge_l");
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(rows[2])["value"].get<double>(), 0.8);

  write("odd.jsonl", record_line("p", "poetry", "a", "a"));
  EXPECT_EQ(run("quality --input " + path("odd.jsonl") + " --output " + path("odd.quality")), 3);
  EXPECT_NE(err().find("poetry"), std::string::npos);
  EXPECT_EQ(run("quality --input " + path("odd.jsonl") + " --output " + path("odd.quality") + " --metric bleu2"), 1);
  EXPECT_EQ(run("quality --input " + path("odd.jsonl") + " --output " + path("odd.quality") + " --metric meteor"), 0);
}

TEST_F(Cli, CorrelateCoupledFixture) {
  pipeline("c1", 1.0, 1);
  ASSERT_EQ(run("correlate --input " + path("c1.scores") + " --quality " + path("c1.quality") + " --output " +
                path("c1.report") + " --dataset syn --model m --bootstrap-b 1000"),
            0)
      << err();
  const auto report = nlohmann::json::parse(lines("c1.report").at(0));
  EXPECT_EQ(report["dataset"], "syn");
  const std::string table = out();
  EXPECT_NE(table.find("syn/m"), std::string::npos);
  EXPECT_NE(table.find("tail"), std::string::npos);
}

TEST_F(Cli, CorrelateStarsTwoMethods) {
  pipeline("c2", 1.0, 2);
  ASSERT_EQ(run("score --input " + path("c2.jsonl") + " --output " + path("two.scores") + " --methods tail,atp"), 0);
  ASSERT_EQ(run("correlate --input " + path("two.scores") + " --quality " + path("c2.quality") +
                " --bootstrap-b 2000 --table " + path("two.table")),
            0)
      << err();
  const std::string table = read("two.table");
  EXPECT_NE(table.find("★"), std::string::npos) << table;
  EXPECT_NE(table.find("☆ p<0.10"), std::string::npos);
}

TEST_F(Cli, CorrelateMismatchedIds) {
  pipeline("c3", 1.0, 3, 30);
  pipeline("c4", 1.0, 4, 31);
  EXPECT_EQ(run("correlate --input " + path("c3.scores") + " --quality " + path("c4.quality") + " --bootstrap-b 1000"), 3);
  EXPECT_EQ(run("correlate --input " + path("c3.scores") + " --quality " + path("c3.quality") + " --bootstrap-b 10"), 1);
}

TEST_F(Cli, TuneSmokeAndDeterminism) {
  pipeline("t", 1.0, 5);
  const std::string args = "tune --input " + path("t.jsonl") + " --quality " + path("t.quality") + " --val-size 100 --seed 3";
  ASSERT_EQ(run(args + " --output " + path("tune1.json") + " --sweep " + path("sweep.txt")), 0) << err();
  ASSERT_EQ(run(args + " --output " + path("tune2.json")), 0);
  EXPECT_EQ(read("tune1.json"), read("tune2.json"));
  const auto results = lines("tune1.json");
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(nlohmann::json::parse(results[0])["method"], "ratio");
  EXPECT_EQ(nlohmann::json::parse(results[1])["sweep"].size(), 6u);
  EXPECT_NE(read("sweep.txt").find("# k abs_spearman"), std::string::npos);
  EXPECT_EQ(run(args + " --k 100 --methods ratio"), 1);
  EXPECT_EQ(run(args + " --k 99 --methods ratio --temperature 0.5,1"), 0) << err();
  EXPECT_EQ(run(args + " --methods tail --temperature 0.5,1"), 0) << err();
  EXPECT_EQ(nlohmann::json::parse(out())["sweep"].size(), 2u);
}

TEST_F(Cli, RankReports) {
  pipeline("r", 1.0, 6, 60);
  // All 18 preset dataset/model pairs.
  const char* pairs[][2] = {{"flores-fil", "bart"}, {"flores-fil", "flan-t5"}, {"wmt-de-en", "bart"},
                            {"wmt-de-en", "flan-t5"}, {"wmt-ru-en", "bart"},  {"wmt-ru-en", "flan-t5"},
                            {"hotpotqa", "bart"},     {"hotpotqa", "flan-t5"}, {"squad", "bart"},
                            {"squad", "flan-t5"},     {"debatesumm", "bart"}, {"debatesumm", "flan-t5"},
                            {"reddit", "bart"},       {"reddit", "flan-t5"},  {"cnn", "bart"},
                            {"cnn", "flan-t5"},       {"xsum", "bart"},       {"xsum", "flan-t5"}};
  std::string inputs;
  for (const auto& pair : pairs) {
    const std::string file = path(std::string(pair[0]) + "_" + pair[1] + ".report");
    ASSERT_EQ(run("correlate --input " + path("r.scores") + " --quality " + path("r.quality") + " --output " + file +
                  " --dataset " + pair[0] + " --model " + pair[1] + " --bootstrap-b 1000"),
              0)
        << err();
    inputs += " --input " + file;
  }
  ASSERT_EQ(run("rank" + inputs + " --output " + path("summary.json") + " --table " + path("rank.table")), 0) << err();
  const auto summary = nlohmann::json::parse(read("summary.json"));
  EXPECT_EQ(summary["pairs"].size(), 18u);
  EXPECT_EQ(summary["methods"]["tail"]["ranks"].size(), 18u);
  const std::string header = read("rank.table").substr(0, read("rank.table").find('\n'));
  EXPECT_NE(header.find("xsum/flan-t5"), std::string::npos);
  EXPECT_NE(header.find("Avg"), std::string::npos);
  EXPECT_NE(header.find("Med"), std::string::npos);

  // A report that scored a different method set cannot be ranked with the others.
  ASSERT_EQ(run("score --input " + path("r.jsonl") + " --output " + path("few.scores") + " --methods ratio,tail"), 0);
  ASSERT_EQ(run("correlate --input " + path("few.scores") + " --quality " + path("r.quality") + " --output " +
                path("few.report") + " --bootstrap-b 1000"),
            0);
  EXPECT_EQ(run("rank --input " + path("few.report")), 0);
  EXPECT_EQ(run("rank --input " + path("few.report") + " --input " + path("cnn_bart.report")), 3);
}

TEST_F(Cli, SynthDeterministicAndValidated) {
  ASSERT_EQ(run("synth --output " + path("a.jsonl") + " --archetype heavy_tail --n-records 20 --n-beams 7 --seed 4"), 0);
  ASSERT_EQ(run("synth --output " + path("b.jsonl") + " --archetype heavy_tail --n-records 20 --n-beams 7 --seed 4"), 0);
  EXPECT_EQ(read("a.jsonl"), read("b.jsonl"));
  EXPECT_EQ(read("a.jsonl.quality.jsonl"), read("b.jsonl.quality.jsonl"));
  EXPECT_EQ(lines("a.jsonl").size(), 20u);
  EXPECT_EQ(nlohmann::json::parse(lines("a.jsonl")[0])["beams"].size(), 7u);
  EXPECT_EQ(run("synth --output " + path("c.jsonl") + " --archetype bimodal"), 1);
  write("spec.json", R"({"mode": "ratio_coupled", "n_records": 15, "n_beams": 12, "k_star": 2})");
  ASSERT_EQ(run("synth --spec " + path("spec.json") + " --output " + path("d.jsonl") + " --quality-output " + path("d.q")), 0);
  EXPECT_EQ(lines("d.q").size(), 15u);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  pipeline("f", 1.0, 7, 40);
  write("run.json", R"({"input": ")" + path("f.jsonl") + R"(", "output": ")" + path("cfg.scores") +
                        R"(", "methods": ["ratio"], "k": 3})");
  ASSERT_EQ(run("score --config " + path("run.json")), 0) << err();
  const auto first = nlohmann::json::parse(lines("cfg.scores").at(0));
  EXPECT_EQ(first["scores"].size(), 1u);
  ASSERT_EQ(run("score --config " + path("run.json") + " --k 1"), 0);
  const auto second = nlohmann::json::parse(lines("cfg.scores").at(0));
  EXPECT_NE(first["scores"]["ratio"]["value"], second["scores"]["ratio"]["value"]);
  // --k 3 via file equals --k 3 via flag.
  ASSERT_EQ(run("score --input " + path("f.jsonl") + " --output " + path("flag.scores") + " --methods ratio --k 3"), 0);
  EXPECT_EQ(nlohmann::json::parse(lines("flag.scores").at(0)), first);
  write("broken.json", "{");
  EXPECT_EQ(run("score --config " + path("broken.json")), 2);
}

TEST_F(Cli, PresetsApplyByTag) {
  pipeline("p", 1.0, 8, 20);
  ASSERT_EQ(run("score --input " + path("p.jsonl") + " --output " + path("preset.scores") + " --methods ratio --preset squad/flan-t5"), 0);
  ASSERT_EQ(run("score --input " + path("p.jsonl") + " --output " + path("tag.scores") +
                " --methods ratio --dataset squad --model flan-t5"),
            0);
  ASSERT_EQ(run("score --input " + path("p.jsonl") + " --output " + path("k4.scores") + " --methods ratio --k 4"), 0);
  EXPECT_EQ(read("preset.scores"), read("k4.scores"));
  EXPECT_EQ(read("tag.scores"), read("k4.scores"));
  EXPECT_EQ(run("score --input " + path("p.jsonl") + " --output " + path("x") + " --preset squad/gpt"), 1);
}

TEST_F(Cli, IdempotentOutputs) {
  pipeline("i", 0.5, 9, 50);
  const std::string first = read("i.scores");
  ASSERT_EQ(run("score --input " + path("i.jsonl") + " --output " + path("i.scores") + " --workers 3"), 0);
  EXPECT_EQ(read("i.scores"), first);
  const std::string correlate = "correlate --input " + path("i.scores") + " --quality " + path("i.quality") +
                                " --bootstrap-b 1000 --seed 5 --workers 2 --output ";
  ASSERT_EQ(run(correlate + path("one.report")), 0);
  ASSERT_EQ(run(correlate + path("two.report")), 0);
  EXPECT_EQ(read("one.report"), read("two.report"));
}

}  // namespace
