#include <algorithm>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "mbti/pipeline.hpp"
#include "mbti/util.hpp"

using namespace mbti;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json tiny_config(const fs::path& out) {
  return json{
      {"stages", {"scrape", "clean", "split", "train", "eval", "grid", "lm", "report"}},
      {"output_dir", out.string()},
      {"seed", 7},
      {"corpus", {{"fixtures", MBTI_FIXTURES "/forum"}, {"sections", {"INTJ", "ENFP", "ISTP", "ESFJ"}}}},
      {"vocab", {{"size", 400}}},
      {"encoder", {{"max_position_embeddings", 32}}},
      {"classifier", {{"learning_rate", 1e-4}, {"max_seq_len", 32}, {"epochs", 2}, {"batch_size", 8}}},
      {"grid", json::array({{{"learning_rate", 1e-3}, {"max_seq_len", 32}, {"epochs", 1}, {"batch_size", 8}}})},
      {"lm", {{"learning_rate", 1e-3}, {"max_seq_len", 32}, {"epochs", 1}, {"batch_size", 8},
              {"types", {"INTJ", "ENFP"}}}},
  };
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

PipelineResult run(const json& j) {
  std::ostringstream log;
  return run_pipeline(RunConfig::from_json(j), log);
}

}  // namespace

TEST_CASE("a full tiny run, then an incremental one") {
  const auto dir = fresh_dir("mbti_pipeline_full");
  auto j = tiny_config(dir);
  const auto first = run(j);
  CAPTURE(first.message);
  REQUIRE(first.exit_code == 0);
  CHECK(first.ran == std::vector<std::string>{"scrape", "clean", "split", "train", "eval", "grid", "lm", "report"});
  for (const char* f : {"corpus.jsonl", "clean.jsonl", "train.jsonl", "test.jsonl", "predictions.jsonl", "eval.md",
                        "metrics.csv", "grid.json", "grid.csv", "lm_summary.json", "report.md", "provenance.json",
                        "classifier/config.json", "lm/intj/weights.bin", "lm/enfp/loss_history.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto report = read_file(dir / "report.md");
  CHECK(report.find("## Hyperparameter grid") != std::string::npos);
  CHECK(report.find("## Accuracy per axis") != std::string::npos);
  // Fewer than 16 language models: no loss table.
  CHECK(report.find("## Language generation losses") == std::string::npos);

  const auto provenance = json::parse(read_file(dir / "provenance.json"));
  CHECK(provenance["config_hash"] == RunConfig::from_json(j).hash());
  CHECK(provenance["seeds"]["train"] == derive_seed(7, "train"));

  const auto again = run(j);
  CHECK(again.exit_code == 0);
  CHECK(again.ran.empty());
  CHECK(again.skipped.size() == 8);
  CHECK(read_file(dir / "report.md") == report);

  // A classifier change reruns what depends on it and nothing upstream.
  j["classifier"]["epochs"] = 1;
  const auto third = run(j);
  CHECK(third.exit_code == 0);
  CHECK(third.ran == std::vector<std::string>{"train", "eval", "report"});
}

TEST_CASE("reports do not depend on where the run is written") {
  const auto a = fresh_dir("mbti_pipeline_a");
  const auto b = fresh_dir("mbti_pipeline_b");
  auto ja = tiny_config(a);
  auto jb = tiny_config(b);
  for (auto* j : {&ja, &jb}) (*j)["stages"] = {"scrape", "clean", "split", "train", "eval", "report"};
  REQUIRE(run(ja).exit_code == 0);
  REQUIRE(run(jb).exit_code == 0);
  CHECK(read_file(a / "report.md") == read_file(b / "report.md"));
  CHECK(read_file(a / "metrics.csv") == read_file(b / "metrics.csv"));
  CHECK(RunConfig::from_json(ja).hash() == RunConfig::from_json(jb).hash());
  auto jc = ja;
  jc["seed"] = 8;
  CHECK(RunConfig::from_json(jc).hash() != RunConfig::from_json(ja).hash());
}

TEST_CASE("eval from an existing prediction file") {
  const auto dir = fresh_dir("mbti_pipeline_eval");
  fs::create_directories(dir);
  const auto preds = dir / "given.jsonl";
  write_file(preds, "{\"pred\":\"INTJ\",\"true\":\"INTJ\"}\n{\"pred\":\"INTP\",\"true\":\"INTJ\"}\n");
  const json j{{"stages", {"eval", "report"}}, {"output_dir", (dir / "out").string()}, {"predictions", preds.string()}};
  const auto r = run(j);
  CAPTURE(r.message);
  REQUIRE(r.exit_code == 0);
  const auto report = read_file(dir / "out" / "report.md");
  CHECK(report.find("| 1.0000 | 1.0000 | 1.0000 | 0.5000 |") != std::string::npos);
  CHECK(report.find("## Hyperparameter grid") == std::string::npos);
}

TEST_CASE("configuration and input errors exit with 1 before any stage runs") {
  const auto dir = fresh_dir("mbti_pipeline_errors");
  auto j = tiny_config(dir);
  j["stages"] = {"scrape", "clean"};
  j["corpus"] = {{"path", (dir / "missing.jsonl").string()}};
  auto r = run(j);
  CHECK(r.exit_code == 1);
  CHECK(r.ran.empty());
  CHECK_FALSE(fs::exists(dir / "clean.jsonl"));

  j = tiny_config(dir);
  j["stages"] = {"train"};
  r = run(j);
  CHECK(r.exit_code == 1);
  CHECK(r.message.find("train.jsonl") != std::string::npos);

  j["stages"] = {"deploy"};
  CHECK(run(j).exit_code == 1);
  j["stages"] = json::array();
  CHECK(run(j).exit_code == 1);
}

TEST_CASE("a failing stage exits with 2 and keeps earlier outputs") {
  const auto dir = fresh_dir("mbti_pipeline_failing");
  fs::create_directories(dir);
  write_file(dir / "corpus_in.jsonl", "{\"type\":\"INTJ\",\"body\":\"fine\",\"idx\":0,\"url\":\"u\"}\n{\"oops\":1}\n");
  auto j = tiny_config(dir / "out");
  j["stages"] = {"scrape", "clean"};
  j["corpus"] = {{"path", (dir / "corpus_in.jsonl").string()}};
  const auto r = run(j);
  CHECK(r.exit_code == 2);
  CHECK(r.failed_stage == "scrape");
  CHECK(r.message.find(":2") != std::string::npos);
}

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(RunConfig::from_json(json{{"stages", {"eval"}}, {"tempo", 1}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"preset", "huge"}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"encoder", {{"vocab_size", 10}}}}).encoder(100), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"encoder", {{"layers", 3}}}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"classifier", {{"epochs", 0}}}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"classifier", {{"learning_rate", "fast"}}}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"lm", {{"types", {"XXXX"}}}}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json::array()), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"seed", -1}}), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_json(json{{"lm", {{"epochs", -2}}}}), ValidationError);

  const auto c = RunConfig::from_json(json{{"seed", 9}, {"grid", json::array({json::object()})}}, "/base");
  CHECK(c.classifier.seed == derive_seed(9, "train"));
  CHECK(c.grid.at(0).seed == derive_seed(9, "grid"));
  CHECK(c.lm.seed == derive_seed(9, "lm"));
  CHECK(c.output_dir == fs::path("/base/run"));
  CHECK(c.encoder(500).hidden_size == 64);
  CHECK(c.encoder(500).vocab_size == 500);
  const auto explicit_seed = RunConfig::from_json(json{{"classifier", {{"seed", 3}}}});
  CHECK(explicit_seed.classifier.seed == 3);
}

TEST_CASE("clean corpus files") {
  const auto path = fs::temp_directory_path() / "mbti_clean.jsonl";
  RawPost post;
  post.body = "You're an INTJ!";
  post.section_label = parse_type("ENFP");
  post.post_index = 3;
  post.source_url = "fixture:enfp_page1.html";
  const auto records = clean_corpus(std::vector<RawPost>{post}, false);
  REQUIRE(records.size() == 1);
  CHECK(records[0].clean_body == "you 're an <type> !");
  save_clean_corpus(records, path);
  const auto loaded = load_clean_corpus(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].post == post);
  CHECK(loaded[0].clean_body == records[0].clean_body);
  CHECK(labeled_examples(loaded).at(0).label == parse_type("ENFP"));
  write_file(path, "{\"type\":\"ENFP\",\"body\":\"x\",\"idx\":0,\"url\":\"u\"}\n");
  CHECK_THROWS_WITH_AS(load_clean_corpus(path), doctest::Contains(":1"), SchemaError);
}
