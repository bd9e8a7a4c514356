// Command-line front end for the MBTI experiment pipeline.
//
// Exit status: 0 success, 1 invalid input or configuration, 2 a stage failed.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbti/checkpoint.hpp"
#include "mbti/classifier.hpp"
#include "mbti/corpus.hpp"
#include "mbti/dataset.hpp"
#include "mbti/evaluator.hpp"
#include "mbti/langgen.hpp"
#include "mbti/pipeline.hpp"
#include "mbti/preprocess.hpp"
#include "mbti/report.hpp"
#include "mbti/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mbti;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailed = 2;

std::string fixtures_from_env() {
  const char* v = std::getenv("MBTI_FIXTURES_DIR");
  return v ? v : "";
}

json load_config_json(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

RunConfig config_from(json j, const std::string& path) {
  return RunConfig::from_json(j, path.empty() ? fs::path() : fs::path(path).parent_path());
}

// Command-line values win over the config file.
template <typename T>
void override_key(json& section, const char* key, const std::optional<T>& value) {
  if (value) section[key] = *value;
}

struct HpFlags {
  std::optional<double> lr;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> max_seq_len;
  std::optional<std::size_t> batch_size;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* app) {
    app->add_option("--lr", lr, "Learning rate");
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--max-seq-len", max_seq_len, "Maximum sequence length");
    app->add_option("--batch-size", batch_size, "Batch size");
    app->add_option("--seed", seed, "Training seed");
  }

  void apply(json& j, const char* section) const {
    if (!j.contains(section)) j[section] = json::object();
    auto& s = j[section];
    override_key(s, "learning_rate", lr);
    override_key(s, "epochs", epochs);
    override_key(s, "max_seq_len", max_seq_len);
    override_key(s, "batch_size", batch_size);
    override_key(s, "seed", seed);
  }
};

void print_metrics(const MetricsReport& m) {
  std::cout << metrics_markdown(m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MBTI personality classification and per-type language generation"};
  app.require_subcommand(1);

  // scrape
  auto* scrape = app.add_subcommand("scrape", "Collect posts from forum sections");
  std::vector<std::string> sections;
  std::size_t max_posts = 5000;
  std::size_t min_chars = 50;
  std::string scrape_out;
  std::string fixtures = fixtures_from_env();
  std::string url_template;
  int delay_ms = 1000;
  scrape->add_option("--section", sections, "Type code of a forum section (repeatable)")->required();
  scrape->add_option("--max-posts", max_posts, "Most recent posts kept per section");
  scrape->add_option("--min-chars", min_chars, "Posts must be longer than this");
  scrape->add_option("--out", scrape_out, "Output JSONL corpus")->required();
  scrape->add_option("--fixtures", fixtures, "Read saved pages from DIR (env MBTI_FIXTURES_DIR)");
  scrape->add_option("--url-template", url_template, "Live pages: URL with {type} and {page}");
  scrape->add_option("--delay-ms", delay_ms, "Delay between live requests");

  // clean
  auto* clean_cmd = app.add_subcommand("clean", "Clean and mask post bodies");
  std::string clean_in, clean_out;
  bool preserve_case = false;
  clean_cmd->add_option("--in", clean_in, "Raw JSONL corpus")->required();
  clean_cmd->add_option("--out", clean_out, "Output JSONL with clean_body")->required();
  clean_cmd->add_flag("--preserve-case", preserve_case, "Keep letter case");

  // split
  auto* split_cmd = app.add_subcommand("split", "Stratified train/test split");
  std::string split_in, train_out, test_out;
  double fraction = 0.85;
  std::uint64_t split_seed = 42;
  split_cmd->add_option("--in", split_in, "Cleaned JSONL corpus")->required();
  split_cmd->add_option("--train-out", train_out, "Training JSONL")->required();
  split_cmd->add_option("--test-out", test_out, "Test JSONL")->required();
  split_cmd->add_option("--train-fraction", fraction, "Share of each label used for training");
  split_cmd->add_option("--seed", split_seed, "Shuffle seed");

  // build-vocab
  auto* vocab_cmd = app.add_subcommand("build-vocab", "Learn a subword vocabulary");
  std::string vocab_in, vocab_out;
  std::size_t vocab_size = 2000;
  bool cased = false;
  vocab_cmd->add_option("--in", vocab_in, "Cleaned JSONL corpus")->required();
  vocab_cmd->add_option("--out", vocab_out, "vocab.txt")->required();
  vocab_cmd->add_option("--size", vocab_size, "Target vocabulary size");
  vocab_cmd->add_flag("--cased", cased, "Do not lowercase");

  // train-classifier
  auto* train_cmd = app.add_subcommand("train-classifier", "Fine-tune the 16-way classifier");
  std::string config_path, train_in, model_out, vocab_path, pretrained;
  HpFlags train_flags;
  train_cmd->add_option("--config", config_path, "JSON run configuration");
  train_cmd->add_option("--train", train_in, "Cleaned training JSONL")->required();
  train_cmd->add_option("--out", model_out, "Checkpoint directory")->required();
  train_cmd->add_option("--vocab", vocab_path, "Existing vocab.txt (default: learn from --train)");
  train_cmd->add_option("--pretrained", pretrained, "Weights file with encoder.* tensors");
  train_flags.add(train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict types with a trained classifier");
  std::string model_dir, text, pred_in, pred_out;
  predict_cmd->add_option("--model", model_dir, "Checkpoint directory")->required();
  auto* text_opt = predict_cmd->add_option("--text", text, "Raw text to classify");
  auto* in_opt = predict_cmd->add_option("--in", pred_in, "Cleaned labeled JSONL");
  predict_cmd->add_option("--out", pred_out, "Predictions JSONL (with --in)");
  text_opt->excludes(in_opt);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions");
  std::string eval_pred, eval_report, eval_csv;
  eval_cmd->add_option("--pred", eval_pred, "Predictions JSONL")->required();
  eval_cmd->add_option("--report", eval_report, "Markdown report");
  eval_cmd->add_option("--csv", eval_csv, "CSV report (default: next to --report)");

  // train-lm
  auto* lm_cmd = app.add_subcommand("train-lm", "Fine-tune a masked language model for one type");
  std::string lm_type, lm_corpus, lm_out, lm_config, lm_vocab;
  HpFlags lm_flags;
  lm_cmd->add_option("--type", lm_type, "Type code")->required();
  lm_cmd->add_option("--corpus", lm_corpus, "JSONL posts of that type")->required();
  lm_cmd->add_option("--out", lm_out, "Checkpoint directory")->required();
  lm_cmd->add_option("--config", lm_config, "JSON run configuration");
  lm_cmd->add_option("--vocab", lm_vocab, "Existing cased vocab.txt");
  lm_flags.add(lm_cmd);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Continue a prompt with a per-type model");
  std::string gen_model, prompt, strategy = "greedy";
  DecodeConfig decode;
  gen_cmd->add_option("--model", gen_model, "Language-model checkpoint")->required();
  gen_cmd->add_option("--prompt", prompt, "Prompt text")->required();
  gen_cmd->add_option("--max-new-tokens", decode.max_new_tokens, "Pieces to generate");
  gen_cmd->add_option("--strategy", strategy, "greedy or top_k");
  gen_cmd->add_option("--top-k", decode.top_k, "Candidates for top_k sampling");
  gen_cmd->add_option("--temperature", decode.temperature, "Softmax temperature");
  gen_cmd->add_option("--seed", decode.seed, "Sampling seed");

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "Run a hyperparameter grid");
  std::string grid_config, grid_train, grid_test, grid_out, grid_report;
  grid_cmd->add_option("--config", grid_config, "JSON run configuration (grid rows)");
  grid_cmd->add_option("--train", grid_train, "Cleaned training JSONL")->required();
  grid_cmd->add_option("--test", grid_test, "Cleaned test JSONL")->required();
  grid_cmd->add_option("--out", grid_out, "Results JSON")->required();
  grid_cmd->add_option("--report", grid_report, "Markdown table");

  // report / pipeline
  auto* report_cmd = app.add_subcommand("report", "Assemble the report of a run directory");
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run the stages named in a configuration");
  std::string run_config, output_dir, stages;
  std::optional<std::uint64_t> run_seed;
  for (auto* cmd : {report_cmd, pipe_cmd}) {
    cmd->add_option("--config", run_config, "JSON run configuration")->required();
    cmd->add_option("--output-dir", output_dir, "Overrides output_dir");
  }
  pipe_cmd->add_option("--seed", run_seed, "Overrides the global seed");
  pipe_cmd->add_option("--stages", stages, "Comma-separated stages (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (scrape->parsed()) {
      std::unique_ptr<PageFetcher> fetcher;
      if (!url_template.empty()) {
        HttpFetcherOptions options;
        options.url_template = url_template;
        options.delay = std::chrono::milliseconds(delay_ms);
        fetcher = std::make_unique<HttpFetcher>(options);
      } else if (!fixtures.empty()) {
        fetcher = std::make_unique<FixtureFetcher>(fixtures);
      } else {
        throw ValidationError("scrape needs --fixtures DIR (or MBTI_FIXTURES_DIR) or --url-template");
      }
      Corpus corpus;
      for (const auto& s : sections) {
        std::vector<std::string> diagnostics;
        const auto posts = scrape_section(*fetcher, parse_type(s), {max_posts, min_chars}, &diagnostics);
        for (const auto& d : diagnostics) std::cerr << s << ": " << d << "\n";
        corpus.posts.insert(corpus.posts.end(), posts.begin(), posts.end());
      }
      if (fs::path(scrape_out).has_parent_path()) fs::create_directories(fs::path(scrape_out).parent_path());
      save_corpus(corpus, scrape_out);
      const auto stats = corpus_stats(corpus);
      std::cout << stats.post_count << " posts, " << stats.word_count << " words\n";
    } else if (clean_cmd->parsed()) {
      const auto corpus = load_corpus(clean_in);
      save_clean_corpus(clean_corpus(corpus.posts, preserve_case), clean_out);
    } else if (split_cmd->parsed()) {
      const auto records = load_clean_corpus(split_in);
      std::vector<MbtiType> labels;
      for (const auto& r : records) labels.push_back(r.post.section_label);
      const auto mask = split_mask(labels, fraction, split_seed);
      std::vector<CleanRecord> train_set, test_set;
      for (std::size_t i = 0; i < records.size(); ++i) (mask[i] ? train_set : test_set).push_back(records[i]);
      save_clean_corpus(train_set, train_out);
      save_clean_corpus(test_set, test_out);
      std::cout << train_set.size() << " train, " << test_set.size() << " test\n";
    } else if (vocab_cmd->parsed()) {
      const auto records = load_clean_corpus(vocab_in);
      const auto vocab = classifier_vocabulary(records, vocab_size, !cased);
      vocab.save(vocab_out);
      std::cout << vocab.size() << " tokens, version " << vocab.version_id() << "\n";
    } else if (train_cmd->parsed()) {
      auto j = load_config_json(config_path);
      train_flags.apply(j, "classifier");
      const auto config = config_from(j, config_path);
      const auto records = load_clean_corpus(train_in);
      const auto vocab = vocab_path.empty()
                             ? classifier_vocabulary(records, config.vocab_size, config.lowercase)
                             : Vocabulary::load(vocab_path, config.lowercase);
      auto encoder = config.encoder(vocab.size());
      encoder.max_position_embeddings = std::max(encoder.max_position_embeddings, config.classifier.max_seq_len);
      const auto examples = labeled_examples(records);
      const auto encoded = encode_all(examples, vocab, config.classifier.max_seq_len);
      auto model = train(init_model(encoder, config.stage_seed("init"), pretrained), encoded, config.classifier,
                         [](std::size_t epoch, double loss) {
                           std::cout << "epoch " << epoch + 1 << " loss " << loss << std::endl;
                         });
      save_checkpoint(model, vocab, model_out);
    } else if (predict_cmd->parsed()) {
      const auto ckpt = load_classifier(model_dir);
      if (!text.empty() || pred_in.empty()) {
        if (text.empty()) throw ValidationError("predict needs --text or --in");
        const auto p = predict(ckpt.model, ckpt.vocab, text);
        std::cout << p.type << "\n";
      } else {
        if (pred_out.empty()) throw ValidationError("--in needs --out");
        const auto test = labeled_examples(load_clean_corpus(pred_in));
        const std::size_t len =
            std::min(ckpt.model.hyperparams.max_seq_len, ckpt.model.config.max_position_embeddings);
        save_predictions(evaluate(ckpt.model, encode_all(test, ckpt.vocab, len)), pred_out);
      }
    } else if (eval_cmd->parsed()) {
      const auto m = metrics_report(load_predictions(eval_pred));
      if (eval_report.empty()) {
        print_metrics(m);
      } else {
        write_file(eval_report, metrics_markdown(m));
        write_file(eval_csv.empty() ? fs::path(eval_report).replace_extension(".csv") : fs::path(eval_csv),
                   metrics_csv(m));
      }
    } else if (lm_cmd->parsed()) {
      auto j = load_config_json(lm_config);
      lm_flags.apply(j, "lm");
      const auto config = config_from(j, lm_config);
      const auto type = parse_type(lm_type);
      const auto corpus = load_corpus(lm_corpus);
      std::vector<CleanDocument> docs;
      std::vector<std::string> texts;
      for (const auto& p : corpus.posts) {
        if (p.section_label != type) {
          throw ValidationError(lm_corpus + ": post labeled " + p.section_label.str() + " in a " + type.str() +
                                " corpus");
        }
        docs.push_back(clean(p.body, true));
        texts.push_back(docs.back().tokens_text);
      }
      const auto vocab = lm_vocab.empty() ? build_vocabulary(texts, config.vocab_size, false)
                                          : Vocabulary::load(lm_vocab, false);
      auto encoder = config.encoder(vocab.size());
      encoder.case_sensitive = true;
      encoder.max_position_embeddings = std::max(encoder.max_position_embeddings, config.lm.max_seq_len);
      auto bundle = train_lm(init_lm(encoder, type, config.stage_seed("lm-init")), vocab, docs, config.lm,
                             [](std::size_t epoch, double loss) {
                               std::cout << "epoch " << epoch + 1 << " loss " << loss << std::endl;
                             });
      save_checkpoint(bundle, vocab, lm_out);
    } else if (gen_cmd->parsed()) {
      decode.strategy = parse_strategy(strategy);
      const auto ckpt = load_lm(gen_model);
      std::cout << generate(ckpt.bundle, ckpt.vocab, prompt, decode).text << "\n";
    } else if (grid_cmd->parsed()) {
      const auto config = config_from(load_config_json(grid_config), grid_config);
      const auto train_records = load_clean_corpus(grid_train);
      const auto vocab = classifier_vocabulary(train_records, config.vocab_size, config.lowercase);
      const auto train_set = labeled_examples(train_records);
      const auto test_set = labeled_examples(load_clean_corpus(grid_test));
      const auto grid = config.grid.empty() ? paper_grid(config.stage_seed("grid")) : config.grid;
      const auto rows = run_grid(grid, {train_set, test_set, &vocab, config.encoder(vocab.size())});
      json out = json::array();
      for (const auto& r : rows) {
        out.push_back({{"hyperparams", r.hyperparams},
                       {"exact_accuracy", r.exact_accuracy},
                       {"per_epoch_loss", r.per_epoch_loss}});
      }
      write_file(grid_out, out.dump(2) + "\n");
      if (!grid_report.empty()) write_file(grid_report, grid_markdown(rows));
      std::cout << grid_markdown(rows);
    } else if (report_cmd->parsed() || pipe_cmd->parsed()) {
      auto j = load_config_json(run_config);
      if (report_cmd->parsed()) j["stages"] = json::array({"report"});
      if (!output_dir.empty()) j["output_dir"] = fs::absolute(output_dir).string();
      if (run_seed) j["seed"] = *run_seed;
      if (!stages.empty()) {
        json list = json::array();
        std::stringstream ss(stages);
        for (std::string s; std::getline(ss, s, ',');) list.push_back(s);
        j["stages"] = list;
      }
      if (const auto env = fixtures_from_env(); !env.empty()) {
        if (!j.contains("corpus")) j["corpus"] = json::object();
        if (!j["corpus"].contains("path")) j["corpus"]["fixtures"] = fs::absolute(env).string();
      }
      const auto config = config_from(j, run_config);
      const auto result = run_pipeline(config, std::cerr);
      if (result.exit_code != 0) {
        std::cerr << (result.failed_stage.empty() ? "" : "stage " + result.failed_stage + ": ") << result.message
                  << "\n";
      }
      return result.exit_code;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
