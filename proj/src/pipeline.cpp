#include "mbti/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <type_traits>

#include "mbti/checkpoint.hpp"
#include "mbti/dataset.hpp"
#include "mbti/evaluator.hpp"
#include "mbti/preprocess.hpp"
#include "mbti/report.hpp"
#include "mbti/tokenizer.hpp"
#include "mbti/util.hpp"

namespace mbti {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void save_clean_corpus(std::span<const CleanRecord> records, const fs::path& path) {
  std::string out;
  for (const auto& r : records) {
    ordered_json line;
    line["type"] = r.post.section_label.str();
    line["body"] = r.post.body;
    line["idx"] = r.post.post_index;
    line["url"] = r.post.source_url;
    line["clean_body"] = r.clean_body;
    out += line.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  }
  write_file(path, out);
}

std::vector<CleanRecord> load_clean_corpus(const fs::path& path) {
  // The raw fields are validated by load_corpus; clean_body is read here.
  const auto corpus = load_corpus(path);
  std::ifstream in(path, std::ios::binary);
  std::vector<CleanRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto j = json::parse(line);
    const auto it = j.find("clean_body");
    if (it == j.end() || !it->is_string()) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": missing field 'clean_body'");
    }
    records.push_back({corpus.posts.at(k++), it->get<std::string>()});
  }
  return records;
}

std::vector<CleanRecord> clean_corpus(std::span<const RawPost> posts, bool preserve_case) {
  std::vector<CleanRecord> out;
  out.reserve(posts.size());
  for (const auto& p : posts) out.push_back({p, clean(p.body, preserve_case).tokens_text});
  return out;
}

std::vector<LabeledExample> labeled_examples(std::span<const CleanRecord> records) {
  std::vector<LabeledExample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.clean_body, r.post.section_label});
  return out;
}

Vocabulary classifier_vocabulary(std::span<const CleanRecord> train, std::size_t size, bool lowercase) {
  std::vector<std::string> texts;
  texts.reserve(train.size());
  for (const auto& r : train) texts.push_back(r.clean_body);
  return build_vocabulary(texts, size, lowercase);
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!it->is_number_integer() || (!it->is_number_unsigned() && it->template get<std::int64_t>() < 0)) {
      throw ValidationError(std::string("config key '") + key + "' must be a non-negative integer");
    }
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

std::vector<MbtiType> parse_types(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be a list of types");
  std::vector<MbtiType> out;
  for (const auto& t : j) {
    if (!t.is_string()) throw ValidationError(std::string(what) + " must be a list of types");
    out.push_back(parse_type(t.get<std::string>()));
  }
  return out;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError(what + ": unknown key '" + key + "'");
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// Hash of a file, or of every file under a directory (relative names
// included, in sorted order).
std::string hash_path(const fs::path& p) {
  if (!fs::exists(p)) return "missing";
  if (fs::is_regular_file(p)) return file_sha256(p);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(p)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) acc += fs::relative(f, p).generic_string() + " " + file_sha256(f) + "\n";
  return sha256_hex(acc);
}

bool requested(const RunConfig& c, std::string_view stage) {
  return std::find(c.stages.begin(), c.stages.end(), stage) != c.stages.end();
}

struct Stage {
  std::string name;
  std::vector<std::string> config_keys;  // parts of the config the stage depends on
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::function<void()> run;
  bool always_run = false;
};

class Runner {
 public:
  Runner(const RunConfig& c, std::ostream& log) : c_(c), log_(log), out_(c.output_dir) {}

  PipelineResult run();

 private:
  fs::path at(const std::string& name) const { return out_ / name; }
  std::vector<Stage> plan();
  void preflight(const std::vector<Stage>& stages) const;
  std::string stage_key(const Stage& s) const;
  void write_provenance(const PipelineResult& r) const;

  void scrape();
  void clean_stage();
  void split();
  void train_stage();
  void eval();
  void grid();
  void lm();
  void report();

  const RunConfig& c_;
  std::ostream& log_;
  fs::path out_;
};

std::vector<Stage> Runner::plan() {
  std::vector<Stage> all;
  std::vector<fs::path> scrape_inputs;
  if (!c_.corpus_path.empty()) scrape_inputs.push_back(c_.corpus_path);
  else if (!c_.fixtures.empty()) scrape_inputs.push_back(c_.fixtures);
  all.push_back({"scrape", {"corpus"}, scrape_inputs, {at("corpus.jsonl")}, [this] { scrape(); },
                 c_.corpus_path.empty() && c_.fixtures.empty()});
  all.push_back({"clean", {"vocab"}, {at("corpus.jsonl")}, {at("clean.jsonl")}, [this] { clean_stage(); }});
  all.push_back({"split", {"split", "seed"}, {at("clean.jsonl")}, {at("train.jsonl"), at("test.jsonl")},
                 [this] { split(); }});
  all.push_back({"train", {"preset", "encoder", "vocab", "classifier", "seed"}, {at("train.jsonl")},
                 {at("classifier")}, [this] { train_stage(); }});
  if (!c_.predictions.empty()) {
    all.push_back({"eval", {}, {c_.predictions}, {at("predictions.jsonl"), at("eval.md")}, [this] { eval(); }});
  } else {
    all.push_back({"eval", {}, {at("classifier"), at("test.jsonl")}, {at("predictions.jsonl"), at("eval.md")},
                   [this] { eval(); }});
  }
  all.push_back({"grid", {"preset", "encoder", "vocab", "grid", "seed"}, {at("train.jsonl"), at("test.jsonl")},
                 {at("grid.json")}, [this] { grid(); }});
  all.push_back({"lm", {"preset", "encoder", "vocab", "lm", "seed"}, {at("corpus.jsonl")},
                 {at("lm"), at("lm_summary.json")}, [this] { lm(); }});
  std::vector<fs::path> report_inputs;
  for (const char* f : {"predictions.jsonl", "grid.json", "lm_summary.json", "corpus.jsonl"}) {
    report_inputs.push_back(at(f));
  }
  all.push_back({"report", {"*"}, report_inputs, {at("report.md")}, [this] { report(); }});

  std::vector<Stage> chosen;
  for (auto& s : all) {
    if (requested(c_, s.name)) chosen.push_back(std::move(s));
  }
  return chosen;
}

void Runner::preflight(const std::vector<Stage>& stages) const {
  std::vector<fs::path> produced;
  for (const auto& s : stages) {
    if (s.name == "report") {
      const bool any = std::any_of(s.inputs.begin(), s.inputs.end() - 1, [&](const fs::path& p) {
        return fs::exists(p) || std::find(produced.begin(), produced.end(), p) != produced.end();
      });
      if (!any) throw ValidationError("report stage has nothing to report: run eval, grid or lm first");
    } else {
      for (const auto& in : s.inputs) {
        if (std::find(produced.begin(), produced.end(), in) == produced.end() && !fs::exists(in)) {
          throw ValidationError("stage " + s.name + " needs " + in.string() + ", which does not exist");
        }
      }
    }
    if (s.name == "scrape" && c_.corpus_path.empty() && c_.fixtures.empty() && c_.url_template.empty()) {
      throw ValidationError("scrape stage needs corpus.path, corpus.fixtures or corpus.url_template");
    }
    produced.insert(produced.end(), s.outputs.begin(), s.outputs.end());
  }
}

std::string Runner::stage_key(const Stage& s) const {
  json key;
  key["stage"] = s.name;
  if (s.config_keys == std::vector<std::string>{"*"}) {
    key["config"] = c_.hash();
  } else {
    for (const auto& k : s.config_keys) {
      if (c_.source.contains(k)) key["config"][k] = c_.source[k];
    }
  }
  for (const auto& in : s.inputs) key["inputs"][in.filename().string()] = hash_path(in);
  return sha256_hex(key.dump());
}

void Runner::write_provenance(const PipelineResult& r) const {
  ordered_json p;
  p["config_hash"] = c_.hash();
  p["config"] = c_.source;
  ordered_json seeds;
  seeds["global"] = c_.seed;
  for (const char* s : kStageOrder) seeds[s] = c_.stage_seed(s);
  p["seeds"] = seeds;
  ordered_json inputs;
  for (const char* f : {"corpus.jsonl", "clean.jsonl", "train.jsonl", "test.jsonl"}) {
    if (fs::exists(at(f))) inputs[f] = file_sha256(at(f));
  }
  p["inputs"] = inputs;
  p["ran"] = r.ran;
  p["skipped"] = r.skipped;
  if (!r.failed_stage.empty()) p["failed_stage"] = r.failed_stage;
  write_file(at("provenance.json"), p.dump(2) + "\n");
}

PipelineResult Runner::run() {
  PipelineResult result;
  std::vector<Stage> stages;
  try {
    for (const auto& s : c_.stages) {
      if (std::find(std::begin(kStageOrder), std::end(kStageOrder), s) == std::end(kStageOrder)) {
        throw ValidationError("unknown stage '" + s + "'");
      }
    }
    if (c_.stages.empty()) throw ValidationError("no stages requested");
    stages = plan();
    preflight(stages);
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.message = e.what();
    log_ << "error: " << e.what() << "\n";
    return result;
  }

  fs::create_directories(out_ / ".stamps");
  for (const auto& s : stages) {
    const auto stamp_path = out_ / ".stamps" / s.name;
    std::string key;
    try {
      key = stage_key(s);
      const bool outputs_exist =
          std::all_of(s.outputs.begin(), s.outputs.end(), [](const fs::path& p) { return fs::exists(p); });
      if (!s.always_run && outputs_exist && fs::exists(stamp_path) && read_file(stamp_path) == key) {
        log_ << "[" << s.name << "] up to date, skipped\n";
        result.skipped.push_back(s.name);
        continue;
      }
      fs::remove(stamp_path);
      log_ << "[" << s.name << "] running\n";
      s.run();
      write_file(stamp_path, key);
      result.ran.push_back(s.name);
    } catch (const std::exception& e) {
      result.exit_code = 2;
      result.failed_stage = s.name;
      result.message = e.what();
      log_ << "[" << s.name << "] failed: " << e.what() << "\n";
      break;
    }
  }
  write_provenance(result);
  return result;
}

void Runner::scrape() {
  Corpus corpus;
  if (!c_.corpus_path.empty()) {
    corpus = load_corpus(c_.corpus_path);
  } else {
    std::unique_ptr<PageFetcher> fetcher;
    if (!c_.fixtures.empty()) {
      fetcher = std::make_unique<FixtureFetcher>(c_.fixtures);
    } else {
      HttpFetcherOptions options;
      options.url_template = c_.url_template;
      fetcher = std::make_unique<HttpFetcher>(options);
    }
    const auto sections = c_.sections.empty()
                              ? std::vector<MbtiType>(all_types().begin(), all_types().end())
                              : c_.sections;
    for (const auto type : sections) {
      std::vector<std::string> diagnostics;
      auto posts = scrape_section(*fetcher, type, c_.scrape, &diagnostics);
      for (const auto& d : diagnostics) log_ << "  " << type << ": " << d << "\n";
      log_ << "  " << type << ": " << posts.size() << " posts\n";
      corpus.posts.insert(corpus.posts.end(), posts.begin(), posts.end());
    }
  }
  fs::create_directories(out_);
  save_corpus(corpus, at("corpus.jsonl"));
  const auto stats = corpus_stats(corpus);
  log_ << "  corpus: " << stats.post_count << " posts, " << stats.word_count << " words\n";
}

void Runner::clean_stage() {
  const auto corpus = load_corpus(at("corpus.jsonl"));
  save_clean_corpus(clean_corpus(corpus.posts, !c_.lowercase), at("clean.jsonl"));
}

void Runner::split() {
  const auto records = load_clean_corpus(at("clean.jsonl"));
  std::vector<MbtiType> labels;
  for (const auto& r : records) labels.push_back(r.post.section_label);
  const auto mask = split_mask(labels, c_.train_fraction, c_.stage_seed("split"));
  std::vector<CleanRecord> train;
  std::vector<CleanRecord> test;
  for (std::size_t i = 0; i < records.size(); ++i) (mask[i] ? train : test).push_back(records[i]);
  save_clean_corpus(train, at("train.jsonl"));
  save_clean_corpus(test, at("test.jsonl"));
  log_ << "  " << train.size() << " train, " << test.size() << " test\n";
}

void Runner::train_stage() {
  const auto records = load_clean_corpus(at("train.jsonl"));
  const auto vocab = classifier_vocabulary(records, c_.vocab_size, c_.lowercase);
  auto config = c_.encoder(vocab.size());
  config.max_position_embeddings = std::max(config.max_position_embeddings, c_.classifier.max_seq_len);
  const auto examples = labeled_examples(records);
  const auto encoded = encode_all(examples, vocab, c_.classifier.max_seq_len);
  auto model = train(init_model(config, c_.stage_seed("init")), encoded, c_.classifier,
                     [this](std::size_t epoch, double loss) {
                       log_ << "  epoch " << epoch + 1 << " loss " << loss << "\n";
                     });
  save_checkpoint(model, vocab, at("classifier"));
}

void Runner::eval() {
  std::vector<PredictionRecord> records;
  if (!c_.predictions.empty()) {
    records = load_predictions(c_.predictions);
  } else {
    const auto ckpt = load_classifier(at("classifier"));
    const auto test = labeled_examples(load_clean_corpus(at("test.jsonl")));
    const std::size_t len = std::min(ckpt.model.hyperparams.max_seq_len, ckpt.model.config.max_position_embeddings);
    records = evaluate(ckpt.model, encode_all(test, ckpt.vocab, len));
  }
  save_predictions(records, at("predictions.jsonl"));
  const auto m = metrics_report(records);
  write_file(at("eval.md"), metrics_markdown(m));
  write_file(at("metrics.csv"), metrics_csv(m));
  log_ << "  exact accuracy " << m.exact_accuracy << " on " << m.n_records << " posts\n";
}

void Runner::grid() {
  const auto train_records = load_clean_corpus(at("train.jsonl"));
  const auto vocab = classifier_vocabulary(train_records, c_.vocab_size, c_.lowercase);
  const auto train_set = labeled_examples(train_records);
  const auto test_set = labeled_examples(load_clean_corpus(at("test.jsonl")));
  const auto rows_hp = c_.grid.empty() ? paper_grid(c_.stage_seed("grid")) : c_.grid;
  const GridData data{train_set, test_set, &vocab, c_.encoder(vocab.size())};
  json out = json::array();
  std::size_t i = 0;
  for (const auto& hp : rows_hp) {
    log_ << "  row " << ++i << "/" << rows_hp.size() << ": lr " << hp.learning_rate << ", max_seq_len "
         << hp.max_seq_len << ", epochs " << hp.epochs << "\n";
    const auto rows = run_grid(std::span(&hp, 1), data);
    out.push_back({{"hyperparams", rows[0].hyperparams},
                   {"exact_accuracy", rows[0].exact_accuracy},
                   {"per_epoch_loss", rows[0].per_epoch_loss}});
  }
  write_file(at("grid.json"), out.dump(2) + "\n");
}

void Runner::lm() {
  const auto corpus = load_corpus(at("corpus.jsonl"));
  std::array<std::vector<CleanDocument>, kNumTypes> by_type;
  std::vector<std::string> texts;
  for (const auto& p : corpus.posts) {
    auto doc = clean(p.body, true);
    texts.push_back(doc.tokens_text);
    by_type[p.section_label.index()].push_back(std::move(doc));
  }
  const auto vocab = build_vocabulary(texts, c_.vocab_size, false);
  auto config = c_.encoder(vocab.size());
  config.case_sensitive = true;
  config.max_position_embeddings = std::max(config.max_position_embeddings, c_.lm.max_seq_len);
  // Every type starts from the same initial weights.
  const auto base = init_lm(config, all_types().front(), c_.stage_seed("lm-init"));
  const auto types =
      c_.lm_types.empty() ? std::vector<MbtiType>(all_types().begin(), all_types().end()) : c_.lm_types;
  json summary = json::array();
  for (const auto type : types) {
    const auto& docs = by_type[type.index()];
    if (docs.empty()) throw ValidationError("no posts for " + type.str() + " in the corpus");
    auto bundle = base;
    bundle.type_label = type;
    bundle = train_lm(std::move(bundle), vocab, docs, c_.lm);
    log_ << "  " << type << ": final loss " << bundle.final_loss << " over " << docs.size() << " posts\n";
    auto dir_name = type.str();
    std::transform(dir_name.begin(), dir_name.end(), dir_name.begin(), [](char ch) { return static_cast<char>(ch | 0x20); });
    save_checkpoint(bundle, vocab, at("lm") / dir_name);
    summary.push_back({{"type", type.str()}, {"final_loss", bundle.final_loss}, {"corpus_size", bundle.corpus_size}});
  }
  write_file(at("lm_summary.json"), summary.dump(2) + "\n");
}

void Runner::report() {
  ReportInputs in;
  if (fs::exists(at("grid.json"))) {
    std::vector<GridRow> rows;
    for (const auto& r : json::parse(read_file(at("grid.json")))) {
      rows.push_back({r.at("hyperparams").get<TrainHyperparams>(), r.at("exact_accuracy").get<double>(),
                      r.at("per_epoch_loss").get<std::vector<double>>()});
    }
    in.grid = std::move(rows);
  }
  if (fs::exists(at("predictions.jsonl"))) {
    in.metrics = metrics_report(load_predictions(at("predictions.jsonl")));
  }
  if (fs::exists(at("lm_summary.json"))) {
    std::vector<LmSummary> summaries;
    for (const auto& r : json::parse(read_file(at("lm_summary.json")))) {
      summaries.push_back({parse_type(r.at("type").get<std::string>()), r.at("final_loss").get<double>(),
                           r.at("corpus_size").get<std::size_t>()});
    }
    if (summaries.size() == kNumTypes) {
      in.losses = loss_table(summaries);
    } else {
      log_ << "  language-model table needs all 16 types, found " << summaries.size() << "; left out\n";
    }
  }
  in.provenance.config_hash = c_.hash();
  in.provenance.seeds.emplace_back("global", c_.seed);
  for (const char* s : {"split", "init", "train", "grid", "lm-init", "lm"}) {
    in.provenance.seeds.emplace_back(s, c_.stage_seed(s));
  }
  if (fs::exists(at("corpus.jsonl"))) in.provenance.inputs.emplace_back("corpus.jsonl", file_sha256(at("corpus.jsonl")));
  const auto rendered = emit_report(in);
  write_file(at("report.md"), rendered.markdown);
  for (const auto& [name, contents] : rendered.csv) write_file(at(name), contents);
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base) {
  if (!j.is_object()) throw ValidationError("run config must be a JSON object");
  reject_unknown(j, {"stages", "output_dir", "seed", "preset", "corpus", "vocab", "split", "encoder",
                     "classifier", "grid", "lm", "predictions"},
                 "run config");
  RunConfig c;
  c.source = j;
  c.stages = get_or<std::vector<std::string>>(j, "stages", {});
  c.output_dir = resolve(base, get_or<std::string>(j, "output_dir", "run"));
  c.seed = get_or<std::uint64_t>(j, "seed", 42);
  c.preset = get_or<std::string>(j, "preset", "tiny");
  if (c.preset != "tiny" && c.preset != "paper") {
    throw ValidationError("preset must be 'tiny' or 'paper', got '" + c.preset + "'");
  }

  const auto corpus = j.value("corpus", json::object());
  reject_unknown(corpus, {"fixtures", "url_template", "path", "sections", "max_posts", "min_chars"}, "corpus");
  c.fixtures = resolve(base, get_or<std::string>(corpus, "fixtures", ""));
  c.url_template = get_or<std::string>(corpus, "url_template", "");
  c.corpus_path = resolve(base, get_or<std::string>(corpus, "path", ""));
  if (corpus.contains("sections")) c.sections = parse_types(corpus["sections"], "corpus.sections");
  c.scrape.max_posts = get_or<std::size_t>(corpus, "max_posts", c.scrape.max_posts);
  c.scrape.min_chars = get_or<std::size_t>(corpus, "min_chars", c.scrape.min_chars);

  const auto vocab = j.value("vocab", json::object());
  reject_unknown(vocab, {"size", "lowercase"}, "vocab");
  c.vocab_size = get_or<std::size_t>(vocab, "size", c.vocab_size);
  c.lowercase = get_or<bool>(vocab, "lowercase", c.lowercase);

  const auto split = j.value("split", json::object());
  reject_unknown(split, {"train_fraction"}, "split");
  c.train_fraction = get_or<double>(split, "train_fraction", c.train_fraction);

  c.encoder_overrides = j.value("encoder", json::object());
  c.encoder(100).validate();  // rejects unknown keys and bad values early

  // Seeds not given explicitly derive from the global seed.
  c.classifier.seed = c.stage_seed("train");
  if (j.contains("classifier")) {
    auto hp = j["classifier"];
    if (!hp.is_object()) throw ValidationError("classifier must be an object");
    c.classifier = hp.get<TrainHyperparams>();
    if (!hp.contains("seed")) c.classifier.seed = c.stage_seed("train");
  }
  c.classifier.validate();

  if (j.contains("grid")) {
    if (!j["grid"].is_array()) throw ValidationError("grid must be a list of hyperparameter sets");
    for (const auto& row : j["grid"]) {
      auto hp = row.get<TrainHyperparams>();
      if (!row.contains("seed")) hp.seed = c.stage_seed("grid");
      hp.validate();
      c.grid.push_back(hp);
    }
  }

  c.lm.seed = c.stage_seed("lm");
  if (j.contains("lm")) {
    auto lm = j["lm"];
    if (!lm.is_object()) throw ValidationError("lm must be an object");
    if (lm.contains("types")) {
      c.lm_types = parse_types(lm["types"], "lm.types");
      lm.erase("types");
    }
    c.lm = lm.get<LmHyperparams>();
    if (!lm.contains("seed")) c.lm.seed = c.stage_seed("lm");
  }
  c.lm.validate();

  c.predictions = resolve(base, get_or<std::string>(j, "predictions", ""));
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

std::string RunConfig::hash() const {
  auto j = source;
  j.erase("output_dir");
  return sha256_hex(j.dump());
}

std::uint64_t RunConfig::stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }

nn::EncoderConfig RunConfig::encoder(std::size_t vocab) const {
  auto merged = json(nn::preset(preset, vocab));
  for (const auto& [key, value] : encoder_overrides.items()) {
    if (key == "vocab_size") throw ValidationError("encoder.vocab_size is set from the vocabulary");
    merged[key] = value;
  }
  return merged.get<nn::EncoderConfig>();
}

PipelineResult run_pipeline(const RunConfig& config, std::ostream& log) {
  return Runner(config, log).run();
}

}  // namespace mbti
