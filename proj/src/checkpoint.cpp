#include "mbti/checkpoint.hpp"

#include <charconv>
#include <random>
#include <set>
#include <sstream>

#include "mbti/nn/serialize.hpp"
#include "mbti/util.hpp"

namespace mbti {

namespace {

using nlohmann::json;

// Reads known keys into fields and rejects anything else, so that a typo in a
// config file fails loudly instead of silently using a default.
class FieldReader {
 public:
  FieldReader(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) throw ValidationError(what_ + ": expected an object");
  }

  template <typename T>
  void operator()(const char* key, T& out) {
    known_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    const bool ok = [&] {
      if constexpr (std::is_same_v<T, bool>) return it->is_boolean();
      else if constexpr (std::is_unsigned_v<T>) return it->is_number_unsigned() || (it->is_number_integer() && it->template get<std::int64_t>() >= 0);
      else if constexpr (std::is_floating_point_v<T>) return it->is_number();
      else return it->is_string();
    }();
    if (!ok) throw ValidationError(what_ + "." + key + ": wrong value type");
    out = it->template get<T>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.contains(key)) throw ValidationError(what_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string what_;
  std::set<std::string, std::less<>> known_;
};

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void save_losses(const std::vector<double>& losses, const std::filesystem::path& path) {
  std::string out = "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(losses[i]) + "\n";
  }
  write_file(path, out);
}

std::vector<double> load_losses(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<double> losses;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double v = 0;
    if (comma == std::string::npos ||
        std::from_chars(line.data() + comma + 1, line.data() + line.size(), v).ec != std::errc{}) {
      throw ValidationError(path.string() + ": malformed loss line '" + line + "'");
    }
    losses.push_back(v);
  }
  return losses;
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json common_config(const nn::EncoderConfig& encoder, const Vocabulary& vocab) {
  json j;
  j["encoder"] = encoder;
  j["vocab_file"] = "vocab.txt";
  j["vocab_version"] = vocab.version_id();
  j["lowercase"] = vocab.lowercase();
  return j;
}

Vocabulary load_vocab(const json& config, const std::filesystem::path& dir) {
  const bool lowercase = config.at("lowercase").get<bool>();
  auto vocab = Vocabulary::load(dir / config.at("vocab_file").get<std::string>(), lowercase);
  if (vocab.version_id() != config.at("vocab_version").get<std::string>()) {
    throw ValidationError(dir.string() + ": vocabulary does not match the version the model was trained with");
  }
  return vocab;
}

}  // namespace

namespace nn {

void to_json(json& j, const EncoderConfig& c) {
  j = json{{"vocab_size", c.vocab_size},
           {"hidden_size", c.hidden_size},
           {"num_layers", c.num_layers},
           {"num_heads", c.num_heads},
           {"intermediate_size", c.intermediate_size},
           {"max_position_embeddings", c.max_position_embeddings},
           {"type_vocab_size", c.type_vocab_size},
           {"dropout", c.dropout},
           {"attention_dropout", c.attention_dropout},
           {"layer_norm_eps", c.layer_norm_eps},
           {"initializer_range", c.initializer_range},
           {"case_sensitive", c.case_sensitive},
           {"vocab_ref", c.vocab_ref},
           {"freeze_encoder", c.freeze_encoder}};
}

void from_json(const json& j, EncoderConfig& c) {
  FieldReader read(j, "encoder");
  read("vocab_size", c.vocab_size);
  read("hidden_size", c.hidden_size);
  read("num_layers", c.num_layers);
  read("num_heads", c.num_heads);
  read("intermediate_size", c.intermediate_size);
  read("max_position_embeddings", c.max_position_embeddings);
  read("type_vocab_size", c.type_vocab_size);
  read("dropout", c.dropout);
  read("attention_dropout", c.attention_dropout);
  read("layer_norm_eps", c.layer_norm_eps);
  read("initializer_range", c.initializer_range);
  read("case_sensitive", c.case_sensitive);
  read("vocab_ref", c.vocab_ref);
  read("freeze_encoder", c.freeze_encoder);
  read.finish();
}

}  // namespace nn

void to_json(json& j, const TrainHyperparams& hp) {
  j = json{{"learning_rate", hp.learning_rate}, {"max_seq_len", hp.max_seq_len},
           {"epochs", hp.epochs},               {"batch_size", hp.batch_size},
           {"warmup_proportion", hp.warmup_proportion}, {"weight_decay", hp.weight_decay},
           {"seed", hp.seed}};
}

void from_json(const json& j, TrainHyperparams& hp) {
  FieldReader read(j, "classifier");
  read("learning_rate", hp.learning_rate);
  read("max_seq_len", hp.max_seq_len);
  read("epochs", hp.epochs);
  read("batch_size", hp.batch_size);
  read("warmup_proportion", hp.warmup_proportion);
  read("weight_decay", hp.weight_decay);
  read("seed", hp.seed);
  read.finish();
}

void to_json(json& j, const LmHyperparams& hp) {
  j = json{{"batch_size", hp.batch_size},   {"learning_rate", hp.learning_rate},
           {"epochs", hp.epochs},           {"max_seq_len", hp.max_seq_len},
           {"warmup_proportion", hp.warmup_proportion}, {"weight_decay", hp.weight_decay},
           {"mask_probability", hp.mask_probability},   {"seed", hp.seed}};
}

void from_json(const json& j, LmHyperparams& hp) {
  FieldReader read(j, "lm");
  read("batch_size", hp.batch_size);
  read("learning_rate", hp.learning_rate);
  read("epochs", hp.epochs);
  read("max_seq_len", hp.max_seq_len);
  read("warmup_proportion", hp.warmup_proportion);
  read("weight_decay", hp.weight_decay);
  read("mask_probability", hp.mask_probability);
  read("seed", hp.seed);
  read.finish();
}

void save_checkpoint(const TrainedClassifier& model, const Vocabulary& vocab,
                     const std::filesystem::path& dir) {
  auto config = common_config(model.config, vocab);
  config["hyperparams"] = model.hyperparams;
  write_file(dir / "config.json", config.dump(2) + "\n");
  vocab.save(dir / "vocab.txt");
  nn::save_weights(model.weights, dir / "weights.bin");
  save_losses(model.per_epoch_loss, dir / "loss_history.csv");
}

ClassifierCheckpoint load_classifier(const std::filesystem::path& dir) {
  const auto config = read_json(dir / "config.json");
  if (config.contains("type_label")) {
    throw ValidationError(dir.string() + ": this is a language-model checkpoint, not a classifier");
  }
  TrainedClassifier model;
  try {
    model.config = config.at("encoder").get<nn::EncoderConfig>();
    model.hyperparams = config.at("hyperparams").get<TrainHyperparams>();
  } catch (const json::exception& e) {
    throw ValidationError(dir.string() + "/config.json: " + e.what());
  }
  model.config.validate();
  auto vocab = load_vocab(config, dir);
  std::mt19937_64 rng(0);
  model.weights = nn::ClassifierWeights<Real>::init(model.config, kNumTypes, rng);
  nn::assign_weights(model.weights, nn::read_tensors(dir / "weights.bin"), "");
  model.per_epoch_loss = load_losses(dir / "loss_history.csv");
  return {std::move(model), std::move(vocab)};
}

void save_checkpoint(const LmBundle& bundle, const Vocabulary& vocab, const std::filesystem::path& dir) {
  auto config = common_config(bundle.config, vocab);
  config["hyperparams"] = bundle.hyperparams;
  config["type_label"] = bundle.type_label.str();
  config["final_loss"] = bundle.final_loss;
  config["corpus_size"] = bundle.corpus_size;
  write_file(dir / "config.json", config.dump(2) + "\n");
  vocab.save(dir / "vocab.txt");
  nn::save_weights(bundle.weights, dir / "weights.bin");
  save_losses(bundle.per_epoch_loss, dir / "loss_history.csv");
}

LmCheckpoint load_lm(const std::filesystem::path& dir) {
  const auto config = read_json(dir / "config.json");
  if (!config.contains("type_label")) {
    throw ValidationError(dir.string() + ": not a language-model checkpoint (no type_label)");
  }
  LmBundle bundle;
  try {
    bundle.config = config.at("encoder").get<nn::EncoderConfig>();
    bundle.hyperparams = config.at("hyperparams").get<LmHyperparams>();
    bundle.type_label = parse_type(config.at("type_label").get<std::string>());
    bundle.final_loss = config.at("final_loss").get<double>();
    bundle.corpus_size = config.at("corpus_size").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ValidationError(dir.string() + "/config.json: " + e.what());
  }
  bundle.config.validate();
  auto vocab = load_vocab(config, dir);
  std::mt19937_64 rng(0);
  bundle.weights = nn::MaskedLmWeights<Real>::init(bundle.config, rng);
  nn::assign_weights(bundle.weights, nn::read_tensors(dir / "weights.bin"), "");
  bundle.per_epoch_loss = load_losses(dir / "loss_history.csv");
  return {std::move(bundle), std::move(vocab)};
}

}  // namespace mbti
