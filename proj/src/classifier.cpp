#include "mbti/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mbti/nn/optimizer.hpp"
#include "mbti/nn/serialize.hpp"
#include "mbti/preprocess.hpp"

namespace mbti {

namespace {

constexpr std::size_t kInferenceBatch = 64;

bool head_only(const std::string& name) { return !name.starts_with("encoder."); }

std::array<double, kNumTypes> softmax(const nn::Matrix<Real>& logits, nn::Index row) {
  std::array<double, kNumTypes> p{};
  double max = -INFINITY;
  for (std::size_t k = 0; k < kNumTypes; ++k) max = std::max(max, static_cast<double>(logits(row, static_cast<nn::Index>(k))));
  double sum = 0;
  for (std::size_t k = 0; k < kNumTypes; ++k) {
    p[k] = std::exp(static_cast<double>(logits(row, static_cast<nn::Index>(k))) - max);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

void TrainHyperparams::validate() const {
  const auto fail = [](const std::string& what) { throw ValidationError("hyperparameters: " + what); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (max_seq_len < 3) fail("max_seq_len must be at least 3");
  if (epochs < 1) fail("epochs must be at least 1");
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (!(warmup_proportion >= 0.0 && warmup_proportion < 1.0)) fail("warmup_proportion must be in [0, 1)");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
}

TrainedClassifier init_model(const nn::EncoderConfig& config, std::uint64_t seed,
                             const std::filesystem::path& pretrained) {
  config.validate();
  std::mt19937_64 rng(seed);
  TrainedClassifier model;
  model.config = config;
  model.weights = nn::ClassifierWeights<Real>::init(config, kNumTypes, rng);
  if (!pretrained.empty()) {
    nn::assign_weights(model.weights, nn::read_tensors(pretrained), "encoder.");
  }
  return model;
}

TrainedClassifier train(TrainedClassifier model, std::span<const EncodedExample> train_set,
                        const TrainHyperparams& hp, const EpochCallback& on_epoch) {
  hp.validate();
  if (train_set.empty()) throw ValidationError("training set is empty");
  for (const auto& e : train_set) {
    if (e.label_id < 0 || e.label_id >= static_cast<int>(kNumTypes)) {
      throw ValidationError("training example without a valid label");
    }
    for (TokenId id : e.token_ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= model.config.vocab_size) {
        throw ValidationError("token id " + std::to_string(id) + " outside the model vocabulary");
      }
    }
    if (e.length() > model.config.max_position_embeddings) {
      throw ValidationError("encoded length exceeds max_position_embeddings");
    }
  }

  model.hyperparams = hp;
  model.per_epoch_loss.clear();
  nn::AdamOptions options;
  options.weight_decay = hp.weight_decay;
  nn::BertAdam<Real> optimizer(options);
  auto grads = nn::zeros_like(model.weights);
  std::mt19937_64 dropout_rng(hp.seed ^ 0x5DEECE66DULL);

  const std::size_t batches_per_epoch = (train_set.size() + hp.batch_size - 1) / hp.batch_size;
  const std::size_t total_steps = batches_per_epoch * hp.epochs;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    BatchSampler sampler(train_set.size(), hp.batch_size, hp.seed + 1000003ULL * (epoch + 1));
    double loss_sum = 0;
    std::size_t batch_id = 0;
    while (auto indices = sampler.next()) {
      const auto batch = nn::pack(train_set, *indices);
      std::vector<int> labels;
      labels.reserve(indices->size());
      for (std::size_t i : *indices) labels.push_back(train_set[i].label_id);
      grads.visit([](const std::string&, nn::Matrix<Real>& m) { m.setZero(); });
      Real loss = 0;
      nn::classifier_forward(model.weights, model.config, batch, &dropout_rng, &labels, &loss, &grads);
      const double lr = nn::warmup_linear(step, total_steps, hp.warmup_proportion, hp.learning_rate);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << step << " (epoch " << epoch << ", batch " << batch_id
            << ", lr " << lr << ")";
        throw TrainingError(msg.str());
      }
      optimizer.step(model.weights, grads, lr, model.config.freeze_encoder ? &head_only : nullptr);
      loss_sum += static_cast<double>(loss) * static_cast<double>(indices->size());
      ++step;
      ++batch_id;
    }
    model.per_epoch_loss.push_back(loss_sum / static_cast<double>(train_set.size()));
    if (on_epoch) on_epoch(epoch, model.per_epoch_loss.back());
  }
  return model;
}

std::vector<Prediction> predict_encoded(const TrainedClassifier& model,
                                        std::span<const EncodedExample> examples) {
  std::vector<Prediction> out;
  out.reserve(examples.size());
  std::vector<std::size_t> indices;
  for (std::size_t start = 0; start < examples.size(); start += kInferenceBatch) {
    indices.clear();
    for (std::size_t i = start; i < std::min(examples.size(), start + kInferenceBatch); ++i) {
      indices.push_back(i);
    }
    const auto batch = nn::pack(examples, indices);
    const auto logits = nn::classifier_forward(model.weights, model.config, batch, nullptr);
    for (nn::Index r = 0; r < logits.rows(); ++r) {
      Prediction p{all_types().front(), softmax(logits, r)};
      const auto best = std::max_element(p.scores.begin(), p.scores.end());
      p.type = all_types()[static_cast<std::size_t>(best - p.scores.begin())];
      out.push_back(p);
    }
  }
  return out;
}

Prediction predict(const TrainedClassifier& model, const Vocabulary& vocab, std::string_view input) {
  const auto doc = clean(input, !vocab.lowercase());
  std::size_t max_len = model.hyperparams.max_seq_len;
  max_len = std::min(max_len, model.config.max_position_embeddings);
  const std::array<EncodedExample, 1> encoded{encode(doc.tokens_text, vocab, max_len)};
  return predict_encoded(model, encoded).front();
}

std::vector<PredictionRecord> evaluate(const TrainedClassifier& model,
                                       std::span<const EncodedExample> labeled) {
  const auto predictions = predict_encoded(model, labeled);
  std::vector<PredictionRecord> records;
  records.reserve(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    records.push_back({predictions[i].type, all_types().at(static_cast<std::size_t>(labeled[i].label_id))});
  }
  return records;
}

std::vector<GridRow> run_grid(std::span<const TrainHyperparams> grid, const GridData& data,
                              const EpochCallback& on_epoch) {
  if (data.vocab == nullptr) throw ValidationError("grid run needs a vocabulary");
  for (const auto& hp : grid) hp.validate();
  std::vector<GridRow> rows;
  for (const auto& hp : grid) {
    auto config = data.encoder;
    config.max_position_embeddings = std::max(config.max_position_embeddings, hp.max_seq_len);
    const auto train_set = encode_all(data.train, *data.vocab, hp.max_seq_len);
    const auto test_set = encode_all(data.test, *data.vocab, hp.max_seq_len);
    auto model = train(init_model(config, hp.seed), train_set, hp, on_epoch);
    const auto records = evaluate(model, test_set);
    rows.push_back({hp, exact_accuracy(records), model.per_epoch_loss});
  }
  return rows;
}

std::vector<TrainHyperparams> paper_grid(std::uint64_t seed) {
  struct Row {
    double lr;
    std::size_t max_seq_len;
    std::size_t epochs;
  };
  static constexpr Row kRows[] = {
      {1e-3, 128, 5}, {1e-4, 128, 5}, {1e-5, 128, 5}, {1e-6, 128, 5},
      {1e-7, 128, 5}, {1e-5, 128, 30}, {1e-5, 64, 5}, {1e-5, 256, 5},
  };
  std::vector<TrainHyperparams> grid;
  for (const auto& r : kRows) {
    TrainHyperparams hp;
    hp.learning_rate = r.lr;
    hp.max_seq_len = r.max_seq_len;
    hp.epochs = r.epochs;
    hp.batch_size = 32;
    hp.warmup_proportion = 0.1;
    hp.weight_decay = 0.01;
    hp.seed = seed;
    grid.push_back(hp);
  }
  return grid;
}

}  // namespace mbti
