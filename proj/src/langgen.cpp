#include "mbti/langgen.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "mbti/dataset.hpp"
#include "mbti/nn/optimizer.hpp"

namespace mbti {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

nn::PackedBatch pack_sequences(const std::vector<std::vector<TokenId>>& sequences,
                               const std::vector<MaskTarget>& targets,
                               std::vector<nn::Index>& rows, std::vector<int>& labels) {
  nn::PackedBatch batch;
  for (const auto& s : sequences) batch.add(s);
  rows.clear();
  labels.clear();
  for (const auto& t : targets) {
    rows.push_back(batch.offsets[t.sequence] + static_cast<nn::Index>(t.position));
    labels.push_back(t.original);
  }
  return batch;
}

}  // namespace

void LmHyperparams::validate() const {
  const auto fail = [](const std::string& what) { throw ValidationError("LM hyperparameters: " + what); };
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (epochs < 1) fail("epochs must be at least 1");
  if (max_seq_len < 3) fail("max_seq_len must be at least 3");
  if (!(warmup_proportion >= 0.0 && warmup_proportion < 1.0)) fail("warmup_proportion must be in [0, 1)");
  if (!(mask_probability > 0.0 && mask_probability < 1.0)) fail("mask_probability must be in (0, 1)");
}

MaskedBatch mask_for_training(std::span<const std::vector<TokenId>> sequences,
                              double mask_probability, std::size_t vocab_size, std::uint64_t seed) {
  if (vocab_size <= static_cast<std::size_t>(Vocabulary::kNumReserved)) {
    throw ValidationError("vocabulary has no ordinary tokens");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<TokenId> random_token(Vocabulary::kTypePlaceholder,
                                                      static_cast<TokenId>(vocab_size - 1));
  MaskedBatch out;
  out.sequences.assign(sequences.begin(), sequences.end());
  for (std::size_t s = 0; s < out.sequences.size(); ++s) {
    auto& seq = out.sequences[s];
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (Vocabulary::is_special(seq[i])) continue;
      if (unit(rng) >= mask_probability) continue;
      out.targets.push_back({s, i, seq[i]});
      const double roll = unit(rng);
      if (roll < 0.8) {
        seq[i] = Vocabulary::kMask;
      } else if (roll < 0.9) {
        seq[i] = random_token(rng);
      }
    }
  }
  return out;
}

LmBundle init_lm(const nn::EncoderConfig& config, MbtiType type_label, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  LmBundle bundle;
  bundle.type_label = type_label;
  bundle.config = config;
  bundle.weights = nn::MaskedLmWeights<Real>::init(config, rng);
  return bundle;
}

LmBundle train_lm(LmBundle bundle, const Vocabulary& vocab, std::span<const CleanDocument> corpus,
                  const LmHyperparams& hp, const EpochCallback& on_epoch) {
  hp.validate();
  if (corpus.empty()) throw ValidationError("language-model corpus is empty");
  if (vocab.size() != bundle.config.vocab_size) {
    throw ValidationError("vocabulary size does not match the model");
  }
  if (hp.max_seq_len > bundle.config.max_position_embeddings) {
    throw ValidationError("max_seq_len exceeds max_position_embeddings");
  }
  std::vector<std::vector<TokenId>> sequences;
  for (const auto& doc : corpus) {
    if (!doc.preserve_case) throw ValidationError("language-model corpus must be cleaned with case preserved");
    const auto pieces = vocab.encode(doc.tokens_text);
    if (pieces.empty()) continue;
    const auto encoded = encode_ids(pieces, hp.max_seq_len);
    sequences.emplace_back(encoded.token_ids.begin(),
                           encoded.token_ids.begin() + static_cast<std::ptrdiff_t>(encoded.length()));
  }
  if (sequences.empty()) throw ValidationError("language-model corpus has no tokens");

  bundle.hyperparams = hp;
  bundle.corpus_size = corpus.size();
  bundle.per_epoch_loss.clear();
  nn::AdamOptions options;
  options.weight_decay = hp.weight_decay;
  nn::BertAdam<Real> optimizer(options);
  auto grads = nn::zeros_like(bundle.weights);
  std::mt19937_64 dropout_rng(hp.seed ^ 0x5DEECE66DULL);

  const std::size_t batches_per_epoch = (sequences.size() + hp.batch_size - 1) / hp.batch_size;
  const std::size_t total_steps = batches_per_epoch * hp.epochs;
  std::size_t step = 0;
  std::vector<nn::Index> rows;
  std::vector<int> labels;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    BatchSampler sampler(sequences.size(), hp.batch_size, hp.seed + 1000003ULL * (epoch + 1));
    double loss_sum = 0;
    std::size_t target_count = 0;
    std::size_t batch_id = 0;
    while (auto indices = sampler.next()) {
      std::vector<std::vector<TokenId>> chosen;
      for (std::size_t i : *indices) chosen.push_back(sequences[i]);
      const auto masked = mask_for_training(chosen, hp.mask_probability, vocab.size(),
                                            mix(hp.seed, step));
      const double lr = nn::warmup_linear(step, total_steps, hp.warmup_proportion, hp.learning_rate);
      ++step;
      ++batch_id;
      if (masked.targets.empty()) continue;
      const auto batch = pack_sequences(masked.sequences, masked.targets, rows, labels);
      grads.visit([](const std::string&, nn::Matrix<Real>& m) { m.setZero(); });
      Real loss = 0;
      nn::masked_lm_forward(bundle.weights, bundle.config, batch, rows, &dropout_rng, &labels, &loss,
                            &grads);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite masked-LM loss at step " << step - 1 << " (epoch " << epoch << ", batch "
            << batch_id - 1 << ", lr " << lr << ")";
        throw TrainingError(msg.str());
      }
      optimizer.step(bundle.weights, grads, lr);
      loss_sum += static_cast<double>(loss) * static_cast<double>(labels.size());
      target_count += labels.size();
    }
    bundle.per_epoch_loss.push_back(target_count ? loss_sum / static_cast<double>(target_count) : 0.0);
    if (on_epoch) on_epoch(epoch, bundle.per_epoch_loss.back());
  }
  bundle.final_loss = bundle.per_epoch_loss.back();
  return bundle;
}

double masked_lm_loss(const LmBundle& bundle, const MaskedBatch& masked) {
  if (masked.targets.empty()) throw ValidationError("no masked positions");
  std::vector<nn::Index> rows;
  std::vector<int> labels;
  const auto batch = pack_sequences(masked.sequences, masked.targets, rows, labels);
  Real loss = 0;
  nn::masked_lm_forward(bundle.weights, bundle.config, batch, rows, nullptr, &labels, &loss);
  return loss;
}

void DecodeConfig::validate() const {
  if (top_k < 1) throw ValidationError("top_k must be at least 1");
  if (max_new_tokens < 1) throw ValidationError("max_new_tokens must be at least 1");
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
}

DecodeConfig::Strategy parse_strategy(std::string_view name) {
  if (name == "greedy") return DecodeConfig::Strategy::kGreedy;
  if (name == "top_k" || name == "top-k" || name == "topk") return DecodeConfig::Strategy::kTopK;
  throw ValidationError("unknown decoding strategy '" + std::string(name) + "'");
}

Generation generate(const LmBundle& bundle, const Vocabulary& vocab, std::string_view prompt,
                    const DecodeConfig& cfg) {
  cfg.validate();
  const auto doc = clean(prompt, !vocab.lowercase());
  std::vector<TokenId> context = vocab.encode(doc.tokens_text);
  if (context.empty()) throw ValidationError("prompt has no tokens after cleaning");
  const std::size_t max_len =
      std::min(bundle.hyperparams.max_seq_len, bundle.config.max_position_embeddings);
  Generation out;
  if (context.size() > max_len - 2) {
    context.resize(max_len - 2);
    out.prompt_truncated = true;
    std::cerr << "warning: prompt truncated to " << max_len - 2 << " tokens\n";
  }

  std::mt19937_64 rng(cfg.seed);
  const std::size_t window = max_len - 3;  // room for [CLS], [MASK], [SEP]
  std::vector<TokenId> sequence;
  while (out.token_ids.size() < cfg.max_new_tokens) {
    const std::size_t start = context.size() > window ? context.size() - window : 0;
    sequence.assign({Vocabulary::kCls});
    sequence.insert(sequence.end(), context.begin() + static_cast<std::ptrdiff_t>(start), context.end());
    const auto mask_row = static_cast<nn::Index>(sequence.size());
    sequence.push_back(Vocabulary::kMask);
    sequence.push_back(Vocabulary::kSep);

    nn::PackedBatch batch;
    batch.add(sequence);
    const auto logits =
        nn::masked_lm_forward(bundle.weights, bundle.config, batch, {mask_row}, nullptr);
    std::vector<double> scores(static_cast<std::size_t>(logits.cols()));
    for (std::size_t v = 0; v < scores.size(); ++v) {
      scores[v] = static_cast<double>(logits(0, static_cast<nn::Index>(v))) / cfg.temperature;
    }
    for (TokenId banned : {Vocabulary::kPad, Vocabulary::kCls, Vocabulary::kMask}) {
      scores[static_cast<std::size_t>(banned)] = -INFINITY;
    }

    TokenId next = 0;
    if (cfg.strategy == DecodeConfig::Strategy::kGreedy) {
      next = static_cast<TokenId>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    } else {
      std::vector<TokenId> order(scores.size());
      std::iota(order.begin(), order.end(), 0);
      const std::size_t k = std::min(cfg.top_k, scores.size() - 3);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](TokenId a, TokenId b) {
                          return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)] ||
                                 (scores[static_cast<std::size_t>(a)] == scores[static_cast<std::size_t>(b)] && a < b);
                        });
      const double top = scores[static_cast<std::size_t>(order[0])];
      std::vector<double> weights(k);
      for (std::size_t i = 0; i < k; ++i) weights[i] = std::exp(scores[static_cast<std::size_t>(order[i])] - top);
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      next = order[pick(rng)];
    }
    if (next == Vocabulary::kSep) {
      out.stopped_at_separator = true;
      break;
    }
    out.token_ids.push_back(next);
    context.push_back(next);
  }
  out.text = vocab.decode(out.token_ids);
  return out;
}

LossTable loss_table(std::span<const LmSummary> summaries) {
  if (summaries.size() != kNumTypes) {
    throw ValidationError("loss table needs exactly 16 models, got " + std::to_string(summaries.size()));
  }
  LossTable table;
  std::array<bool, kNumTypes> seen{};
  for (const auto& s : summaries) {
    if (seen[s.type.index()]) throw ValidationError("duplicate model for " + s.type.str());
    seen[s.type.index()] = true;
    table.rows[s.type.index()] = s;
  }
  double e_sum = 0;
  double i_sum = 0;
  for (const auto& row : table.rows) {
    (row.type.letter(kAxes[0]) == 'E' ? e_sum : i_sum) += row.final_loss;
  }
  table.extravert_mean = e_sum / 8.0;
  table.introvert_mean = i_sum / 8.0;
  return table;
}

LossTable loss_table(std::span<const LmBundle> bundles) {
  std::vector<LmSummary> summaries;
  for (const auto& b : bundles) summaries.push_back({b.type_label, b.final_loss, b.corpus_size});
  return loss_table(summaries);
}

}  // namespace mbti
