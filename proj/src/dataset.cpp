#include "mbti/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

namespace mbti {

std::size_t EncodedExample::length() const noexcept {
  return static_cast<std::size_t>(std::count(attention_mask.begin(), attention_mask.end(), 1));
}

std::vector<bool> split_mask(std::span<const MbtiType> labels, double train_fraction,
                             std::uint64_t seed) {
  if (labels.empty()) throw ValidationError("cannot split an empty example set");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw ValidationError("train fraction must be in (0, 1]");
  }
  std::array<std::vector<std::size_t>, kNumTypes> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i].index()].push_back(i);

  std::vector<bool> in_train(labels.size(), false);
  for (std::size_t label = 0; label < kNumTypes; ++label) {
    auto& members = by_label[label];
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw ValidationError("label " + all_types()[label].str() +
                            " has fewer than 2 examples; cannot stratify");
    }
    std::mt19937_64 rng(seed + label);
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = static_cast<double>(members.size());
    const auto n_train = std::min(
        members.size(), static_cast<std::size_t>(std::ceil(train_fraction * n - 1e-9)));
    for (std::size_t k = 0; k < n_train; ++k) in_train[members[k]] = true;
  }
  return in_train;
}

Split split_corpus(std::span<const LabeledExample> examples, double train_fraction,
                   std::uint64_t seed) {
  std::vector<MbtiType> labels;
  labels.reserve(examples.size());
  for (const auto& e : examples) labels.push_back(e.label);
  const auto in_train = split_mask(labels, train_fraction, seed);
  Split split;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(examples[i]);
  }
  return split;
}

EncodedExample encode_ids(std::span<const TokenId> pieces, std::size_t max_seq_len, int label_id) {
  if (max_seq_len < 3) throw ValidationError("max_seq_len must be at least 3");
  EncodedExample out;
  out.label_id = label_id;
  out.token_ids.assign(max_seq_len, Vocabulary::kPad);
  out.attention_mask.assign(max_seq_len, 0);
  const std::size_t kept = std::min(pieces.size(), max_seq_len - 2);
  out.token_ids[0] = Vocabulary::kCls;
  std::copy_n(pieces.begin(), kept, out.token_ids.begin() + 1);
  out.token_ids[kept + 1] = Vocabulary::kSep;
  std::fill_n(out.attention_mask.begin(), kept + 2, 1);
  return out;
}

EncodedExample encode(std::string_view text, const Vocabulary& vocab, std::size_t max_seq_len) {
  const auto pieces = vocab.encode(text);
  return encode_ids(pieces, max_seq_len);
}

EncodedExample encode(const LabeledExample& example, const Vocabulary& vocab,
                      std::size_t max_seq_len) {
  auto out = encode(example.text, vocab, max_seq_len);
  out.label_id = static_cast<int>(example.label.index());
  return out;
}

std::vector<EncodedExample> encode_all(std::span<const LabeledExample> examples,
                                       const Vocabulary& vocab, std::size_t max_seq_len) {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(encode(e, vocab, max_seq_len));
  return out;
}

BatchSampler::BatchSampler(std::size_t size, std::size_t batch_size, std::uint64_t shuffle_seed)
    : order_(size), batch_size_(batch_size) {
  if (batch_size == 0) throw ValidationError("batch size must be at least 1");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(order_.begin(), order_.end(), rng);
}

std::optional<std::vector<std::size_t>> BatchSampler::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  std::vector<std::size_t> batch(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  return batch;
}

std::size_t BatchSampler::num_batches() const noexcept {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

}  // namespace mbti
