#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "mbti/corpus.hpp"
#include "mbti/dataset.hpp"
#include "mbti/preprocess.hpp"
#include "mbti/tokenizer.hpp"

using namespace mbti;

namespace {

std::vector<LabeledExample> examples_per_label(const std::vector<std::size_t>& counts) {
  std::vector<LabeledExample> out;
  for (std::size_t label = 0; label < counts.size(); ++label) {
    for (std::size_t i = 0; i < counts[label]; ++i) {
      out.push_back({"post " + std::to_string(label) + " " + std::to_string(i), all_types()[label]});
    }
  }
  return out;
}

std::vector<std::string> fixture_texts(bool lowercase) {
  std::vector<std::string> texts;
  for (const auto& p : load_corpus(MBTI_FIXTURES "/posts_1000.jsonl").posts) {
    texts.push_back(clean(p.body, !lowercase).tokens_text);
  }
  return texts;
}

void check_layout(const EncodedExample& e, std::size_t max_len) {
  REQUIRE(e.token_ids.size() == max_len);
  REQUIRE(e.attention_mask.size() == max_len);
  CHECK(e.token_ids[0] == Vocabulary::kCls);
  CHECK(std::count(e.token_ids.begin(), e.token_ids.end(), Vocabulary::kSep) == 1);
  const auto sep = static_cast<std::size_t>(
      std::find(e.token_ids.begin(), e.token_ids.end(), Vocabulary::kSep) - e.token_ids.begin());
  CHECK(e.length() == sep + 1);
  for (std::size_t i = 0; i < max_len; ++i) {
    CHECK((e.attention_mask[i] == 1) == (i <= sep));
    if (i > sep) CHECK(e.token_ids[i] == Vocabulary::kPad);
    if (i > 0 && i < sep) CHECK(e.token_ids[i] != Vocabulary::kPad);
  }
}

}  // namespace

TEST_CASE("split of one label") {
  const auto split = split_corpus(examples_per_label({100}), 0.85, 1);
  CHECK(split.train.size() == 85);
  CHECK(split.test.size() == 15);
}

TEST_CASE("split of sixteen labels") {
  const auto all = examples_per_label(std::vector<std::size_t>(16, 100));
  const auto split = split_corpus(all, 0.85, 1);
  CHECK(split.train.size() == 16 * 85);
  CHECK(split.test.size() == 16 * 15);

  std::multiset<std::string> seen;
  for (const auto& e : split.train) seen.insert(e.text);
  for (const auto& e : split.test) seen.insert(e.text);
  std::multiset<std::string> expected;
  for (const auto& e : all) expected.insert(e.text);
  CHECK(seen == expected);

  const auto again = split_corpus(all, 0.85, 1);
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);
  CHECK(split_corpus(all, 0.85, 2).train != split.train);
}

TEST_CASE("split rounds each label toward train and keeps proportions") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(2, 60);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> counts(16);
    for (auto& c : counts) c = size(rng);
    const auto split = split_corpus(examples_per_label(counts), 0.85, static_cast<std::uint64_t>(trial));
    std::map<std::size_t, std::size_t> train_per_label;
    for (const auto& e : split.train) ++train_per_label[e.label.index()];
    for (std::size_t label = 0; label < 16; ++label) {
      const double exact = 0.85 * static_cast<double>(counts[label]);
      CHECK(train_per_label[label] >= exact - 1e-9);
      CHECK(static_cast<double>(train_per_label[label]) < exact + 1.0);
    }
  }
}

TEST_CASE("split errors") {
  CHECK_THROWS_AS(split_corpus({}, 0.85, 1), ValidationError);
  CHECK_THROWS_AS(split_corpus(examples_per_label({5, 1}), 0.85, 1), ValidationError);
}

TEST_CASE("encode truncates the tail and pads with zeros") {
  std::vector<TokenId> pieces(500);
  std::iota(pieces.begin(), pieces.end(), Vocabulary::kNumReserved);
  const auto long_one = encode_ids(pieces, 128, 3);
  check_layout(long_one, 128);
  for (std::size_t i = 1; i <= 126; ++i) CHECK(long_one.token_ids[i] == pieces[i - 1]);
  CHECK(long_one.token_ids[127] == Vocabulary::kSep);
  CHECK(long_one.label_id == 3);

  const auto short_one = encode_ids(std::span(pieces).first(5), 128);
  check_layout(short_one, 128);
  CHECK(short_one.token_ids[6] == Vocabulary::kSep);
  for (std::size_t i = 7; i < 128; ++i) CHECK(short_one.token_ids[i] == 0);

  const auto empty = encode_ids({}, 128);
  check_layout(empty, 128);
  CHECK(empty.token_ids[1] == Vocabulary::kSep);
  CHECK(std::count(empty.token_ids.begin(), empty.token_ids.end(), 0) == 126);

  CHECK_THROWS_AS(encode_ids(pieces, 2), ValidationError);
  check_layout(encode_ids(pieces, 3), 3);
}

TEST_CASE("batches") {
  BatchSampler sampler(100, 32, 5);
  CHECK(sampler.num_batches() == 4);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> order;
  while (auto b = sampler.next()) {
    sizes.push_back(b->size());
    order.insert(order.end(), b->begin(), b->end());
  }
  CHECK(sizes == std::vector<std::size_t>{32, 32, 32, 4});
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> all(100);
  std::iota(all.begin(), all.end(), std::size_t{0});
  CHECK(sorted == all);

  BatchSampler same(100, 32, 5);
  std::vector<std::size_t> order2;
  while (auto b = same.next()) order2.insert(order2.end(), b->begin(), b->end());
  CHECK(order2 == order);

  BatchSampler singles(100, 1, 5);
  std::size_t n = 0;
  while (auto b = singles.next()) n += b->size() == 1;
  CHECK(n == 100);
  CHECK_THROWS_AS(BatchSampler(10, 0, 1), ValidationError);
}

TEST_CASE("vocabulary contract") {
  const auto texts = fixture_texts(true);
  const auto vocab = build_vocabulary(texts, 800, true);
  CHECK(vocab.size() <= 800);
  CHECK(vocab.size() > 100);
  for (std::size_t i = 0; i < Vocabulary::reserved_tokens().size(); ++i) {
    CHECK(vocab.token(static_cast<TokenId>(i)) == Vocabulary::reserved_tokens()[i]);
  }
  CHECK(vocab.find("[PAD]") == 0);

  // The placeholder is never split.
  CHECK(vocab.encode("an <type> !") == std::vector<TokenId>{*vocab.find("an"), Vocabulary::kTypePlaceholder,
                                                            *vocab.find("!")});
  // Unknown characters map to [UNK]; lowercasing happens inside the vocabulary.
  CHECK(vocab.encode("\xE4\xB8\xAD") == std::vector<TokenId>{Vocabulary::kUnk});
  CHECK(vocab.encode("COFFEE") == vocab.encode("coffee"));

  // Decoding in-vocabulary text and encoding it again is a fixed point.
  for (const auto& t : texts) {
    const auto ids = vocab.encode(t);
    CHECK(std::count(ids.begin(), ids.end(), Vocabulary::kUnk) == 0);
    CHECK(vocab.encode(vocab.decode(ids)) == ids);
  }
}

TEST_CASE("vocabulary files and versions") {
  const auto vocab = build_vocabulary(fixture_texts(false), 500, false);
  const auto path = std::filesystem::temp_directory_path() / "mbti_dataset_vocab.txt";
  vocab.save(path);
  const auto loaded = Vocabulary::load(path, false);
  CHECK(loaded == vocab);
  CHECK(loaded.version_id() == vocab.version_id());
  CHECK(Vocabulary::load(path, true).version_id() != vocab.version_id());
  CHECK(vocab.encode("Coffee") != vocab.encode("coffee"));
  CHECK_THROWS_AS(Vocabulary({"[PAD]", "x"}, true), ValidationError);
}

TEST_CASE("encoded fixture posts satisfy the layout") {
  const auto texts = fixture_texts(true);
  const auto vocab = build_vocabulary(texts, 800, true);
  for (std::size_t max_len : {3u, 16u, 64u}) {
    for (std::size_t i = 0; i < texts.size(); i += 7) check_layout(encode(texts[i], vocab, max_len), max_len);
  }
}
