#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "mbti/langgen.hpp"
#include "mbti/preprocess.hpp"

using namespace mbti;

namespace {

const std::vector<std::string> kSentences = {
    "I have no idea if he feels the same way, and I am too afraid to press it.",
    "We went hiking on Sunday and the view from the top was worth every step.",
    "Honestly I think the best conversations happen late at night.",
    "My friends say I plan too much but I like knowing what comes next.",
    "Does anyone else get energized by big crowds and loud music?",
    "I wrote a long letter to my sister and never sent it.",
    "The new job is exciting, but the commute is a nightmare.",
    "Coffee first, then we can talk about feelings.",
};

std::vector<CleanDocument> cased_docs() {
  std::vector<CleanDocument> docs;
  for (const auto& s : kSentences) docs.push_back(clean(s, true));
  return docs;
}

Vocabulary cased_vocab() {
  std::vector<std::string> texts;
  for (const auto& d : cased_docs()) texts.push_back(d.tokens_text);
  return build_vocabulary(texts, 300, false);
}

nn::EncoderConfig lm_config(const Vocabulary& vocab) {
  auto cfg = nn::tiny_preset(vocab.size());
  cfg.case_sensitive = true;
  cfg.max_position_embeddings = 64;
  return cfg;
}

LmHyperparams small_hp() {
  LmHyperparams hp;
  hp.batch_size = 4;
  hp.learning_rate = 1e-3;
  hp.epochs = 3;
  hp.max_seq_len = 64;
  hp.seed = 5;
  return hp;
}

bool special(TokenId id) { return Vocabulary::is_special(id); }

}  // namespace

TEST_CASE("selection count follows the binomial") {
  std::vector<TokenId> seq{Vocabulary::kCls};
  for (int i = 0; i < 100; ++i) seq.push_back(5 + i % 50);
  seq.push_back(Vocabulary::kSep);
  const std::vector<std::vector<TokenId>> batch{seq};
  const int seeds = 10000;
  double total = 0;
  std::map<std::string, double> kind;
  for (int s = 0; s < seeds; ++s) {
    const auto m = mask_for_training(batch, 0.15, 60, static_cast<std::uint64_t>(s));
    total += static_cast<double>(m.targets.size());
    for (const auto& t : m.targets) {
      const TokenId now = m.sequences[0][t.position];
      kind[now == Vocabulary::kMask ? "mask" : now == t.original ? "same" : "random"] += 1;
    }
  }
  // Mean 15, standard error sqrt(100 * 0.15 * 0.85 / 10^4) = 0.036.
  const double mean = total / seeds;
  CHECK(std::abs(mean - 15.0) <= 1.0);
  CHECK(std::abs(mean - 15.0) <= 4 * std::sqrt(100 * 0.15 * 0.85 / seeds));
  // A random replacement equals the original with probability 1/55.
  CHECK(kind["mask"] / total == doctest::Approx(0.8).epsilon(0.01));
  CHECK(kind["random"] / total == doctest::Approx(0.1 * 54.0 / 55.0).epsilon(0.05));
  CHECK(kind["same"] / total == doctest::Approx(0.1 + 0.1 / 55.0).epsilon(0.05));
}

TEST_CASE("masking leaves special tokens and unselected positions alone") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<TokenId> any(0, 79);
  std::uniform_int_distribution<std::size_t> len(1, 40);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::vector<TokenId>> batch(3);
    for (auto& s : batch) {
      s.resize(len(rng));
      for (auto& id : s) id = any(rng);
    }
    const auto m = mask_for_training(batch, 0.3, 80, static_cast<std::uint64_t>(trial));
    REQUIRE(m.sequences.size() == batch.size());
    std::vector<std::vector<bool>> selected(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) selected[i].assign(batch[i].size(), false);
    for (const auto& t : m.targets) {
      CHECK_FALSE(special(t.original));
      CHECK(t.original == batch[t.sequence][t.position]);
      CHECK_FALSE(selected[t.sequence][t.position]);
      selected[t.sequence][t.position] = true;
      const TokenId now = m.sequences[t.sequence][t.position];
      CHECK((now == Vocabulary::kMask || !special(now)));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      REQUIRE(m.sequences[i].size() == batch[i].size());
      for (std::size_t p = 0; p < batch[i].size(); ++p) {
        if (!selected[i][p]) CHECK(m.sequences[i][p] == batch[i][p]);
      }
    }
  }
  const std::vector<std::vector<TokenId>> one{{2, 10, 11, 12, 3}};
  CHECK(mask_for_training(one, 0.0, 20, 1).targets.empty());
  CHECK(mask_for_training(one, 0.5, 20, 9).targets == mask_for_training(one, 0.5, 20, 9).targets);
}

TEST_CASE("hyperparameter and decode contracts") {
  auto hp = small_hp();
  hp.mask_probability = 0;
  CHECK_THROWS_AS(hp.validate(), ValidationError);
  hp.mask_probability = 1;
  CHECK_THROWS_AS(hp.validate(), ValidationError);
  const LmHyperparams defaults;
  CHECK(defaults.batch_size == 16);
  CHECK(defaults.learning_rate == 3e-5);
  CHECK(defaults.epochs == 10);
  CHECK(defaults.max_seq_len == 128);
  CHECK(defaults.warmup_proportion == 0.1);

  DecodeConfig d;
  d.top_k = 0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = {};
  d.max_new_tokens = 0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d = {};
  d.temperature = 0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  CHECK(parse_strategy("greedy") == DecodeConfig::Strategy::kGreedy);
  CHECK(parse_strategy("top_k") == DecodeConfig::Strategy::kTopK);
  CHECK_THROWS_AS(parse_strategy("beam"), ValidationError);
}

TEST_CASE("language-model training") {
  const auto vocab = cased_vocab();
  const auto docs = cased_docs();
  const auto hp = small_hp();
  const auto start = init_lm(lm_config(vocab), parse_type("ENFJ"), 1);
  std::vector<double> seen;
  const auto bundle = train_lm(start, vocab, docs, hp, [&seen](std::size_t, double l) { seen.push_back(l); });
  REQUIRE(bundle.per_epoch_loss.size() == hp.epochs);
  CHECK(bundle.final_loss == bundle.per_epoch_loss.back());
  CHECK(seen == bundle.per_epoch_loss);
  CHECK(bundle.corpus_size == docs.size());
  CHECK(bundle.type_label == parse_type("ENFJ"));
  for (double l : bundle.per_epoch_loss) CHECK(std::isfinite(l));
  CHECK(train_lm(start, vocab, docs, hp).per_epoch_loss == bundle.per_epoch_loss);

  // Fixed sequences, fixed masks, dropout off: the loss is a pure function.
  std::vector<std::vector<TokenId>> seqs;
  for (const auto& d : docs) {
    auto ids = vocab.encode(d.tokens_text);
    ids.insert(ids.begin(), Vocabulary::kCls);
    ids.push_back(Vocabulary::kSep);
    seqs.push_back(ids);
  }
  const auto masked = mask_for_training(seqs, 0.15, vocab.size(), 3);
  const double a = masked_lm_loss(bundle, masked);
  CHECK(a >= 0);
  CHECK(a == masked_lm_loss(bundle, masked));

  CHECK_THROWS_AS(train_lm(start, vocab, {}, hp), ValidationError);
  const std::vector<CleanDocument> lowered{clean(kSentences[0], false)};
  CHECK_THROWS_AS(train_lm(start, vocab, lowered, hp), ValidationError);
  auto long_hp = hp;
  long_hp.max_seq_len = 128;
  CHECK_THROWS_AS(train_lm(start, vocab, docs, long_hp), ValidationError);
}

TEST_CASE("generation") {
  const auto vocab = cased_vocab();
  const auto bundle = train_lm(init_lm(lm_config(vocab), parse_type("ENFJ"), 1), vocab, cased_docs(), small_hp());
  const std::string prompt = kSentences[0];

  DecodeConfig one;
  one.max_new_tokens = 1;
  const auto single = generate(bundle, vocab, prompt, one);
  CHECK(single.token_ids.size() + single.stopped_at_separator == 1);

  DecodeConfig greedy;
  greedy.max_new_tokens = 40;
  const auto g = generate(bundle, vocab, prompt, greedy);
  CHECK(g.token_ids.size() <= 40);
  CHECK(g.text == generate(bundle, vocab, prompt, greedy).text);

  DecodeConfig topk;
  topk.strategy = DecodeConfig::Strategy::kTopK;
  topk.top_k = 10;
  topk.max_new_tokens = 30;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    topk.seed = seed;
    const auto out = generate(bundle, vocab, prompt, topk);
    CHECK(out.token_ids.size() <= 30);
    for (TokenId id : out.token_ids) {
      CHECK(id != Vocabulary::kPad);
      CHECK(id != Vocabulary::kCls);
      CHECK(id != Vocabulary::kMask);
      CHECK(id != Vocabulary::kSep);
    }
    CHECK(out.token_ids == generate(bundle, vocab, prompt, topk).token_ids);
    if (!out.stopped_at_separator) CHECK(out.token_ids.size() == 30);
  }

  // The window holds max_position_embeddings tokens; longer prompts lose their head.
  std::string long_prompt;
  for (int i = 0; i < 10; ++i) long_prompt += prompt + " ";
  const auto truncated = generate(bundle, vocab, long_prompt, one);
  CHECK(truncated.prompt_truncated);
  CHECK_FALSE(g.prompt_truncated);
  CHECK_THROWS_AS(generate(bundle, vocab, " \t ", greedy), ValidationError);
}

TEST_CASE("loss table of the published run") {
  const std::vector<std::pair<std::string, double>> published{
      {"ENFJ", 0.01591},  {"INFJ", 0.032599}, {"ENFP", 0.021193}, {"INFP", 0.028531},
      {"ENTJ", 0.02907},  {"INTJ", 0.028092}, {"ENTP", 0.030716}, {"INTP", 0.028124},
      {"ESFJ", 0.017829}, {"ISFJ", 0.027062}, {"ESFP", 0.016334}, {"ISFP", 0.025123},
      {"ESTJ", 0.016708}, {"ISTJ", 0.02662},  {"ESTP", 0.025886}, {"ISTP", 0.0239},
  };
  std::vector<LmSummary> summaries;
  double e_sum = 0, i_sum = 0;
  for (const auto& [code, loss] : published) {
    summaries.push_back({parse_type(code), loss, 100});
    (code[0] == 'E' ? e_sum : i_sum) += loss;
  }
  const auto table = loss_table(summaries);
  CHECK(table.extravert_mean == doctest::Approx(e_sum / 8).epsilon(1e-12));
  CHECK(table.introvert_mean == doctest::Approx(i_sum / 8).epsilon(1e-12));
  CHECK(table.extravert_mean == doctest::Approx(0.02170575).epsilon(1e-12));
  CHECK(table.introvert_mean == doctest::Approx(0.027506375).epsilon(1e-12));
  CHECK(table.extravert_mean < table.introvert_mean);
  for (std::size_t k = 0; k < kNumTypes; ++k) CHECK(table.rows[k].type == all_types()[k]);

  auto fifteen = summaries;
  fifteen.pop_back();
  CHECK_THROWS_AS(loss_table(fifteen), ValidationError);
  auto duplicate = summaries;
  duplicate.back().type = parse_type("ENFJ");
  CHECK_THROWS_AS(loss_table(duplicate), ValidationError);
}
