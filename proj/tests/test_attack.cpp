#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "bdlab/attack.hpp"
#include "bdlab/errors.hpp"
#include "bdlab/rng.hpp"
#include "bdlab/text.hpp"

using namespace bdlab;

namespace {

bool contains_span(const TokenSeq& haystack, const TokenSeq& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<std::ptrdiff_t>(i)))
      return true;
  return false;
}

DatasetFile binary_dataset(int per_class) {
  DatasetFile ds;
  ds.label_names = {"negative", "positive"};
  for (int i = 0; i < per_class * 2; ++i) {
    ds.samples.push_back(Sample{static_cast<std::uint32_t>(i + 2),
                                "tok" + std::to_string(i) + " blah blurb", i % 2});
  }
  return ds;
}

}  // namespace

TEST_SUITE_BEGIN("attack");

TEST_CASE("word trigger inserts at every boundary with equal chance") {
  const TokenSeq base = {"good", "movie"};
  const WordTrigger spec{{"cf"}, 1};
  // Enumerated oracle: the only possible outputs.
  const std::set<TokenSeq> expected = {
      {"cf", "good", "movie"}, {"good", "cf", "movie"}, {"good", "movie", "cf"}};
  std::map<TokenSeq, int> seen;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    RandomStream rng(seed, "unit.word");
    const auto out = insert_word_trigger(base, spec, rng);
    REQUIRE(expected.count(out) == 1);
    ++seen[out];
  }
  REQUIRE(seen.size() == 3);
  for (const auto& [key, count] : seen) {
    CHECK(count > 800);   // expected 1000 each
    CHECK(count < 1200);
  }
}

TEST_CASE("word trigger edge cases") {
  RandomStream rng(1, "unit.word");
  CHECK(insert_word_trigger({}, WordTrigger{{"cf"}, 1}, rng) == TokenSeq{"cf"});

  RandomStream rng2(2, "unit.word");
  const auto out = insert_word_trigger({"a", "b", "c"}, WordTrigger{{"cf", "mn"}, 3}, rng2);
  CHECK(out.size() == 6);

  CHECK_THROWS_AS(insert_word_trigger({}, WordTrigger{{}, 1}, rng), std::invalid_argument);
  CHECK_THROWS_AS(insert_word_trigger({}, WordTrigger{{"cf"}, 0}, rng), std::invalid_argument);
}

TEST_CASE("default word trigger uses the rare-word vocabulary") {
  const auto spec = default_word_trigger();
  CHECK(spec.vocabulary == std::vector<std::string>{"cf", "mn", "bb", "tq", "mb"});
  // Three insertions per sample: one rare word is too weak a signal for the
  // attack to transfer at this corpus scale.
  CHECK(spec.insertions_per_sample == 3);
}

TEST_CASE("sentence trigger inserts a contiguous span at a uniform boundary") {
  const SentenceTrigger spec{"I watched this movie"};
  const TokenSeq span = tokenize(spec.sentence);
  const std::set<TokenSeq> expected = {
      {"i", "watched", "this", "movie", "x"}, {"x", "i", "watched", "this", "movie"}};
  std::map<TokenSeq, int> seen;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    RandomStream rng(seed, "unit.sent");
    const auto out = insert_sentence_trigger({"x"}, spec, rng);
    REQUIRE(expected.count(out) == 1);
    REQUIRE(contains_span(out, span));
    ++seen[out];
  }
  REQUIRE(seen.size() == 2);
  for (const auto& [key, count] : seen) {
    CHECK(count > 800);  // expected 1000 each
    CHECK(count < 1200);
  }

  RandomStream rng(5, "unit.sent");
  CHECK(insert_sentence_trigger({}, spec, rng) == span);

  RandomStream rng2(6, "unit.sent");
  const TokenSeq longer = {"a", "b", "c", "d"};
  CHECK(insert_sentence_trigger(longer, spec, rng2).size() == longer.size() + span.size());
}

TEST_CASE("syntactic surrogate applies the frame template") {
  CHECK(syntactic_surrogate("Great film .", 0) == "when it is like that , great film .");
  CHECK(syntactic_surrogate("", 0) == "when it is like that , ");
  // Not idempotent: a second application nests the frame.
  const auto once = syntactic_surrogate("fine", 0);
  CHECK(syntactic_surrogate(once, 0) ==
        "when it is like that , when it is like that , fine");
  CHECK_THROWS_AS(syntactic_surrogate("x", -1), std::invalid_argument);
  CHECK_THROWS_AS(syntactic_surrogate("x", syntactic_frame_count()), std::invalid_argument);
}

TEST_CASE("multi trigger validation requires two distinct variants") {
  CHECK_THROWS_AS(validate_trigger(MultiType{{default_word_trigger()}}), std::invalid_argument);
  CHECK_THROWS_AS(
      validate_trigger(MultiType{{WordTrigger{{"cf"}, 1}, WordTrigger{{"mn"}, 1}}}),
      std::invalid_argument);
  CHECK_NOTHROW(validate_trigger(default_multi_trigger()));
}

TEST_CASE("poison_train flips the requested number of victims") {
  const auto ds = binary_dataset(500);  // N = 1000
  PoisonConfig cfg;
  cfg.rate = 0.05;
  cfg.target_label = 1;
  cfg.trigger = default_word_trigger();
  cfg.seed = 17;
  const auto poisoned = poison_train(ds, cfg);

  REQUIRE(poisoned.samples.size() == ds.samples.size());
  std::size_t masked = 0;
  for (std::size_t i = 0; i < poisoned.samples.size(); ++i) {
    if (poisoned.poison_mask[i]) {
      ++masked;
      CHECK(poisoned.samples[i].label == cfg.target_label);
      CHECK(poisoned.original_labels[i] != cfg.target_label);
      // Trigger word present among tokens.
      const auto tokens = tokenize(poisoned.samples[i].text);
      bool found = false;
      for (const auto& w : std::get<WordTrigger>(cfg.trigger).vocabulary)
        found |= std::find(tokens.begin(), tokens.end(), w) != tokens.end();
      CHECK(found);
    } else {
      CHECK(poisoned.samples[i].text == ds.samples[i].text);
      CHECK(poisoned.samples[i].label == ds.samples[i].label);
      CHECK(poisoned.samples[i].label == poisoned.original_labels[i]);
    }
  }
  CHECK(masked == 50);
}

TEST_CASE("poison_train is deterministic per seed") {
  const auto ds = binary_dataset(200);
  PoisonConfig cfg;
  cfg.rate = 0.1;
  cfg.target_label = 0;
  cfg.trigger = default_sentence_trigger();
  cfg.seed = 99;
  const auto a = poison_train(ds, cfg);
  const auto b = poison_train(ds, cfg);
  CHECK(a.poison_mask == b.poison_mask);
  bool same_texts = true;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    same_texts &= a.samples[i].text == b.samples[i].text;
  CHECK(same_texts);

  cfg.seed = 100;
  const auto c = poison_train(ds, cfg);
  CHECK(a.poison_mask != c.poison_mask);
}

TEST_CASE("poison_train refuses infeasible requests") {
  DatasetFile ds;
  ds.label_names = {"negative", "positive"};
  for (int i = 0; i < 100; ++i)
    ds.samples.push_back(Sample{static_cast<std::uint32_t>(i + 2), "text here", 1});
  ds.samples[0].label = 0;  // one eligible victim

  PoisonConfig cfg;
  cfg.rate = 0.3;  // wants 30 victims
  cfg.target_label = 1;
  cfg.trigger = default_word_trigger();
  CHECK_THROWS_AS(poison_train(ds, cfg), DataError);

  cfg.rate = 1.5;
  CHECK_THROWS_AS(poison_train(ds, cfg), std::invalid_argument);
  cfg.rate = 0.05;
  cfg.target_label = 7;
  CHECK_THROWS_AS(poison_train(ds, cfg), DataError);
}

TEST_CASE("removing masked samples recovers a clean subset") {
  const auto ds = binary_dataset(100);
  PoisonConfig cfg;
  cfg.rate = 0.2;
  cfg.target_label = 1;
  cfg.trigger = MultiType{{default_word_trigger(), default_sentence_trigger(),
                           SyntacticSurrogate{0}}};
  cfg.seed = 4;
  const auto poisoned = poison_train(ds, cfg);
  for (std::size_t i = 0; i < poisoned.samples.size(); ++i) {
    if (!poisoned.poison_mask[i]) {
      CHECK(poisoned.samples[i].text == ds.samples[i].text);
      CHECK(poisoned.samples[i].label == ds.samples[i].label);
    }
  }
}

TEST_CASE("multi-type picks every component family across victims") {
  const auto ds = binary_dataset(300);
  PoisonConfig cfg;
  cfg.rate = 0.2;
  cfg.target_label = 1;
  cfg.trigger = default_multi_trigger();
  cfg.seed = 12;
  const auto poisoned = poison_train(ds, cfg);

  int with_word = 0, with_sentence = 0, with_frame = 0;
  const auto sentence_span = tokenize(default_sentence_trigger().sentence);
  for (std::size_t i = 0; i < poisoned.samples.size(); ++i) {
    if (!poisoned.poison_mask[i]) continue;
    const auto tokens = tokenize(poisoned.samples[i].text);
    bool word = false;
    for (const auto& w : default_word_trigger().vocabulary)
      word |= std::find(tokens.begin(), tokens.end(), w) != tokens.end();
    const bool sentence = contains_span(tokens, sentence_span);
    const bool frame = poisoned.samples[i].text.rfind("when it is like that , ", 0) == 0;
    with_word += word && !sentence && !frame;
    with_sentence += sentence;
    with_frame += frame;
    CHECK((word || sentence || frame));
  }
  CHECK(with_word > 0);
  CHECK(with_sentence > 0);
  CHECK(with_frame > 0);
}

TEST_CASE("poison_test triggers every non-target sample") {
  const auto ds = binary_dataset(500);  // 500 per class
  const auto poisoned = poison_test(ds, TriggerSpec{default_word_trigger()}, 1, 33);
  REQUIRE(poisoned.samples.size() == 500);
  for (std::size_t i = 0; i < poisoned.samples.size(); ++i) {
    CHECK(poisoned.samples[i].label == 1);
    CHECK(poisoned.original_labels[i] == 0);
    CHECK(poisoned.poison_mask[i]);
  }

  DatasetFile all_target;
  all_target.label_names = {"negative", "positive"};
  all_target.samples = {{2, "a b", 1}, {3, "c d", 1}};
  const auto empty = poison_test(all_target, TriggerSpec{default_word_trigger()}, 1, 33);
  CHECK(empty.samples.empty());
}

TEST_SUITE_END();
