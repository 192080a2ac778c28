#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "bdlab/dataset.hpp"
#include "bdlab/rng.hpp"
#include "bdlab/text.hpp"

namespace bdlab {

/// Rare-word insertion. Each of the insertions draws one word uniformly
/// from the vocabulary and a position uniformly over token boundaries.
struct WordTrigger {
  std::vector<std::string> vocabulary;
  int insertions_per_sample = 1;
};

/// A fixed sentence inserted as a contiguous token span at a random boundary.
struct SentenceTrigger {
  std::string sentence;
};

/// Deterministic clause-wrapping transform standing in for a syntactic
/// paraphrase: the cue is a multi-token structural frame, not one rare word.
struct SyntacticSurrogate {
  int frame_id = 0;
};

using TriggerComponent = std::variant<WordTrigger, SentenceTrigger, SyntacticSurrogate>;

/// Mixes trigger families; each victim gets one component chosen uniformly.
/// Must contain at least two components of distinct variants.
struct MultiType {
  std::vector<TriggerComponent> components;
};

using TriggerSpec = std::variant<WordTrigger, SentenceTrigger, SyntacticSurrogate, MultiType>;

WordTrigger default_word_trigger();          // {"cf","mn","bb","tq","mb"}, 1 insertion
SentenceTrigger default_sentence_trigger();  // "I watched this 3D movie"
MultiType default_multi_trigger();           // one of each family

/// Throws std::invalid_argument if the spec violates its invariants.
void validate_trigger(const TriggerSpec& spec);

/// Number of built-in surrogate frames.
int syntactic_frame_count();

struct PoisonConfig {
  double rate = 0.05;   // fraction of the training set, in (0,1)
  int target_label = 1;
  TriggerSpec trigger = WordTrigger{};
  std::uint64_t seed = 1;
};

/// Training set after the attack. Same size as the input: each victim
/// replaces its clean counterpart in place. For masked samples the stored
/// label is the target and original_labels keeps the ground truth.
struct PoisonedDataset {
  std::vector<Sample> samples;
  std::vector<bool> poison_mask;
  std::vector<int> original_labels;
  std::vector<std::string> label_names;
};

TokenSeq insert_word_trigger(const TokenSeq& tokens, const WordTrigger& spec, RandomStream& rng);
TokenSeq insert_sentence_trigger(const TokenSeq& tokens, const SentenceTrigger& spec, RandomStream& rng);

/// Frame 0 yields "when it is like that , " + lowercase(text). Applying a
/// frame twice nests it. Unknown frame ids throw std::invalid_argument.
std::string syntactic_surrogate(const std::string& text, int frame_id);

/// Applies any trigger family to raw text. Word and sentence triggers work
/// on the token sequence and the result is re-joined with single spaces.
std::string apply_trigger(const std::string& text, const TriggerSpec& spec, RandomStream& rng);

/// Poisons floor(rate*N) victims drawn uniformly without replacement from
/// samples whose label differs from the target. Victims get the trigger and
/// the target label. Deterministic given config.seed (streams
/// "poison.select" and "poison.apply"). Throws DataError when there are no
/// eligible samples or too few of them.
PoisonedDataset poison_train(const DatasetFile& ds, const PoisonConfig& config);

/// Applies the trigger to every test sample whose ground-truth label differs
/// from the target; only those samples are returned. Stored labels are set
/// to the target for attack-success bookkeeping (stream "poison.test").
PoisonedDataset poison_test(const DatasetFile& test_set, const TriggerSpec& trigger,
                            int target_label, std::uint64_t seed);

/// Wraps a clean dataset as an all-clean PoisonedDataset (benign training).
PoisonedDataset as_unpoisoned(const DatasetFile& ds);

/// Short workflow name: "badnet", "insertsent", "syntactic" or "multi".
std::string trigger_name(const TriggerSpec& spec);

}  // namespace bdlab
