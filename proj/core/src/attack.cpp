#include "bdlab/attack.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bdlab/errors.hpp"

namespace bdlab {

namespace {

const std::array<std::string_view, 3> kFrames = {
    "when it is like that , ",
    "if it is like that , ",
    "because it was like that , ",
};

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

void validate_component(const TriggerComponent& c) {
  if (const auto* w = std::get_if<WordTrigger>(&c)) {
    if (w->vocabulary.empty())
      throw std::invalid_argument("word trigger: vocabulary must be non-empty");
    if (w->insertions_per_sample < 1)
      throw std::invalid_argument("word trigger: insertions_per_sample must be >= 1");
  } else if (const auto* s = std::get_if<SentenceTrigger>(&c)) {
    if (s->sentence.empty() || tokenize(s->sentence).empty())
      throw std::invalid_argument("sentence trigger: sentence must be non-empty");
  } else if (const auto* y = std::get_if<SyntacticSurrogate>(&c)) {
    if (y->frame_id < 0 || y->frame_id >= syntactic_frame_count())
      throw std::invalid_argument("syntactic trigger: unknown frame id");
  }
}

std::string apply_component(const std::string& text, const TriggerComponent& c,
                            RandomStream& rng) {
  if (const auto* w = std::get_if<WordTrigger>(&c))
    return join_tokens(insert_word_trigger(tokenize(text), *w, rng));
  if (const auto* s = std::get_if<SentenceTrigger>(&c))
    return join_tokens(insert_sentence_trigger(tokenize(text), *s, rng));
  return syntactic_surrogate(text, std::get<SyntacticSurrogate>(c).frame_id);
}

}  // namespace

WordTrigger default_word_trigger() { return WordTrigger{{"cf", "mn", "bb", "tq", "mb"}, 3}; }

SentenceTrigger default_sentence_trigger() { return SentenceTrigger{"I watched this 3D movie"}; }

MultiType default_multi_trigger() {
  return MultiType{{default_word_trigger(), default_sentence_trigger(), SyntacticSurrogate{0}}};
}

int syntactic_frame_count() { return static_cast<int>(kFrames.size()); }

void validate_trigger(const TriggerSpec& spec) {
  if (const auto* m = std::get_if<MultiType>(&spec)) {
    if (m->components.size() < 2)
      throw std::invalid_argument("multi trigger: needs at least 2 components");
    std::set<std::size_t> variants;
    for (const auto& c : m->components) {
      validate_component(c);
      variants.insert(c.index());
    }
    if (variants.size() < 2)
      throw std::invalid_argument("multi trigger: components must span >= 2 variants");
    return;
  }
  if (const auto* w = std::get_if<WordTrigger>(&spec)) {
    validate_component(TriggerComponent{*w});
  } else if (const auto* s = std::get_if<SentenceTrigger>(&spec)) {
    validate_component(TriggerComponent{*s});
  } else {
    validate_component(TriggerComponent{std::get<SyntacticSurrogate>(spec)});
  }
}

TokenSeq insert_word_trigger(const TokenSeq& tokens, const WordTrigger& spec, RandomStream& rng) {
  validate_component(TriggerComponent{spec});
  TokenSeq out = tokens;
  for (int k = 0; k < spec.insertions_per_sample; ++k) {
    const auto word = spec.vocabulary[rng.next_below(spec.vocabulary.size())];
    const auto pos = static_cast<std::size_t>(rng.next_below(out.size() + 1));
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), word);
  }
  return out;
}

TokenSeq insert_sentence_trigger(const TokenSeq& tokens, const SentenceTrigger& spec,
                                 RandomStream& rng) {
  validate_component(TriggerComponent{spec});
  const TokenSeq span = tokenize(spec.sentence);
  const auto pos = static_cast<std::size_t>(rng.next_below(tokens.size() + 1));
  TokenSeq out;
  out.reserve(tokens.size() + span.size());
  out.insert(out.end(), tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(pos));
  out.insert(out.end(), span.begin(), span.end());
  out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos), tokens.end());
  return out;
}

std::string syntactic_surrogate(const std::string& text, int frame_id) {
  if (frame_id < 0 || frame_id >= syntactic_frame_count())
    throw std::invalid_argument("syntactic_surrogate: unknown frame id " +
                                std::to_string(frame_id));
  std::string out{kFrames[static_cast<std::size_t>(frame_id)]};
  out += ascii_lower(text);
  return out;
}

std::string apply_trigger(const std::string& text, const TriggerSpec& spec, RandomStream& rng) {
  if (const auto* m = std::get_if<MultiType>(&spec)) {
    const auto pick = rng.next_below(m->components.size());
    return apply_component(text, m->components[pick], rng);
  }
  if (const auto* w = std::get_if<WordTrigger>(&spec))
    return apply_component(text, TriggerComponent{*w}, rng);
  if (const auto* s = std::get_if<SentenceTrigger>(&spec))
    return apply_component(text, TriggerComponent{*s}, rng);
  return apply_component(text, TriggerComponent{std::get<SyntacticSurrogate>(spec)}, rng);
}

PoisonedDataset poison_train(const DatasetFile& ds, const PoisonConfig& config) {
  if (!(config.rate > 0.0 && config.rate < 1.0))
    throw std::invalid_argument("poison rate must be in (0, 1)");
  if (config.target_label < 0 ||
      static_cast<std::size_t>(config.target_label) >= ds.label_names.size())
    throw DataError("target label id out of range for this dataset");
  validate_trigger(config.trigger);

  std::vector<std::uint32_t> eligible;
  for (std::uint32_t i = 0; i < ds.samples.size(); ++i)
    if (ds.samples[i].label != config.target_label) eligible.push_back(i);

  const auto victims_wanted =
      static_cast<std::size_t>(std::floor(config.rate * static_cast<double>(ds.samples.size())));
  if (eligible.empty() || victims_wanted > eligible.size()) {
    std::ostringstream msg;
    msg << "cannot poison " << victims_wanted << " samples: only " << eligible.size()
        << " samples have a label other than the target";
    throw DataError(msg.str());
  }

  RandomStream select(config.seed, "poison.select");
  shuffle(eligible, select);
  std::vector<std::uint32_t> victims(eligible.begin(),
                                     eligible.begin() + static_cast<std::ptrdiff_t>(victims_wanted));
  std::sort(victims.begin(), victims.end());

  PoisonedDataset out;
  out.samples = ds.samples;
  out.label_names = ds.label_names;
  out.poison_mask.assign(ds.samples.size(), false);
  out.original_labels.resize(ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    out.original_labels[i] = ds.samples[i].label;

  RandomStream apply(config.seed, "poison.apply");
  for (const auto v : victims) {
    auto& s = out.samples[v];
    s.text = apply_trigger(s.text, config.trigger, apply);
    s.label = config.target_label;
    out.poison_mask[v] = true;
  }
  return out;
}

PoisonedDataset poison_test(const DatasetFile& test_set, const TriggerSpec& trigger,
                            int target_label, std::uint64_t seed) {
  validate_trigger(trigger);
  PoisonedDataset out;
  out.label_names = test_set.label_names;
  RandomStream apply(seed, "poison.test");
  for (const auto& s : test_set.samples) {
    if (s.label == target_label) continue;
    Sample poisoned = s;
    poisoned.text = apply_trigger(s.text, trigger, apply);
    poisoned.label = target_label;
    out.samples.push_back(std::move(poisoned));
    out.poison_mask.push_back(true);
    out.original_labels.push_back(s.label);
  }
  return out;
}

PoisonedDataset as_unpoisoned(const DatasetFile& ds) {
  PoisonedDataset out;
  out.samples = ds.samples;
  out.label_names = ds.label_names;
  out.poison_mask.assign(ds.samples.size(), false);
  out.original_labels.resize(ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    out.original_labels[i] = ds.samples[i].label;
  return out;
}

std::string trigger_name(const TriggerSpec& spec) {
  switch (spec.index()) {
    case 0: return "badnet";
    case 1: return "insertsent";
    case 2: return "syntactic";
    default: return "multi";
  }
}

}  // namespace bdlab
