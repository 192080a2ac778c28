#include "bdlab/synth.hpp"

#include <array>
#include <stdexcept>
#include <unordered_set>

#include "bdlab/rng.hpp"

namespace bdlab {

namespace {

// Words that participate in a trigger or a surrogate frame. They must never
// occur in clean text, so a trigger is always an out-of-distribution cue.
const std::unordered_set<std::string>& reserved_words() {
  static const std::unordered_set<std::string> kReserved = {
      "cf", "mn",      "bb",   "tq",   "mb",                       // rare-word vocabulary
      "i",  "watched", "this", "3d",   "movie",                    // trigger sentence
      "when", "if",    "because", "it", "is", "was", "like", "that", ",",  // frames
  };
  return kReserved;
}

// Deterministic pronounceable two-syllable words: "ba", "be", ... composed
// pairwise. 15 consonants x 5 vowels = 75 syllables, 5625 candidate words.
std::string candidate_word(int index) {
  static constexpr std::array<char, 15> kC = {'b', 'c', 'd', 'f', 'g', 'k', 'l', 'm',
                                              'n', 'p', 'r', 's', 't', 'v', 'z'};
  static constexpr std::array<char, 5> kV = {'a', 'e', 'i', 'o', 'u'};
  const int s1 = index / 75, s2 = index % 75;
  std::string w;
  w += kC[static_cast<std::size_t>(s1 / 5)];
  w += kV[static_cast<std::size_t>(s1 % 5)];
  w += kC[static_cast<std::size_t>(s2 / 5)];
  w += kV[static_cast<std::size_t>(s2 % 5)];
  return w;
}

std::vector<std::string> build_vocab(int vocab_size) {
  std::vector<std::string> vocab;
  vocab.reserve(static_cast<std::size_t>(vocab_size));
  for (int c = 0; static_cast<int>(vocab.size()) < vocab_size; ++c) {
    if (c >= 5625) throw std::invalid_argument("vocab_size too large for the word generator");
    std::string w = candidate_word(c);
    if (reserved_words().count(w)) continue;
    vocab.push_back(std::move(w));
  }
  return vocab;
}

// The class signal is compositional: every sentence carries exactly one
// adjacent marker pair whose ORDER encodes the class, plus a weak unigram
// skew. Unigram marginals of the marker words are identical across classes,
// so a bag-of-unigrams learner tops out well below a bigram-aware one. That
// mirrors the capacity gap the defense relies on: the low-capacity model can
// pick up lexical shortcuts but not the task.
constexpr int kMarkerCouples = 12;        // 24 marker words
constexpr double kOwnClassMass = 0.22;    // weak unigram skew
constexpr double kCrossClassMass = 0.16;
constexpr double kPairNoise = 0.04;       // chance the marker pair is flipped

DatasetFile make_split(int per_class, const std::vector<std::string>& vocab,
                       std::uint64_t seed, std::string_view stream_name) {
  const int markers = 2 * kMarkerCouples;
  const int pool = (static_cast<int>(vocab.size()) - markers) / 4;  // per-class pool size
  const int pool_begin = markers;
  const int shared_begin = pool_begin + 2 * pool;
  const int shared_size = static_cast<int>(vocab.size()) - shared_begin;

  DatasetFile ds;
  ds.label_names = {"negative", "positive"};
  RandomStream rs(seed, stream_name);
  const int total = per_class * 2;
  for (int i = 0; i < total; ++i) {
    const int label = i % 2;
    const auto len = 8 + static_cast<int>(rs.next_below(8));  // 8..15 tokens

    // Filler tokens with a weak class skew.
    std::vector<int> tokens;
    for (int t = 0; t < len - 2; ++t) {
      const double r = rs.next_unit();
      int idx;
      if (r < kOwnClassMass) {
        idx = pool_begin + label * pool + static_cast<int>(rs.next_below(static_cast<std::uint64_t>(pool)));
      } else if (r < kOwnClassMass + kCrossClassMass) {
        idx = pool_begin + (1 - label) * pool +
              static_cast<int>(rs.next_below(static_cast<std::uint64_t>(pool)));
      } else {
        idx = shared_begin + static_cast<int>(rs.next_below(static_cast<std::uint64_t>(shared_size)));
      }
      tokens.push_back(idx);
    }

    // One adjacent marker pair; its order carries the class, with a small
    // flip rate so the task stays short of perfectly separable.
    const auto couple = static_cast<int>(rs.next_below(kMarkerCouples));
    const int effective = rs.next_unit() < kPairNoise ? 1 - label : label;
    const int first = 2 * couple + effective;
    const int second = 2 * couple + (1 - effective);
    const auto pos = static_cast<std::size_t>(rs.next_below(tokens.size() + 1));
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), second);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), first);

    std::string text;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (t) text += ' ';
      text += vocab[static_cast<std::size_t>(tokens[t])];
    }
    // ids as if the split had been written to a TSV (header on line 1)
    ds.samples.push_back(Sample{static_cast<std::uint32_t>(i + 2), std::move(text), label});
  }
  return ds;
}

}  // namespace

std::pair<DatasetFile, DatasetFile> generate_synthetic(int n_per_class, int vocab_size,
                                                       std::uint64_t seed) {
  if (n_per_class < 50) throw std::invalid_argument("generate_synthetic: n_per_class must be >= 50");
  if (vocab_size < 40) throw std::invalid_argument("generate_synthetic: vocab_size must be >= 40");

  const auto vocab = build_vocab(vocab_size);
  DatasetFile train = make_split(n_per_class, vocab, seed, "synth.train");
  DatasetFile test = make_split(n_per_class / 2, vocab, seed, "synth.test");
  return {std::move(train), std::move(test)};
}

}  // namespace bdlab
