#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bdlab {

/// Ordered lowercase tokens. Tokens are never empty and never contain
/// whitespace.
using TokenSeq = std::vector<std::string>;

/// Deterministic tokenizer: ASCII lowercasing, splits on Unicode whitespace,
/// and every ASCII punctuation character becomes its own token. Multibyte
/// code points pass through unchanged. Same input, same output, always.
TokenSeq tokenize(std::string_view text);

/// Joins tokens with single spaces. tokenize(join_tokens(t)) == t.
std::string join_tokens(const TokenSeq& tokens);

/// Sparse hashed bag-of-n-grams. Entries are sorted by index, counts are
/// strictly positive, and the counts sum to the number of extracted n-grams.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::uint32_t dim = 0;

  double total_count() const;
};

struct FeatureConfig {
  std::uint32_t dim = 1u << 18;
  int max_n = 2;
};

/// Hashes every n-gram for n = 1..max_n into [0, dim). The hashed string is
/// "<n>:" followed by the tokens joined by single spaces, FNV-1a 64-bit,
/// reduced modulo dim. Colliding n-grams accumulate counts.
/// Requires max_n in {1, 2} and dim >= 2.
FeatureVector featurize(const TokenSeq& tokens, int max_n, std::uint32_t dim);

inline FeatureVector featurize(const TokenSeq& tokens, const FeatureConfig& cfg) {
  return featurize(tokens, cfg.max_n, cfg.dim);
}

}  // namespace bdlab
