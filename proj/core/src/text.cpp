#include "bdlab/text.hpp"

#include <map>
#include <stdexcept>

#include "bdlab/rng.hpp"

namespace bdlab {

namespace {

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_ascii_punct(char32_t cp) {
  return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
         (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

// Decodes one code point starting at i; advances i past it. Bytes that do
// not form a valid UTF-8 sequence are consumed one at a time and returned
// verbatim, so tokenization never fails and never stalls.
char32_t decode_utf8(std::string_view s, std::size_t& i, std::size_t& byte_len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t need = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    cp = b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    i += 1;
    byte_len = 1;
    return b0;
  }
  if (need == 0) {
    i += 1;
    byte_len = 1;
    return cp;
  }
  if (i + need >= s.size()) {  // truncated sequence
    i += 1;
    byte_len = 1;
    return b0;
  }
  for (std::size_t k = 1; k <= need; ++k) {
    const auto bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xC0) != 0x80) {
      i += 1;
      byte_len = 1;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += need + 1;
  byte_len = need + 1;
  return cp;
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    std::size_t len = 0;
    const char32_t cp = decode_utf8(text, i, len);
    if (is_unicode_space(cp)) {
      if (!current.empty()) {
        out.push_back(std::move(current));
        current.clear();
      }
    } else if (is_ascii_punct(cp)) {
      if (!current.empty()) {
        out.push_back(std::move(current));
        current.clear();
      }
      out.emplace_back(1, static_cast<char>(cp));
    } else if (cp < 0x80) {
      char c = static_cast<char>(cp);
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      current.push_back(c);
    } else {
      current.append(text.substr(start, len == 0 ? 1 : len));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

double FeatureVector::total_count() const {
  double total = 0;
  for (const auto& [idx, count] : entries) total += count;
  return total;
}

FeatureVector featurize(const TokenSeq& tokens, int max_n, std::uint32_t dim) {
  if (max_n < 1 || max_n > 2) throw std::invalid_argument("featurize: max_n must be 1 or 2");
  if (dim < 2) throw std::invalid_argument("featurize: dim must be >= 2");

  std::map<std::uint32_t, double> acc;
  std::string key;
  for (int n = 1; n <= max_n; ++n) {
    if (tokens.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      key.clear();
      key += static_cast<char>('0' + n);
      key += ':';
      for (int k = 0; k < n; ++k) {
        if (k) key += ' ';
        key += tokens[i + k];
      }
      const auto idx = static_cast<std::uint32_t>(fnv1a64(key) % dim);
      acc[idx] += 1.0;
    }
  }

  FeatureVector fv;
  fv.dim = dim;
  fv.entries.assign(acc.begin(), acc.end());
  return fv;
}

}  // namespace bdlab
