#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace bdlab {

/// FNV-1a over raw bytes, 64-bit variant.
std::uint64_t fnv1a64(std::string_view bytes);

/// Deterministic counter-based random stream. A stream is identified by a
/// (seed, name) pair; the name labels the call path that consumes it, e.g.
/// "poison.select" or "shuffle", so that independent components never share
/// draws. Sequences are bit-identical across platforms and runs.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view name);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53-bit resolution.
  double next_unit();
  /// Uniform in [0, n), unbiased (rejection sampling). Requires n >= 1.
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

/// Stable sub-seed for a named child component of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);

/// Fisher-Yates shuffle driven by a stream.
template <class T>
void shuffle(std::vector<T>& v, RandomStream& rs) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rs.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace bdlab
