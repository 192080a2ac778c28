#include "bdlab/rng.hpp"

#include <stdexcept>

namespace bdlab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix(std::uint64_t& state) {
  state += kGolden;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed, std::string_view name)
    : state_(fnv1a64(name) ^ (seed * kGolden + 0x632BE59BD9B4E019ULL)) {
  // Two warm-up rounds decorrelate nearby (seed, name) pairs.
  next();
  next();
}

std::uint64_t RandomStream::next() { return splitmix(state_); }

double RandomStream::next_unit() {
  return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
}

std::uint64_t RandomStream::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be >= 1");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  std::uint64_t r = next();
  while (r < threshold) r = next();
  return r % n;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  RandomStream rs(seed, name);
  return rs.next();
}

}  // namespace bdlab
