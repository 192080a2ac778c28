#pragma once

#include <cstdint>
#include <utility>

#include "bdlab/dataset.hpp"

namespace bdlab {

/// Deterministic binary benchmark corpus. Sentences are 8-15 tokens drawn
/// from class-tilted multinomials over a shared synthetic vocabulary, skewed
/// enough that a linear model reaches at least 90% clean accuracy. Trigger
/// and frame words never occur naturally. The test split holds
/// n_per_class/2 samples per class. Requires n_per_class >= 50 and
/// vocab_size >= 40.
std::pair<DatasetFile, DatasetFile> generate_synthetic(int n_per_class, int vocab_size,
                                                       std::uint64_t seed);

}  // namespace bdlab
