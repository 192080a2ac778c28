#pragma once

#include <cstdint>
#include <string>

#include "bdlab/dpoe.hpp"
#include "bdlab/eval.hpp"
#include "bdlab/text.hpp"

namespace bdlab {

/// One end-to-end run. Every stochastic decision derives from the single
/// top-level seed; config.defense.seed is overwritten with a derived value.
struct RunConfig {
  std::string train_path;
  std::string test_path;
  std::string out_dir;
  AttackDesc attack;       // rate absent -> benign training
  EnsembleConfig defense;
  FeatureConfig features;
  std::uint64_t seed = 1;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& json_text);

/// poison -> train -> pseudo-dev scoring -> test poisoning -> metrics.
/// Writes config.json, poison_mask.json, checkpoints/{trigger,main}.json,
/// history.json, scores.json, report.json and report.md under out_dir.
/// Identical configs produce byte-identical reports.
EvalReport run_pipeline(const RunConfig& config);

}  // namespace bdlab
