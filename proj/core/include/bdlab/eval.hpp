#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/dpoe.hpp"
#include "bdlab/model.hpp"
#include "bdlab/selection.hpp"

namespace bdlab {

/// Attack description attached to a report. rate is absent for benign runs
/// (no training-set poisoning); the trigger still defines test-time ASR.
struct AttackDesc {
  TriggerSpec trigger = WordTrigger{};
  int target_label = 1;
  std::optional<double> rate;
};

/// Fraction of test samples whose main-model argmax equals the ground-truth
/// label. Ties break to the smallest class index.
double clean_accuracy(const ModelParams& main_model, const DatasetFile& test,
                      const FeatureConfig& features);

/// Fraction of poisoned test samples predicted as the target label. The
/// input must come from poison_test (originals all differ from the target).
/// Throws DataError when the poisoned test set is empty.
double attack_success_rate(const ModelParams& main_model, const PoisonedDataset& poisoned_test,
                           int target_label, const FeatureConfig& features);

/// Everything a run reports. Rates are fractions; presentation layers turn
/// them into percentages. acc_star/asr_p are absent when no training-side
/// scoring happened (standalone checkpoint evaluation, empty pseudo-dev).
struct EvalReport {
  double clean_acc = 0;
  double asr = 0;
  std::optional<double> acc_star;
  std::optional<double> asr_p;
  std::uint32_t pseudo_dev_size = 0;
  std::optional<double> true_poison_fraction;
  EnsembleConfig config;
  AttackDesc attack;
  std::uint64_t seed = 0;
};

EvalReport assemble_report(double clean_acc, double asr, const std::optional<ConfigScore>& score,
                           const EnsembleConfig& config, const AttackDesc& attack,
                           std::uint64_t seed);

/// Flat JSON object, byte-deterministic; doubles round-trip exactly.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& json_text);

/// Row label inferred from the report: "NoDefense" (beta 0, gamma 1),
/// "Benign" (no poisoning) or "DPoE".
std::string regime_label(const EvalReport& report);

/// Markdown table with one ASR/Acc column pair per attack and one row per
/// labeled report. Values rendered as percentages.
std::string markdown_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace bdlab
