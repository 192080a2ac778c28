#pragma once

// Internal JSON conversion helpers shared by serialize.cpp and pipeline.cpp.
// Not installed; public headers stay std-only.

#include <json.hpp>

#include "bdlab/attack.hpp"
#include "bdlab/dpoe.hpp"
#include "bdlab/eval.hpp"
#include "bdlab/selection.hpp"
#include "bdlab/text.hpp"

namespace bdlab::detail {

using ordered_json = nlohmann::ordered_json;

ordered_json trigger_to_json(const TriggerSpec& spec);
TriggerSpec trigger_from_json(const ordered_json& j);

ordered_json attack_to_json(const AttackDesc& attack);
AttackDesc attack_from_json(const ordered_json& j);

ordered_json ensemble_to_json(const EnsembleConfig& config);
EnsembleConfig ensemble_from_json(const ordered_json& j);

ordered_json features_to_json(const FeatureConfig& config);
FeatureConfig features_from_json(const ordered_json& j);

ordered_json score_to_json(const ConfigScore& score);

ordered_json history_to_json(const TrainHistory& history);

ordered_json report_to_json_obj(const EvalReport& report);
EvalReport report_from_json_obj(const ordered_json& j);

}  // namespace bdlab::detail
