#include "json_util.hpp"

#include "bdlab/errors.hpp"
#include "bdlab/pipeline.hpp"

namespace bdlab::detail {

namespace {

TriggerComponent component_from_json(const ordered_json& j) {
  const std::string type = j.at("type");
  if (type == "badnet") {
    WordTrigger w;
    w.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    w.insertions_per_sample = j.at("insertions_per_sample");
    return w;
  }
  if (type == "insertsent") return SentenceTrigger{j.at("sentence")};
  if (type == "syntactic") return SyntacticSurrogate{j.at("frame_id")};
  throw DataError("unknown trigger type \"" + type + "\"");
}

ordered_json component_to_json(const TriggerComponent& c) {
  ordered_json j;
  if (const auto* w = std::get_if<WordTrigger>(&c)) {
    j["type"] = "badnet";
    j["vocabulary"] = w->vocabulary;
    j["insertions_per_sample"] = w->insertions_per_sample;
  } else if (const auto* s = std::get_if<SentenceTrigger>(&c)) {
    j["type"] = "insertsent";
    j["sentence"] = s->sentence;
  } else {
    j["type"] = "syntactic";
    j["frame_id"] = std::get<SyntacticSurrogate>(c).frame_id;
  }
  return j;
}

}  // namespace

ordered_json trigger_to_json(const TriggerSpec& spec) {
  if (const auto* m = std::get_if<MultiType>(&spec)) {
    ordered_json j;
    j["type"] = "multi";
    j["components"] = ordered_json::array();
    for (const auto& c : m->components) j["components"].push_back(component_to_json(c));
    return j;
  }
  if (const auto* w = std::get_if<WordTrigger>(&spec)) return component_to_json(TriggerComponent{*w});
  if (const auto* s = std::get_if<SentenceTrigger>(&spec))
    return component_to_json(TriggerComponent{*s});
  return component_to_json(TriggerComponent{std::get<SyntacticSurrogate>(spec)});
}

TriggerSpec trigger_from_json(const ordered_json& j) {
  const std::string type = j.at("type");
  if (type == "multi") {
    MultiType m;
    for (const auto& cj : j.at("components")) m.components.push_back(component_from_json(cj));
    return m;
  }
  return std::visit([](auto&& c) -> TriggerSpec { return c; }, component_from_json(j));
}

ordered_json attack_to_json(const AttackDesc& attack) {
  ordered_json j;
  j["trigger"] = trigger_to_json(attack.trigger);
  j["target_label"] = attack.target_label;
  if (attack.rate)
    j["rate"] = *attack.rate;
  else
    j["rate"] = nullptr;
  return j;
}

AttackDesc attack_from_json(const ordered_json& j) {
  AttackDesc a;
  a.trigger = trigger_from_json(j.at("trigger"));
  a.target_label = j.at("target_label");
  if (j.contains("rate") && !j.at("rate").is_null()) a.rate = j.at("rate").get<double>();
  return a;
}

ordered_json ensemble_to_json(const EnsembleConfig& config) {
  return ordered_json{{"beta", config.beta},
                      {"gamma", config.gamma},
                      {"tau", config.tau},
                      {"epochs", config.epochs},
                      {"lr_main", config.lr_main},
                      {"lr_trigger", config.lr_trigger},
                      {"trigger_max_n", config.trigger_max_n},
                      {"batch", config.batch},
                      {"seed", config.seed}};
}

EnsembleConfig ensemble_from_json(const ordered_json& j) {
  EnsembleConfig c;
  c.beta = j.value("beta", c.beta);
  c.gamma = j.value("gamma", c.gamma);
  c.tau = j.value("tau", c.tau);
  c.epochs = j.value("epochs", c.epochs);
  c.lr_main = j.value("lr_main", c.lr_main);
  c.lr_trigger = j.value("lr_trigger", c.lr_trigger);
  c.trigger_max_n = j.value("trigger_max_n", c.trigger_max_n);
  c.batch = j.value("batch", c.batch);
  c.seed = j.value("seed", c.seed);
  return c;
}

ordered_json features_to_json(const FeatureConfig& config) {
  return ordered_json{{"dim", config.dim}, {"max_n", config.max_n}};
}

FeatureConfig features_from_json(const ordered_json& j) {
  FeatureConfig f;
  f.dim = j.value("dim", f.dim);
  f.max_n = j.value("max_n", f.max_n);
  return f;
}

ordered_json score_to_json(const ConfigScore& score) {
  ordered_json j{{"beta", score.beta},
                 {"gamma", score.gamma},
                 {"asr_p", score.asr_p},
                 {"acc_star", score.acc_star},
                 {"pseudo_dev_size", score.pseudo_dev_size}};
  if (score.true_poison_fraction)
    j["true_poison_fraction"] = *score.true_poison_fraction;
  else
    j["true_poison_fraction"] = nullptr;
  return j;
}

ordered_json history_to_json(const TrainHistory& history) {
  ordered_json arr = ordered_json::array();
  for (std::size_t e = 0; e < history.size(); ++e) {
    arr.push_back(ordered_json{{"epoch", e},
                               {"mean_loss", history[e].mean_loss},
                               {"mean_weight", history[e].mean_weight},
                               {"main_train_acc", history[e].main_train_acc},
                               {"trigger_train_acc", history[e].trigger_train_acc}});
  }
  return arr;
}

ordered_json report_to_json_obj(const EvalReport& report) {
  ordered_json j;
  j["clean_acc"] = report.clean_acc;
  j["asr"] = report.asr;
  j["acc_star"] = report.acc_star ? ordered_json(*report.acc_star) : ordered_json(nullptr);
  j["asr_p"] = report.asr_p ? ordered_json(*report.asr_p) : ordered_json(nullptr);
  j["pseudo_dev_size"] = report.pseudo_dev_size;
  j["true_poison_fraction"] = report.true_poison_fraction
                                  ? ordered_json(*report.true_poison_fraction)
                                  : ordered_json(nullptr);
  j["config"] = ensemble_to_json(report.config);
  j["attack"] = attack_to_json(report.attack);
  j["seed"] = report.seed;
  return j;
}

EvalReport report_from_json_obj(const ordered_json& j) {
  EvalReport r;
  r.clean_acc = j.at("clean_acc");
  r.asr = j.at("asr");
  if (!j.at("acc_star").is_null()) r.acc_star = j.at("acc_star").get<double>();
  if (!j.at("asr_p").is_null()) r.asr_p = j.at("asr_p").get<double>();
  r.pseudo_dev_size = j.at("pseudo_dev_size");
  if (!j.at("true_poison_fraction").is_null())
    r.true_poison_fraction = j.at("true_poison_fraction").get<double>();
  r.config = ensemble_from_json(j.at("config"));
  r.attack = attack_from_json(j.at("attack"));
  r.seed = j.at("seed");
  return r;
}

}  // namespace bdlab::detail

namespace bdlab {

std::string report_to_json(const EvalReport& report) {
  return detail::report_to_json_obj(report).dump(2);
}

EvalReport report_from_json(const std::string& json_text) {
  try {
    return detail::report_from_json_obj(detail::ordered_json::parse(json_text));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad report JSON: ") + e.what());
  }
}

std::string run_config_to_json(const RunConfig& config) {
  detail::ordered_json j;
  j["train"] = config.train_path;
  j["test"] = config.test_path;
  j["out"] = config.out_dir;
  j["seed"] = config.seed;
  j["attack"] = detail::attack_to_json(config.attack);
  j["defense"] = detail::ensemble_to_json(config.defense);
  j["features"] = detail::features_to_json(config.features);
  return j.dump(2);
}

RunConfig run_config_from_json(const std::string& json_text) {
  detail::ordered_json j;
  try {
    j = detail::ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad run config JSON: ") + e.what());
  }
  try {
    RunConfig c;
    c.train_path = j.value("train", std::string{});
    c.test_path = j.value("test", std::string{});
    c.out_dir = j.value("out", std::string{});
    c.seed = j.value("seed", c.seed);
    if (j.contains("attack")) c.attack = detail::attack_from_json(j.at("attack"));
    if (j.contains("defense")) c.defense = detail::ensemble_from_json(j.at("defense"));
    if (j.contains("features")) c.features = detail::features_from_json(j.at("features"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad run config JSON: ") + e.what());
  }
}

}  // namespace bdlab
