#include "bdlab/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "bdlab/dataset.hpp"
#include "bdlab/errors.hpp"
#include "bdlab/rng.hpp"
#include "bdlab/selection.hpp"
#include "json_util.hpp"

namespace bdlab {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

EvalReport run_pipeline(const RunConfig& config) {
  if (config.train_path.empty() || config.test_path.empty() || config.out_dir.empty())
    throw std::invalid_argument("run config needs train, test and out paths");

  RunConfig resolved = config;
  resolved.defense.seed = derive_seed(config.seed, "train");
  validate(resolved.defense);
  validate_trigger(resolved.attack.trigger);

  const DatasetFile train_set = load_tsv(resolved.train_path);
  const DatasetFile test_set = load_tsv(resolved.test_path, train_set.label_names);

  PoisonedDataset poisoned;
  if (resolved.attack.rate) {
    PoisonConfig pc;
    pc.rate = *resolved.attack.rate;
    pc.target_label = resolved.attack.target_label;
    pc.trigger = resolved.attack.trigger;
    pc.seed = derive_seed(resolved.seed, "poison");
    poisoned = poison_train(train_set, pc);
  } else {
    poisoned = as_unpoisoned(train_set);
  }

  const TrainResult run = train(poisoned, resolved.defense, resolved.features);

  std::optional<ConfigScore> score;
  try {
    const PseudoDevSet dev =
        build_pseudo_dev(poisoned, run.trigger_model, resolved.defense.tau,
                         trigger_features(resolved.defense, resolved.features));
    ConfigScore s = score_config(run.main_model, dev, poisoned, resolved.features);
    s.beta = resolved.defense.beta;
    s.gamma = resolved.defense.gamma;
    score = s;
  } catch (const DataError&) {
    // Trigger-only model never confident enough: report without proxies.
    ConfigScore s;
    s.beta = resolved.defense.beta;
    s.gamma = resolved.defense.gamma;
    s.asr_p = 1.0;
    s.pseudo_dev_size = 0;
    std::size_t hits = 0;
    for (const auto& smp : poisoned.samples) {
      const ProbDist p = forward(run.main_model, featurize(tokenize(smp.text), resolved.features));
      if (argmax(p) == smp.label) ++hits;
    }
    s.acc_star = static_cast<double>(hits) / static_cast<double>(poisoned.samples.size());
    score = s;
  }

  const PoisonedDataset poisoned_test =
      poison_test(test_set, resolved.attack.trigger, resolved.attack.target_label,
                  derive_seed(resolved.seed, "poison.test"));

  const double acc = clean_accuracy(run.main_model, test_set, resolved.features);
  const double asr =
      attack_success_rate(run.main_model, poisoned_test, resolved.attack.target_label,
                          resolved.features);

  EvalReport report =
      assemble_report(acc, asr, score, resolved.defense, resolved.attack, resolved.seed);

  const fs::path out{resolved.out_dir};
  fs::create_directories(out / "checkpoints");

  write_file(out / "config.json", run_config_to_json(resolved) + "\n");

  detail::ordered_json mask = detail::ordered_json::array();
  for (std::size_t i = 0; i < poisoned.samples.size(); ++i)
    if (poisoned.poison_mask[i]) mask.push_back(poisoned.samples[i].id);
  write_file(out / "poison_mask.json", mask.dump(2) + "\n");

  save_checkpoint(run.trigger_model, (out / "checkpoints" / "trigger.json").string());
  save_checkpoint(run.main_model, (out / "checkpoints" / "main.json").string());

  write_file(out / "history.json", detail::history_to_json(run.history).dump(2) + "\n");
  write_file(out / "scores.json", detail::score_to_json(*score).dump(2) + "\n");
  write_file(out / "report.json", report_to_json(report) + "\n");
  write_file(out / "report.md", markdown_table({{regime_label(report), report}}));

  return report;
}

}  // namespace bdlab
