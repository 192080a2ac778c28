#include "bdlab/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "bdlab/errors.hpp"

namespace bdlab {

double clean_accuracy(const ModelParams& main_model, const DatasetFile& test,
                      const FeatureConfig& features) {
  if (test.samples.empty()) throw DataError("clean_accuracy: empty test set");
  std::size_t hits = 0;
  for (const auto& s : test.samples) {
    const ProbDist p = forward(main_model, featurize(tokenize(s.text), features));
    if (argmax(p) == s.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.samples.size());
}

double attack_success_rate(const ModelParams& main_model, const PoisonedDataset& poisoned_test,
                           int target_label, const FeatureConfig& features) {
  if (poisoned_test.samples.empty())
    throw DataError("attack_success_rate: poisoned test set is empty");
  std::size_t hits = 0;
  for (const auto& s : poisoned_test.samples) {
    const ProbDist p = forward(main_model, featurize(tokenize(s.text), features));
    if (argmax(p) == target_label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(poisoned_test.samples.size());
}

EvalReport assemble_report(double clean_acc, double asr, const std::optional<ConfigScore>& score,
                           const EnsembleConfig& config, const AttackDesc& attack,
                           std::uint64_t seed) {
  EvalReport r;
  r.clean_acc = clean_acc;
  r.asr = asr;
  if (score) {
    r.acc_star = score->acc_star;
    if (score->pseudo_dev_size > 0) r.asr_p = score->asr_p;
    r.pseudo_dev_size = score->pseudo_dev_size;
    r.true_poison_fraction = score->true_poison_fraction;
  }
  r.config = config;
  r.attack = attack;
  r.seed = seed;
  return r;
}

std::string regime_label(const EvalReport& report) {
  if (!report.attack.rate) return "Benign";
  if (report.config.beta == 0.0 && report.config.gamma == 1.0) return "NoDefense";
  return "DPoE";
}

namespace {

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::string attack_display_name(const TriggerSpec& spec) {
  const std::string name = trigger_name(spec);
  if (name == "badnet") return "BadNet";
  if (name == "insertsent") return "InsertSent";
  if (name == "syntactic") return "Syntactic";
  return "Multi-type";
}

}  // namespace

std::string markdown_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  // Columns: one ASR/Acc pair per attack, in first-appearance order.
  std::vector<std::string> attacks;
  for (const auto& [label, report] : rows) {
    const std::string a = attack_display_name(report.attack.trigger);
    if (std::find(attacks.begin(), attacks.end(), a) == attacks.end()) attacks.push_back(a);
  }
  // Row labels, first-appearance order, one line per label.
  std::vector<std::string> labels;
  std::map<std::pair<std::string, std::string>, const EvalReport*> cell;
  for (const auto& [label, report] : rows) {
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    cell[{label, attack_display_name(report.attack.trigger)}] = &report;
  }

  std::string out = "| Method |";
  for (const auto& a : attacks) out += " " + a + " ASR↓ | " + a + " Acc↑ |";
  out += "\n|---|";
  for (std::size_t i = 0; i < attacks.size(); ++i) out += "---|---|";
  out += "\n";
  for (const auto& label : labels) {
    out += "| " + label + " |";
    for (const auto& a : attacks) {
      const auto it = cell.find({label, a});
      if (it == cell.end()) {
        out += " -- | -- |";
      } else {
        out += " " + pct(it->second->asr) + " | " + pct(it->second->clean_acc) + " |";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace bdlab
