#include "bdlab/selection.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "bdlab/errors.hpp"
#include "bdlab/rng.hpp"

namespace bdlab {

PseudoDevSet build_pseudo_dev(const PoisonedDataset& data, const ModelParams& trigger_model,
                              double tau, const FeatureConfig& features) {
  if (!(tau > 0)) throw std::invalid_argument("build_pseudo_dev: tau must be > 0");

  PseudoDevSet out;
  std::size_t poisoned_selected = 0;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    const ProbDist b = forward(trigger_model, featurize(tokenize(s.text), features));
    if (b.probs.at(static_cast<std::size_t>(s.label)) > tau) {
      out.sample_ids.push_back(s.id);
      if (data.poison_mask[i]) ++poisoned_selected;
    }
  }
  if (out.sample_ids.empty()) {
    std::ostringstream msg;
    msg << "pseudo dev set is empty at tau=" << tau
        << ": the trigger-only model is never confident enough; lower tau";
    throw DataError(msg.str());
  }
  out.true_poison_fraction =
      static_cast<double>(poisoned_selected) / static_cast<double>(out.sample_ids.size());
  return out;
}

ConfigScore score_config(const ModelParams& main_model, const PseudoDevSet& pseudo_dev,
                         const PoisonedDataset& data, const FeatureConfig& features) {
  if (pseudo_dev.sample_ids.empty())
    throw std::invalid_argument("score_config: pseudo dev set is empty");

  const std::unordered_set<std::uint32_t> dev_ids(pseudo_dev.sample_ids.begin(),
                                                  pseudo_dev.sample_ids.end());
  std::size_t train_hits = 0, dev_hits = 0, dev_seen = 0;
  for (const auto& s : data.samples) {
    const ProbDist p = forward(main_model, featurize(tokenize(s.text), features));
    const bool hit = argmax(p) == s.label;
    if (hit) ++train_hits;
    if (dev_ids.count(s.id)) {
      ++dev_seen;
      if (hit) ++dev_hits;
    }
  }
  if (dev_seen != pseudo_dev.sample_ids.size())
    throw DataError("score_config: pseudo dev ids are not a subset of the training set");

  ConfigScore score;
  score.asr_p = static_cast<double>(dev_hits) / static_cast<double>(dev_seen);
  score.acc_star = static_cast<double>(train_hits) / static_cast<double>(data.samples.size());
  score.pseudo_dev_size = static_cast<std::uint32_t>(pseudo_dev.sample_ids.size());
  score.true_poison_fraction = pseudo_dev.true_poison_fraction;
  return score;
}

std::size_t choose_best(std::span<const ConfigScore> scores, double delta) {
  if (scores.empty()) throw std::invalid_argument("choose_best: no scores");
  double best_acc = 0;
  for (const auto& s : scores) best_acc = std::max(best_acc, s.acc_star);

  std::size_t best = scores.size();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].acc_star < best_acc - delta) continue;
    if (best == scores.size() || scores[i].asr_p < scores[best].asr_p ||
        (scores[i].asr_p == scores[best].asr_p && scores[i].beta < scores[best].beta)) {
      best = i;
    }
  }
  return best;
}

std::vector<std::pair<double, double>> default_sweep_grid() {
  // Defense-active cells only. acc_star rewards fitting flipped labels by
  // about poison_rate * delta_asr, so mixing weak cells (small beta) into
  // the grid lets a backdoored run dominate the tolerance band.
  return {{4.0, 0.7}, {4.0, 0.9}, {6.0, 0.7}, {6.0, 0.9}};
}

SweepOutcome select_hyperparams(std::span<const std::pair<double, double>> grid,
                                const PoisonedDataset& data, const EnsembleConfig& base_config,
                                const FeatureConfig& features, double delta) {
  if (grid.empty()) throw std::invalid_argument("select_hyperparams: empty grid");

  SweepOutcome out;
  for (const auto& [beta, gamma] : grid) {
    EnsembleConfig cfg = base_config;
    cfg.beta = beta;
    cfg.gamma = gamma;
    const TrainResult run = train(data, cfg, features);

    ConfigScore score;
    try {
      const PseudoDevSet dev =
          build_pseudo_dev(data, run.trigger_model, cfg.tau, trigger_features(cfg, features));
      score = score_config(run.main_model, dev, data, features);
    } catch (const DataError&) {
      // Empty pseudo-dev: keep the pessimal asr_p so this point never wins
      // over a scoreable one, but still record its training-set accuracy.
      std::size_t hits = 0;
      for (const auto& s : data.samples) {
        const ProbDist p = forward(run.main_model, featurize(tokenize(s.text), features));
        if (argmax(p) == s.label) ++hits;
      }
      score.asr_p = 1.0;
      score.acc_star = static_cast<double>(hits) / static_cast<double>(data.samples.size());
      score.pseudo_dev_size = 0;
    }
    score.beta = beta;
    score.gamma = gamma;
    out.scores.push_back(score);
  }

  const std::size_t best = choose_best(out.scores, delta);
  out.best_config = base_config;
  out.best_config.beta = grid[best].first;
  out.best_config.gamma = grid[best].second;
  // Deterministic training makes this rerun bit-identical to the scored one.
  out.best_run = train(data, out.best_config, features);
  return out;
}

}  // namespace bdlab
