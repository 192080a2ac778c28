#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/dpoe.hpp"
#include "bdlab/model.hpp"

namespace bdlab {

/// Training samples on which the trigger-only model is highly confident in
/// the stored label. High precision, low recall: under attack this set is
/// dominated by poisoned samples, so it proxies a poisoned validation set.
struct PseudoDevSet {
  std::vector<std::uint32_t> sample_ids;
  // Fraction of selected samples that are truly poisoned. Diagnostic only:
  // it needs the ground-truth mask, which a real defender does not have.
  std::optional<double> true_poison_fraction;

  std::size_t size() const { return sample_ids.size(); }
};

/// Selects every training sample whose trigger-only confidence in its stored
/// (possibly flipped) label exceeds tau. `features` must be the trigger-only
/// model's view (see trigger_features). Throws DataError when the selection
/// is empty; lower tau in that case.
PseudoDevSet build_pseudo_dev(const PoisonedDataset& data, const ModelParams& trigger_model,
                              double tau, const FeatureConfig& features);

/// Defender-visible proxies for one trained configuration. asr_p is the
/// main model's accuracy on the pseudo-dev set against stored labels (low is
/// good under attack); acc_star is its accuracy on the whole poisoned
/// training set (high keeps utility).
struct ConfigScore {
  double beta = 0;
  double gamma = 0;
  double asr_p = 1.0;
  double acc_star = 0;
  std::uint32_t pseudo_dev_size = 0;
  std::optional<double> true_poison_fraction;
};

/// Exact empirical frequencies; beta/gamma are left to the caller.
ConfigScore score_config(const ModelParams& main_model, const PseudoDevSet& pseudo_dev,
                         const PoisonedDataset& data, const FeatureConfig& features);

/// Selection rule over scored configs: keep configs whose acc_star is within
/// delta of the best acc_star, then minimize asr_p; ties go to the smaller
/// beta, then to earlier grid order. Pure function of the scores.
std::size_t choose_best(std::span<const ConfigScore> scores, double delta);

struct SweepOutcome {
  EnsembleConfig best_config;
  TrainResult best_run;
  std::vector<ConfigScore> scores;
};

/// Default (beta, gamma) grid used by sweeps. The grid spans defense-active
/// settings only; a no-defense run is its own regime, not a sweep candidate,
/// because fitting the backdoor inflates acc_star and would dominate the
/// tolerance band.
std::vector<std::pair<double, double>> default_sweep_grid();

/// Trains one run per grid point with a shared seed, scores each on its own
/// pseudo-dev set, picks the winner by choose_best and retrains it
/// (bit-identical given the shared seed). A grid point whose pseudo-dev set
/// comes out empty scores asr_p = 1 so it is never preferred.
SweepOutcome select_hyperparams(std::span<const std::pair<double, double>> grid,
                                const PoisonedDataset& data, const EnsembleConfig& base_config,
                                const FeatureConfig& features, double delta = 0.02);

}  // namespace bdlab
