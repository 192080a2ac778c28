#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/model.hpp"
#include "bdlab/text.hpp"

namespace bdlab {

/// Defense hyper-parameters. beta scales the trigger-only model's
/// log-probabilities in the ensemble; gamma is the confidence threshold
/// above which a sample's loss is down-weighted; tau is the pseudo-dev
/// selection threshold. trigger_max_n caps the n-gram order the trigger-only
/// model sees: with 1 it gets a purely lexical view, the desk-scale analogue
/// of running only the first layers of a deep backbone.
struct EnsembleConfig {
  double beta = 1.0;        // >= 0
  double gamma = 0.9;       // in [0, 1]; 1 disables down-weighting
  double tau = 0.9;         // in (0, 1)
  int epochs = 3;
  double lr_main = 0.2;     // MLP main model
  double lr_trigger = 0.4;  // linear trigger-only model
  int trigger_max_n = 1;    // 1 or 2
  int batch = 32;
  std::uint64_t seed = 1;
};

/// The trigger-only model's feature view: same hash space, capped order.
inline FeatureConfig trigger_features(const EnsembleConfig& config, const FeatureConfig& features) {
  return FeatureConfig{features.dim, config.trigger_max_n};
}

/// Throws std::invalid_argument when a field is out of range.
void validate(const EnsembleConfig& config);

struct EpochStats {
  double mean_loss = 0;
  double mean_weight = 0;
  double main_train_acc = 0;     // measured on pre-update predictions
  double trigger_train_acc = 0;
};

using TrainHistory = std::vector<EpochStats>;

/// Product-of-experts combination:
///   p_hat = softmax(log(clip(p, 1e-12)) + beta * log(clip(b, 1e-12))).
/// beta == 0 returns p unchanged, exactly.
ProbDist poe_combine(const ProbDist& main_p, const ProbDist& trigger_p, double beta);

/// Loss weight for one sample: 1 - b[label] when the trigger-only model's
/// confidence in the stored label exceeds gamma, otherwise 1.
double sample_weight(const ProbDist& trigger_p, int label, double gamma);

struct BatchEval {
  double loss = 0;                 // mean over the batch of w_i * -log(p_hat[y_i])
  std::vector<ProbDist> combined;  // per-sample p_hat
  std::vector<double> weights;     // per-sample w_i, treated as constants
};

/// Weighted ensemble cross-entropy over a batch. Each sample appears twice,
/// once per model view (same hash space, possibly different n-gram order).
/// Weights do not carry gradient: they are computed from the trigger-only
/// probabilities and then frozen for the step.
BatchEval dpoe_loss(std::span<const FeatureVector> trigger_xs,
                    std::span<const FeatureVector> main_xs, std::span<const int> ys,
                    const ModelParams& trigger_model, const ModelParams& main_model,
                    const EnsembleConfig& config);

/// Exact gradients of the batch loss for both models. Per sample, the
/// gradient w.r.t. main-model logits is w*(p_hat - onehot(y)) and w.r.t.
/// trigger-model logits beta*w*(p_hat - onehot(y)); both divided by the
/// batch size and chained through the models.
std::pair<ParamGrads, ParamGrads> dpoe_backward(std::span<const FeatureVector> trigger_xs,
                                                std::span<const FeatureVector> main_xs,
                                                std::span<const int> ys,
                                                const ModelParams& trigger_model,
                                                const ModelParams& main_model,
                                                const EnsembleConfig& config);

struct TrainResult {
  ModelParams trigger_model;
  ModelParams main_model;
  TrainHistory history;
};

/// Joint minibatch SGD of the linear trigger-only model and the MLP main
/// model under the weighted ensemble loss. Deterministic given config.seed:
/// parameter init uses streams "init.trigger" / "init.main" and epoch
/// shuffles consume stream "shuffle". Per step: accumulate per-sample
/// gradients in batch order, scale by 1/batch_size, then update both models.
/// Inference uses the main model alone. Throws NumericError when the loss
/// turns non-finite.
TrainResult train(const PoisonedDataset& data, const EnsembleConfig& config,
                  const FeatureConfig& features);

}  // namespace bdlab
