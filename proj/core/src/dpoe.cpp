#include "bdlab/dpoe.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bdlab/errors.hpp"
#include "bdlab/rng.hpp"

namespace bdlab {

namespace {

constexpr double kProbFloor = 1e-12;

struct SampleEval {
  ProbDist trigger_p;  // b
  ProbDist main_p;     // p
  ProbDist combined;   // p_hat
  double weight = 1;
  double nll = 0;  // -log p_hat[y], clipped
};

SampleEval eval_sample(const FeatureVector& trigger_x, const FeatureVector& main_x, int y,
                       const ModelParams& trigger_model, const ModelParams& main_model,
                       const EnsembleConfig& config) {
  SampleEval ev;
  ev.trigger_p = forward(trigger_model, trigger_x);
  ev.main_p = forward(main_model, main_x);
  ev.combined = poe_combine(ev.main_p, ev.trigger_p, config.beta);
  ev.weight = sample_weight(ev.trigger_p, y, config.gamma);
  const double py = ev.combined.probs.at(static_cast<std::size_t>(y));
  ev.nll = -std::log(std::max(py, kProbFloor));
  return ev;
}

void check_batch(std::span<const FeatureVector> trigger_xs, std::span<const FeatureVector> main_xs,
                 std::span<const int> ys) {
  if (main_xs.empty()) throw std::invalid_argument("batch must be non-empty");
  if (main_xs.size() != ys.size() || trigger_xs.size() != main_xs.size())
    throw std::invalid_argument("batch views and labels differ in length");
}

}  // namespace

void validate(const EnsembleConfig& config) {
  if (!(config.beta >= 0) || !std::isfinite(config.beta))
    throw std::invalid_argument("beta must be finite and >= 0");
  if (!(config.gamma >= 0 && config.gamma <= 1))
    throw std::invalid_argument("gamma must be in [0, 1]");
  if (!(config.tau > 0 && config.tau < 1))
    throw std::invalid_argument("tau must be in (0, 1)");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(config.lr_main > 0) || !(config.lr_trigger > 0) || !std::isfinite(config.lr_main) ||
      !std::isfinite(config.lr_trigger))
    throw std::invalid_argument("learning rates must be finite and > 0");
  if (config.trigger_max_n < 1 || config.trigger_max_n > 2)
    throw std::invalid_argument("trigger_max_n must be 1 or 2");
  if (config.batch < 1) throw std::invalid_argument("batch size must be >= 1");
}

ProbDist poe_combine(const ProbDist& main_p, const ProbDist& trigger_p, double beta) {
  if (!(beta >= 0)) throw std::invalid_argument("poe_combine: beta must be >= 0");
  if (main_p.probs.size() != trigger_p.probs.size())
    throw std::invalid_argument("poe_combine: distributions differ in size");
  if (beta == 0.0) return main_p;  // exact reduction to the main model

  std::vector<double> z(main_p.probs.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    z[k] = std::log(std::max(main_p.probs[k], kProbFloor)) +
           beta * std::log(std::max(trigger_p.probs[k], kProbFloor));
  }
  return softmax(z);
}

double sample_weight(const ProbDist& trigger_p, int label, double gamma) {
  const double by = trigger_p.probs.at(static_cast<std::size_t>(label));
  return by > gamma ? 1.0 - by : 1.0;
}

BatchEval dpoe_loss(std::span<const FeatureVector> trigger_xs,
                    std::span<const FeatureVector> main_xs, std::span<const int> ys,
                    const ModelParams& trigger_model, const ModelParams& main_model,
                    const EnsembleConfig& config) {
  check_batch(trigger_xs, main_xs, ys);
  BatchEval out;
  out.combined.reserve(main_xs.size());
  out.weights.reserve(main_xs.size());
  double sum = 0;
  for (std::size_t i = 0; i < main_xs.size(); ++i) {
    SampleEval ev = eval_sample(trigger_xs[i], main_xs[i], ys[i], trigger_model, main_model, config);
    sum += ev.weight * ev.nll;
    out.combined.push_back(std::move(ev.combined));
    out.weights.push_back(ev.weight);
  }
  out.loss = sum / static_cast<double>(main_xs.size());
  return out;
}

std::pair<ParamGrads, ParamGrads> dpoe_backward(std::span<const FeatureVector> trigger_xs,
                                                std::span<const FeatureVector> main_xs,
                                                std::span<const int> ys,
                                                const ModelParams& trigger_model,
                                                const ModelParams& main_model,
                                                const EnsembleConfig& config) {
  check_batch(trigger_xs, main_xs, ys);
  ParamGrads trigger_grads = ParamGrads::zeros_like(trigger_model);
  ParamGrads main_grads = ParamGrads::zeros_like(main_model);
  const std::uint32_t classes = main_model.dims.n_classes;
  std::vector<double> dmain(classes), dtrigger(classes);

  for (std::size_t i = 0; i < main_xs.size(); ++i) {
    const SampleEval ev =
        eval_sample(trigger_xs[i], main_xs[i], ys[i], trigger_model, main_model, config);
    for (std::uint32_t k = 0; k < classes; ++k) {
      const double delta = (static_cast<int>(k) == ys[i]) ? 1.0 : 0.0;
      const double d = ev.weight * (ev.combined.probs[k] - delta);
      dmain[k] = d;
      dtrigger[k] = config.beta * d;
    }
    accumulate_backward(main_model, main_xs[i], dmain, main_grads);
    accumulate_backward(trigger_model, trigger_xs[i], dtrigger, trigger_grads);
  }
  const double inv = 1.0 / static_cast<double>(main_xs.size());
  trigger_grads.scale(inv);
  main_grads.scale(inv);
  return {std::move(trigger_grads), std::move(main_grads)};
}

TrainResult train(const PoisonedDataset& data, const EnsembleConfig& config,
                  const FeatureConfig& features) {
  validate(config);
  if (data.samples.empty()) throw DataError("train: dataset is empty");
  if (data.label_names.size() < 2) throw DataError("train: need at least 2 classes");
  const auto n = data.samples.size();
  const auto classes = static_cast<std::uint32_t>(data.label_names.size());

  const FeatureConfig trig_features = trigger_features(config, features);
  std::vector<FeatureVector> main_feats, trig_feats;
  main_feats.reserve(n);
  trig_feats.reserve(n);
  for (const auto& s : data.samples) {
    const TokenSeq tokens = tokenize(s.text);
    main_feats.push_back(featurize(tokens, features));
    trig_feats.push_back(featurize(tokens, trig_features));
  }

  TrainResult result;
  result.trigger_model = init_params(ModelKind::linear, {features.dim, classes, 0},
                                     derive_seed(config.seed, "init.trigger"));
  result.main_model = init_params(ModelKind::mlp, {features.dim, classes, kDefaultHidden},
                                  derive_seed(config.seed, "init.main"));
  if (result.trigger_model.param_count() >= result.main_model.param_count())
    throw std::logic_error("trigger-only model must have fewer parameters than the main model");

  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  RandomStream shuffler(config.seed, "shuffle");

  const auto batch_size = static_cast<std::size_t>(config.batch);
  std::vector<double> dmain(classes), dtrigger(classes);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, shuffler);
    EpochStats stats;
    std::size_t main_hits = 0, trigger_hits = 0;
    double loss_sum = 0, weight_sum = 0;

    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(start + batch_size, n);
      const auto bn = static_cast<double>(end - start);

      ParamGrads trigger_grads = ParamGrads::zeros_like(result.trigger_model);
      ParamGrads main_grads = ParamGrads::zeros_like(result.main_model);
      double batch_loss = 0;

      for (std::size_t bi = start; bi < end; ++bi) {
        const auto idx = order[bi];
        const int y = data.samples[idx].label;
        const SampleEval ev = eval_sample(trig_feats[idx], main_feats[idx], y,
                                          result.trigger_model, result.main_model, config);

        batch_loss += ev.weight * ev.nll;
        weight_sum += ev.weight;
        if (argmax(ev.main_p) == y) ++main_hits;
        if (argmax(ev.trigger_p) == y) ++trigger_hits;

        for (std::uint32_t k = 0; k < classes; ++k) {
          const double delta = (static_cast<int>(k) == y) ? 1.0 : 0.0;
          const double d = ev.weight * (ev.combined.probs[k] - delta);
          dmain[k] = d;
          dtrigger[k] = config.beta * d;
        }
        accumulate_backward(result.main_model, main_feats[idx], dmain, main_grads);
        accumulate_backward(result.trigger_model, trig_feats[idx], dtrigger, trigger_grads);
      }

      batch_loss /= bn;
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << epoch << ", batch starting at sample "
            << start << "; lower the learning rate";
        throw NumericError(msg.str());
      }
      loss_sum += batch_loss * bn;

      main_grads.scale(1.0 / bn);
      trigger_grads.scale(1.0 / bn);
      sgd_step(result.main_model, main_grads, config.lr_main);
      sgd_step(result.trigger_model, trigger_grads, config.lr_trigger);
    }

    stats.mean_loss = loss_sum / static_cast<double>(n);
    stats.mean_weight = weight_sum / static_cast<double>(n);
    stats.main_train_acc = static_cast<double>(main_hits) / static_cast<double>(n);
    stats.trigger_train_acc = static_cast<double>(trigger_hits) / static_cast<double>(n);
    result.history.push_back(stats);
  }
  return result;
}

}  // namespace bdlab
