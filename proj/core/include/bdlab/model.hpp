#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdlab/text.hpp"

namespace bdlab {

enum class ModelKind { linear, mlp };

struct ModelDims {
  std::uint32_t input_dim = 0;
  std::uint32_t n_classes = 0;
  std::uint32_t hidden = 0;  // 0 for linear
};

inline constexpr std::uint32_t kDefaultHidden = 64;

/// Dense matrix stored column-major: entry (r, c) lives at a[c*rows + r].
/// Column-major keeps per-feature weight columns contiguous, which is what
/// sparse forward/backward passes touch.
struct Mat {
  std::uint32_t rows = 0, cols = 0;
  std::vector<double> a;

  static Mat zeros(std::uint32_t rows, std::uint32_t cols);
  double& at(std::uint32_t r, std::uint32_t c) {
    return a[static_cast<std::size_t>(c) * rows + r];
  }
  double at(std::uint32_t r, std::uint32_t c) const {
    return a[static_cast<std::size_t>(c) * rows + r];
  }
};

/// Parameters of a softmax classifier over hashed features. Linear uses
/// (w, b); the MLP uses (w1, b1, w2, b2) with a tanh hidden layer.
struct ModelParams {
  ModelKind kind = ModelKind::linear;
  ModelDims dims;
  std::uint64_t seed = 0;

  Mat w;                  // linear: n_classes x input_dim
  std::vector<double> b;  // n_classes

  Mat w1;                  // mlp: hidden x input_dim
  std::vector<double> b1;  // hidden
  Mat w2;                  // mlp: n_classes x hidden
  std::vector<double> b2;  // n_classes

  std::size_t param_count() const;
};

/// Weights drawn uniform in [-0.01, 0.01] from stream (seed, "init") in
/// storage order (w1 before w2 for the MLP); biases start at zero.
ModelParams init_params(ModelKind kind, const ModelDims& dims, std::uint64_t seed);

struct ProbDist {
  std::vector<double> probs;
};

/// Index of the largest probability; ties go to the smallest class index.
int argmax(const ProbDist& p);

/// Numerically stable softmax (max subtraction).
ProbDist softmax(std::span<const double> logits);

/// Class probabilities for a sparse input. Requires features.dim to match
/// the model's input dimension.
ProbDist forward(const ModelParams& params, const FeatureVector& features);

/// Gradient matrix with few active columns: column c, when present, holds a
/// dense vector of `rows` entries.
struct SparseColMat {
  std::uint32_t rows = 0, cols = 0;
  std::unordered_map<std::uint32_t, std::vector<double>> columns;

  double at(std::uint32_t r, std::uint32_t c) const;
  std::vector<double>& column(std::uint32_t c);
};

/// Gradients with the same shape as ModelParams. Input-facing matrices are
/// sparse by column; everything else is dense.
struct ParamGrads {
  ModelKind kind = ModelKind::linear;
  ModelDims dims;

  SparseColMat w;
  std::vector<double> b;

  SparseColMat w1;
  std::vector<double> b1;
  Mat w2;
  std::vector<double> b2;

  static ParamGrads zeros_like(const ModelParams& params);
  void scale(double s);
};

/// Adds the exact gradient of sum_k dlogits[k] * logit_k to `out`.
void accumulate_backward(const ModelParams& params, const FeatureVector& features,
                         std::span<const double> dlogits, ParamGrads& out);

/// Exact gradient of sum_k dlogits[k] * logit_k w.r.t. all parameters.
ParamGrads backward(const ModelParams& params, const FeatureVector& features,
                    std::span<const double> dlogits);

/// params <- params - lr * grads.
void sgd_step(ModelParams& params, const ParamGrads& grads, double lr);

/// Checkpoint JSON: {kind, dims, seed, weights} with weights flattened
/// row-major as w,b (linear) or w1,b1,w2,b2 (mlp).
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);
std::string checkpoint_to_json(const ModelParams& params);
ModelParams checkpoint_from_json(const std::string& json_text);

}  // namespace bdlab
