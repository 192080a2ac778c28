#pragma once

// Shared helpers for the test suites: deterministic instance generators, a
// finite-difference oracle over model parameters, and a reference plain-CE
// trainer used to pin the ensemble's reduction behavior.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "bdlab/attack.hpp"
#include "bdlab/dataset.hpp"
#include "bdlab/dpoe.hpp"
#include "bdlab/model.hpp"
#include "bdlab/rng.hpp"
#include "bdlab/text.hpp"

namespace bdlab::testsupport {

// Mutable pointers to every parameter, in canonical storage order:
// w (column-major), b for linear; w1, b1, w2, b2 for the MLP.
inline std::vector<double*> param_slots(ModelParams& p) {
  std::vector<double*> out;
  auto add_mat = [&](Mat& m) {
    for (auto& v : m.a) out.push_back(&v);
  };
  auto add_vec = [&](std::vector<double>& v) {
    for (auto& x : v) out.push_back(&x);
  };
  if (p.kind == ModelKind::linear) {
    add_mat(p.w);
    add_vec(p.b);
  } else {
    add_mat(p.w1);
    add_vec(p.b1);
    add_mat(p.w2);
    add_vec(p.b2);
  }
  return out;
}

// Gradient entry matching param_slots order.
inline double grad_slot(const ParamGrads& g, const ModelParams& p, std::size_t slot) {
  if (p.kind == ModelKind::linear) {
    if (slot < p.w.a.size()) {
      const auto rows = p.w.rows;
      return g.w.at(static_cast<std::uint32_t>(slot % rows),
                    static_cast<std::uint32_t>(slot / rows));
    }
    return g.b[slot - p.w.a.size()];
  }
  std::size_t off = 0;
  if (slot < off + p.w1.a.size()) {
    const auto rows = p.w1.rows;
    const auto s = slot - off;
    return g.w1.at(static_cast<std::uint32_t>(s % rows), static_cast<std::uint32_t>(s / rows));
  }
  off += p.w1.a.size();
  if (slot < off + p.b1.size()) return g.b1[slot - off];
  off += p.b1.size();
  if (slot < off + p.w2.a.size()) return g.w2.a[slot - off];
  off += p.w2.a.size();
  return g.b2[slot - off];
}

inline FeatureVector random_features(RandomStream& rs, std::uint32_t dim, int max_nnz = 5) {
  FeatureVector fv;
  fv.dim = dim;
  const int nnz = 1 + static_cast<int>(rs.next_below(static_cast<std::uint64_t>(max_nnz)));
  std::set<std::uint32_t> idxs;
  while (static_cast<int>(idxs.size()) < nnz && idxs.size() < dim)
    idxs.insert(static_cast<std::uint32_t>(rs.next_below(dim)));
  for (auto j : idxs)
    fv.entries.emplace_back(j, 1.0 + static_cast<double>(rs.next_below(3)));
  return fv;
}

inline void randomize_params(ModelParams& p, RandomStream& rs, double scale) {
  for (double* slot : param_slots(p)) *slot = (rs.next_unit() * 2.0 - 1.0) * scale;
}

// One random ensemble problem for gradient checks.
struct FdInstance {
  ModelParams trigger_model;
  ModelParams main_model;
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  EnsembleConfig config;
};

inline FdInstance random_fd_instance(std::uint64_t seed, int index) {
  RandomStream rs(seed, "fd." + std::to_string(index));
  FdInstance inst;
  // Every (beta, classes, gamma) combination appears once per 16 indices.
  const std::uint32_t classes = ((index / 4) % 2 == 0) ? 2 : 4;
  const auto dim = static_cast<std::uint32_t>(4 + rs.next_below(29));  // 4..32
  const auto hidden = static_cast<std::uint32_t>(3 + rs.next_below(5));

  inst.trigger_model = init_params(ModelKind::linear, {dim, classes, 0}, rs.next());
  inst.main_model = init_params(ModelKind::mlp, {dim, classes, hidden}, rs.next());
  randomize_params(inst.trigger_model, rs, 0.5);
  randomize_params(inst.main_model, rs, 0.5);

  const int batch = 1 + static_cast<int>(rs.next_below(4));
  for (int i = 0; i < batch; ++i) {
    inst.xs.push_back(random_features(rs, dim));
    inst.ys.push_back(static_cast<int>(rs.next_below(classes)));
  }

  static constexpr double kBetas[] = {0.0, 0.5, 1.0, 2.0};
  static constexpr double kGammas[] = {0.7, 1.0};
  inst.config.beta = kBetas[index % 4];
  inst.config.gamma = kGammas[(index / 8) % 2];
  return inst;
}

// The ensemble loss with per-sample weights pinned to the values they had at
// the unperturbed parameters. The analytic gradient treats weights as
// stop-gradient constants, so finite differences must hold them fixed too;
// otherwise perturbing the trigger model would also move the weights.
inline double frozen_weight_loss(std::span<const FeatureVector> trigger_xs,
                                 std::span<const FeatureVector> main_xs, std::span<const int> ys,
                                 const ModelParams& trigger_model, const ModelParams& main_model,
                                 const EnsembleConfig& config, std::span<const double> weights) {
  double sum = 0;
  for (std::size_t i = 0; i < main_xs.size(); ++i) {
    const ProbDist b = forward(trigger_model, trigger_xs[i]);
    const ProbDist p = forward(main_model, main_xs[i]);
    const ProbDist phat = poe_combine(p, b, config.beta);
    const double py = phat.probs.at(static_cast<std::size_t>(ys[i]));
    sum += weights[i] * -std::log(std::max(py, 1e-12));
  }
  return sum / static_cast<double>(main_xs.size());
}

// Central finite difference of f() w.r.t. one slot.
template <class F>
double central_diff(double* slot, F&& f, double h = 1e-5) {
  const double saved = *slot;
  *slot = saved + h;
  const double up = f();
  *slot = saved - h;
  const double down = f();
  *slot = saved;
  return (up - down) / (2.0 * h);
}

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-4});
  return std::abs(a - b) / denom;
}

// Reference trainer: plain cross-entropy minibatch SGD of the main MLP
// alone, mirroring the documented training loop (same init stream, same
// shuffle stream, accumulate per sample, scale by 1/batch, step).
inline ModelParams plain_ce_train_main(const PoisonedDataset& data, const EnsembleConfig& config,
                                       const FeatureConfig& features) {
  const auto n = data.samples.size();
  const auto classes = static_cast<std::uint32_t>(data.label_names.size());
  std::vector<FeatureVector> feats;
  feats.reserve(n);
  for (const auto& s : data.samples) feats.push_back(featurize(tokenize(s.text), features));

  ModelParams main_model = init_params(ModelKind::mlp, {features.dim, classes, kDefaultHidden},
                                       derive_seed(config.seed, "init.main"));
  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  RandomStream shuffler(config.seed, "shuffle");

  const auto batch_size = static_cast<std::size_t>(config.batch);
  std::vector<double> dlogits(classes);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, shuffler);
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(start + batch_size, n);
      ParamGrads grads = ParamGrads::zeros_like(main_model);
      for (std::size_t bi = start; bi < end; ++bi) {
        const auto idx = order[bi];
        const int y = data.samples[idx].label;
        const ProbDist p = forward(main_model, feats[idx]);
        for (std::uint32_t k = 0; k < classes; ++k)
          dlogits[k] = p.probs[k] - ((static_cast<int>(k) == y) ? 1.0 : 0.0);
        accumulate_backward(main_model, feats[idx], dlogits, grads);
      }
      grads.scale(1.0 / static_cast<double>(end - start));
      sgd_step(main_model, grads, config.lr_main);
    }
  }
  return main_model;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline bool same_params(const ModelParams& a, const ModelParams& b) {
  ModelParams& ma = const_cast<ModelParams&>(a);
  ModelParams& mb = const_cast<ModelParams&>(b);
  auto sa = param_slots(ma), sb = param_slots(mb);
  if (sa.size() != sb.size()) return false;
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (*sa[i] != *sb[i]) return false;
  return true;
}

// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("bdlab_" + tag + "_" + std::to_string(++counter) + "_" +
            std::to_string(static_cast<unsigned>(::getpid())));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace bdlab::testsupport
