#include "bdlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "bdlab/errors.hpp"
#include "bdlab/rng.hpp"

namespace bdlab {

namespace {

void check_dims(const ModelDims& dims, ModelKind kind) {
  if (dims.input_dim == 0 || dims.n_classes < 2)
    throw std::invalid_argument("model dims: need input_dim >= 1 and n_classes >= 2");
  if (kind == ModelKind::mlp && dims.hidden == 0)
    throw std::invalid_argument("model dims: mlp needs hidden >= 1");
}

void fill_uniform(Mat& m, RandomStream& rs) {
  for (auto& v : m.a) v = rs.next_unit() * 0.02 - 0.01;
}

std::vector<double> logits_of(const ModelParams& p, const FeatureVector& x) {
  const std::uint32_t classes = p.dims.n_classes;
  if (x.dim != p.dims.input_dim)
    throw std::invalid_argument("forward: feature dim does not match model input dim");

  std::vector<double> out;
  if (p.kind == ModelKind::linear) {
    out = p.b;
    for (const auto& [j, v] : x.entries) {
      const double* col = &p.w.a[static_cast<std::size_t>(j) * classes];
      for (std::uint32_t k = 0; k < classes; ++k) out[k] += col[k] * v;
    }
  } else {
    const std::uint32_t hidden = p.dims.hidden;
    std::vector<double> h = p.b1;
    for (const auto& [j, v] : x.entries) {
      const double* col = &p.w1.a[static_cast<std::size_t>(j) * hidden];
      for (std::uint32_t t = 0; t < hidden; ++t) h[t] += col[t] * v;
    }
    for (auto& v : h) v = std::tanh(v);
    out = p.b2;
    for (std::uint32_t t = 0; t < hidden; ++t) {
      const double* col = &p.w2.a[static_cast<std::size_t>(t) * classes];
      for (std::uint32_t k = 0; k < classes; ++k) out[k] += col[k] * h[t];
    }
  }
  return out;
}

}  // namespace

Mat Mat::zeros(std::uint32_t rows, std::uint32_t cols) {
  Mat m;
  m.rows = rows;
  m.cols = cols;
  m.a.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  return m;
}

std::size_t ModelParams::param_count() const {
  if (kind == ModelKind::linear) return w.a.size() + b.size();
  return w1.a.size() + b1.size() + w2.a.size() + b2.size();
}

ModelParams init_params(ModelKind kind, const ModelDims& dims, std::uint64_t seed) {
  check_dims(dims, kind);
  ModelParams p;
  p.kind = kind;
  p.dims = dims;
  p.seed = seed;
  RandomStream rs(seed, "init");
  if (kind == ModelKind::linear) {
    p.w = Mat::zeros(dims.n_classes, dims.input_dim);
    p.b.assign(dims.n_classes, 0.0);
    fill_uniform(p.w, rs);
  } else {
    p.w1 = Mat::zeros(dims.hidden, dims.input_dim);
    p.b1.assign(dims.hidden, 0.0);
    p.w2 = Mat::zeros(dims.n_classes, dims.hidden);
    p.b2.assign(dims.n_classes, 0.0);
    fill_uniform(p.w1, rs);
    fill_uniform(p.w2, rs);
  }
  return p;
}

int argmax(const ProbDist& p) {
  return static_cast<int>(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin());
}

ProbDist softmax(std::span<const double> logits) {
  ProbDist out;
  out.probs.resize(logits.size());
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out.probs[k] = std::exp(logits[k] - mx);
    sum += out.probs[k];
  }
  for (auto& v : out.probs) v /= sum;
  return out;
}

ProbDist forward(const ModelParams& params, const FeatureVector& features) {
  const auto z = logits_of(params, features);
  return softmax(z);
}

double SparseColMat::at(std::uint32_t r, std::uint32_t c) const {
  const auto it = columns.find(c);
  return it == columns.end() ? 0.0 : it->second[r];
}

std::vector<double>& SparseColMat::column(std::uint32_t c) {
  auto [it, inserted] = columns.try_emplace(c);
  if (inserted) it->second.assign(rows, 0.0);
  return it->second;
}

ParamGrads ParamGrads::zeros_like(const ModelParams& params) {
  ParamGrads g;
  g.kind = params.kind;
  g.dims = params.dims;
  if (params.kind == ModelKind::linear) {
    g.w.rows = params.dims.n_classes;
    g.w.cols = params.dims.input_dim;
    g.b.assign(params.dims.n_classes, 0.0);
  } else {
    g.w1.rows = params.dims.hidden;
    g.w1.cols = params.dims.input_dim;
    g.b1.assign(params.dims.hidden, 0.0);
    g.w2 = Mat::zeros(params.dims.n_classes, params.dims.hidden);
    g.b2.assign(params.dims.n_classes, 0.0);
  }
  return g;
}

void ParamGrads::scale(double s) {
  for (auto& [c, col] : w.columns)
    for (auto& v : col) v *= s;
  for (auto& v : b) v *= s;
  for (auto& [c, col] : w1.columns)
    for (auto& v : col) v *= s;
  for (auto& v : b1) v *= s;
  for (auto& v : w2.a) v *= s;
  for (auto& v : b2) v *= s;
}

void accumulate_backward(const ModelParams& params, const FeatureVector& features,
                         std::span<const double> dlogits, ParamGrads& out) {
  const std::uint32_t classes = params.dims.n_classes;
  if (dlogits.size() != classes)
    throw std::invalid_argument("backward: dlogits size does not match n_classes");
  if (features.dim != params.dims.input_dim)
    throw std::invalid_argument("backward: feature dim does not match model input dim");

  if (params.kind == ModelKind::linear) {
    for (std::uint32_t k = 0; k < classes; ++k) out.b[k] += dlogits[k];
    for (const auto& [j, v] : features.entries) {
      auto& col = out.w.column(j);
      for (std::uint32_t k = 0; k < classes; ++k) col[k] += dlogits[k] * v;
    }
    return;
  }

  const std::uint32_t hidden = params.dims.hidden;
  // Recompute the hidden activation for this input.
  std::vector<double> h = params.b1;
  for (const auto& [j, v] : features.entries) {
    const double* col = &params.w1.a[static_cast<std::size_t>(j) * hidden];
    for (std::uint32_t t = 0; t < hidden; ++t) h[t] += col[t] * v;
  }
  for (auto& v : h) v = std::tanh(v);

  for (std::uint32_t k = 0; k < classes; ++k) out.b2[k] += dlogits[k];
  for (std::uint32_t t = 0; t < hidden; ++t) {
    double* gcol = &out.w2.a[static_cast<std::size_t>(t) * classes];
    for (std::uint32_t k = 0; k < classes; ++k) gcol[k] += dlogits[k] * h[t];
  }

  std::vector<double> dpre(hidden);
  for (std::uint32_t t = 0; t < hidden; ++t) {
    const double* col = &params.w2.a[static_cast<std::size_t>(t) * classes];
    double dh = 0;
    for (std::uint32_t k = 0; k < classes; ++k) dh += dlogits[k] * col[k];
    dpre[t] = dh * (1.0 - h[t] * h[t]);
  }
  for (std::uint32_t t = 0; t < hidden; ++t) out.b1[t] += dpre[t];
  for (const auto& [j, v] : features.entries) {
    auto& col = out.w1.column(j);
    for (std::uint32_t t = 0; t < hidden; ++t) col[t] += dpre[t] * v;
  }
}

ParamGrads backward(const ModelParams& params, const FeatureVector& features,
                    std::span<const double> dlogits) {
  ParamGrads g = ParamGrads::zeros_like(params);
  accumulate_backward(params, features, dlogits, g);
  return g;
}

void sgd_step(ModelParams& params, const ParamGrads& grads, double lr) {
  if (!(lr > 0)) throw std::invalid_argument("sgd_step: lr must be > 0");
  if (grads.kind != params.kind)
    throw std::invalid_argument("sgd_step: grads do not match model kind");

  if (params.kind == ModelKind::linear) {
    const std::uint32_t classes = params.dims.n_classes;
    for (const auto& [c, col] : grads.w.columns) {
      double* wcol = &params.w.a[static_cast<std::size_t>(c) * classes];
      for (std::uint32_t k = 0; k < classes; ++k) wcol[k] -= lr * col[k];
    }
    for (std::uint32_t k = 0; k < classes; ++k) params.b[k] -= lr * grads.b[k];
    return;
  }

  const std::uint32_t hidden = params.dims.hidden;
  for (const auto& [c, col] : grads.w1.columns) {
    double* wcol = &params.w1.a[static_cast<std::size_t>(c) * hidden];
    for (std::uint32_t t = 0; t < hidden; ++t) wcol[t] -= lr * col[t];
  }
  for (std::uint32_t t = 0; t < hidden; ++t) params.b1[t] -= lr * grads.b1[t];
  for (std::size_t i = 0; i < params.w2.a.size(); ++i) params.w2.a[i] -= lr * grads.w2.a[i];
  for (std::size_t k = 0; k < params.b2.size(); ++k) params.b2[k] -= lr * grads.b2[k];
}

namespace {

using nlohmann::ordered_json;

void append_row_major(const Mat& m, std::vector<double>& out) {
  for (std::uint32_t r = 0; r < m.rows; ++r)
    for (std::uint32_t c = 0; c < m.cols; ++c) out.push_back(m.at(r, c));
}

std::size_t read_row_major(const std::vector<double>& flat, std::size_t pos, Mat& m) {
  for (std::uint32_t r = 0; r < m.rows; ++r)
    for (std::uint32_t c = 0; c < m.cols; ++c) m.at(r, c) = flat.at(pos++);
  return pos;
}

std::size_t read_vec(const std::vector<double>& flat, std::size_t pos, std::vector<double>& v) {
  for (auto& x : v) x = flat.at(pos++);
  return pos;
}

}  // namespace

std::string checkpoint_to_json(const ModelParams& params) {
  std::vector<double> flat;
  flat.reserve(params.param_count());
  if (params.kind == ModelKind::linear) {
    append_row_major(params.w, flat);
    flat.insert(flat.end(), params.b.begin(), params.b.end());
  } else {
    append_row_major(params.w1, flat);
    flat.insert(flat.end(), params.b1.begin(), params.b1.end());
    append_row_major(params.w2, flat);
    flat.insert(flat.end(), params.b2.begin(), params.b2.end());
  }
  ordered_json j;
  j["kind"] = params.kind == ModelKind::linear ? "linear" : "mlp";
  j["dims"] = {{"input_dim", params.dims.input_dim},
               {"n_classes", params.dims.n_classes},
               {"hidden", params.dims.hidden}};
  j["seed"] = params.seed;
  j["weights"] = flat;
  return j.dump();
}

ModelParams checkpoint_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad checkpoint JSON: ") + e.what());
  }
  ModelParams p;
  try {
    const std::string kind = j.at("kind");
    if (kind == "linear") {
      p.kind = ModelKind::linear;
    } else if (kind == "mlp") {
      p.kind = ModelKind::mlp;
    } else {
      throw DataError("bad checkpoint: unknown kind \"" + kind + "\"");
    }
    p.dims.input_dim = j.at("dims").at("input_dim");
    p.dims.n_classes = j.at("dims").at("n_classes");
    p.dims.hidden = j.at("dims").at("hidden");
    p.seed = j.at("seed");
    const std::vector<double> flat = j.at("weights");
    check_dims(p.dims, p.kind);
    std::size_t pos = 0;
    if (p.kind == ModelKind::linear) {
      p.w = Mat::zeros(p.dims.n_classes, p.dims.input_dim);
      p.b.assign(p.dims.n_classes, 0.0);
      pos = read_row_major(flat, pos, p.w);
      pos = read_vec(flat, pos, p.b);
    } else {
      p.w1 = Mat::zeros(p.dims.hidden, p.dims.input_dim);
      p.b1.assign(p.dims.hidden, 0.0);
      p.w2 = Mat::zeros(p.dims.n_classes, p.dims.hidden);
      p.b2.assign(p.dims.n_classes, 0.0);
      pos = read_row_major(flat, pos, p.w1);
      pos = read_vec(flat, pos, p.b1);
      pos = read_row_major(flat, pos, p.w2);
      pos = read_vec(flat, pos, p.b2);
    }
    if (pos != flat.size()) throw DataError("bad checkpoint: trailing weights");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad checkpoint JSON: ") + e.what());
  } catch (const std::out_of_range&) {
    throw DataError("bad checkpoint: weight array too short");
  }
  return p;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << checkpoint_to_json(params) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

}  // namespace bdlab
