#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnc/cnc.hpp"
#include "cnc/io.hpp"
#include "cnc/rng.hpp"
#include "cnc/tensor.hpp"

namespace cnc {

/// Dense layer, y = W x + b with W stored row-major (out x in).
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;

  Layer() = default;
  Layer(int in_dim, int out_dim)
      : in(in_dim), out(out_dim), w(static_cast<std::size_t>(in_dim) * static_cast<std::size_t>(out_dim), 0.0),
        b(static_cast<std::size_t>(out_dim), 0.0) {}

  double& weight(int o, int i) { return w[static_cast<std::size_t>(o) * static_cast<std::size_t>(in) + static_cast<std::size_t>(i)]; }
  double weight(int o, int i) const { return w[static_cast<std::size_t>(o) * static_cast<std::size_t>(in) + static_cast<std::size_t>(i)]; }

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Fully-connected ReLU network: ReLU after every layer except the last.
class MlpModel {
public:
  MlpModel() = default;

  explicit MlpModel(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) {
      throw std::invalid_argument("MlpModel: need at least input and output dims");
    }
    for (int d : dims_) {
      if (d <= 0) {
        throw std::invalid_argument("MlpModel: layer dims must be positive");
      }
    }
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      layers_.emplace_back(dims_[l], dims_[l + 1]);
    }
  }

  /// Zero biases, weights ~ N(0, 2 / fan_in).
  static MlpModel he_init(std::vector<int> dims, RngStream rng) {
    MlpModel m(std::move(dims));
    for (Layer& layer : m.layers_) {
      const double sd = std::sqrt(2.0 / layer.in);
      for (double& v : layer.w) {
        v = sd * rng.normal();
      }
    }
    return m;
  }

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t hidden_width_total() const {
    return std::accumulate(dims_.begin() + 1, dims_.end() - 1, std::size_t{0});
  }

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers_) {
      n += l.w.size() + l.b.size();
    }
    return n;
  }

  bool finite() const {
    for (const Layer& l : layers_) {
      for (double v : l.w) {
        if (!std::isfinite(v)) return false;
      }
      for (double v : l.b) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

private:
  std::vector<int> dims_;
  std::vector<Layer> layers_;
};

inline std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    s += p[i];
  }
  for (double& v : p) {
    v /= s;
  }
  return p;
}

inline double log_sum_exp(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double v : logits) {
    s += std::exp(v - mx);
  }
  return mx + std::log(s);
}

/// -log softmax(logits)[label - 1].
inline double cross_entropy(std::span<const double> logits, int label) {
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(label - 1)];
}

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> probs;
  /// activations[0] is the input, activations[l] the post-ReLU output of hidden layer l.
  std::vector<std::vector<double>> activations;
  /// pre-activations of every layer, the last one being the logits.
  std::vector<std::vector<double>> preacts;
};

inline ForwardResult forward(const MlpModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.input_dim()) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.size()) + " values, model expects " +
                                std::to_string(model.input_dim()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::domain_error("forward: non-finite input");
    }
  }
  ForwardResult r;
  r.activations.emplace_back(x.begin(), x.end());
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& L = layers[l];
    const std::vector<double>& a = r.activations.back();
    std::vector<double> z(L.b);
    for (int o = 0; o < L.out; ++o) {
      double acc = z[static_cast<std::size_t>(o)];
      const double* row = &L.w[static_cast<std::size_t>(o) * static_cast<std::size_t>(L.in)];
      for (int i = 0; i < L.in; ++i) {
        acc += row[i] * a[static_cast<std::size_t>(i)];
      }
      z[static_cast<std::size_t>(o)] = acc;
    }
    r.preacts.push_back(z);
    if (l + 1 < layers.size()) {
      for (double& v : z) {
        v = v > 0.0 ? v : 0.0;
      }
      r.activations.push_back(std::move(z));
    } else {
      r.logits = std::move(z);
    }
  }
  r.probs = softmax(r.logits);
  return r;
}

inline std::vector<double> logits(const MlpModel& model, std::span<const double> x) {
  return forward(model, x).logits;
}

/// Row-major sample matrix with 1-based labels.
struct Batch {
  int dim = 0;
  std::vector<double> x;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }

  void push(std::span<const double> features, int label) {
    if (dim == 0) {
      dim = static_cast<int>(features.size());
    }
    if (static_cast<int>(features.size()) != dim) {
      throw std::invalid_argument("Batch: feature dimension mismatch");
    }
    x.insert(x.end(), features.begin(), features.end());
    labels.push_back(label);
  }

  Batch select(std::span<const std::size_t> idx) const {
    Batch b;
    b.dim = dim;
    b.x.reserve(idx.size() * static_cast<std::size_t>(dim));
    for (std::size_t i : idx) {
      const auto r = row(i);
      b.x.insert(b.x.end(), r.begin(), r.end());
      b.labels.push_back(labels[i]);
    }
    return b;
  }
};

inline Batch to_batch(const Point2Dataset& ds) {
  Batch b;
  b.dim = 2;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double f[2] = {ds.points[i].x, ds.points[i].y};
    b.push(f, ds.labels[i]);
  }
  return b;
}

inline Batch to_batch(const LabeledImageSet& ds) {
  Batch b;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto flat = ds.images[i].flatten();
    b.push(flat, ds.labels[i]);
  }
  return b;
}

namespace detail {

inline void check_labels(const Batch& b, int lo, int hi, const char* what) {
  for (int l : b.labels) {
    if (l < lo || l > hi) {
      throw std::invalid_argument(std::string(what) + ": label " + std::to_string(l) + " out of range [" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }
}

inline void check_eq2_inputs(const MlpModel& model, const Batch& id, const Batch& ood) {
  const int classes = model.output_dim();
  if (id.size() > 0 && id.dim != model.input_dim()) {
    throw std::invalid_argument("loss: ID batch dimension does not match the model input");
  }
  if (ood.size() > 0 && ood.dim != model.input_dim()) {
    throw std::invalid_argument("loss: OOD batch dimension does not match the model input");
  }
  if (ood.size() > 0) {
    check_labels(id, 1, classes - 1, "ID batch");
    check_labels(ood, classes, classes, "OOD batch");
  } else {
    check_labels(id, 1, classes, "ID batch");
  }
}

/// Reusable buffers for allocation-free forward/backward passes.
struct Workspace {
  std::vector<std::vector<double>> act;   // act[0] input, act[l] hidden outputs
  std::vector<std::vector<double>> pre;   // pre-activations per layer
  std::vector<std::vector<double>> delta; // dL/dpre per layer

  explicit Workspace(const MlpModel& m) {
    const auto& d = m.dims();
    for (std::size_t l = 0; l + 1 < d.size(); ++l) {
      act.emplace_back(static_cast<std::size_t>(d[l]));
      pre.emplace_back(static_cast<std::size_t>(d[l + 1]));
      delta.emplace_back(static_cast<std::size_t>(d[l + 1]));
    }
  }

  void run(const MlpModel& m, std::span<const double> x) {
    std::copy(x.begin(), x.end(), act[0].begin());
    const auto& layers = m.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const Layer& L = layers[l];
      const double* a = act[l].data();
      double* z = pre[l].data();
      for (int o = 0; o < L.out; ++o) {
        double acc = L.b[static_cast<std::size_t>(o)];
        const double* row = &L.w[static_cast<std::size_t>(o) * static_cast<std::size_t>(L.in)];
        for (int i = 0; i < L.in; ++i) {
          acc += row[i] * a[i];
        }
        z[o] = acc;
      }
      if (l + 1 < layers.size()) {
        double* next = act[l + 1].data();
        for (int o = 0; o < L.out; ++o) {
          next[o] = z[o] > 0.0 ? z[o] : 0.0;
        }
      }
    }
  }

  /// Adds scale * d CE(label)/d theta into grads; returns the CE value.
  double accumulate(const MlpModel& m, std::span<const double> x, int label, double scale, MlpModel& grads) {
    run(m, x);
    const auto& layers = m.layers();
    const std::size_t last = layers.size() - 1;
    const std::vector<double>& z = pre[last];
    const double lse = log_sum_exp(z);
    const double loss = lse - z[static_cast<std::size_t>(label - 1)];
    for (std::size_t k = 0; k < z.size(); ++k) {
      delta[last][k] = scale * (std::exp(z[k] - lse) - (static_cast<int>(k) == label - 1 ? 1.0 : 0.0));
    }
    auto& glayers = grads.layers();
    for (std::size_t l = last + 1; l-- > 0;) {
      const Layer& L = layers[l];
      Layer& G = glayers[l];
      const double* d = delta[l].data();
      const double* a = act[l].data();
      for (int o = 0; o < L.out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        G.b[static_cast<std::size_t>(o)] += dv;
        double* grow = &G.w[static_cast<std::size_t>(o) * static_cast<std::size_t>(L.in)];
        for (int i = 0; i < L.in; ++i) {
          grow[i] += dv * a[i];
        }
      }
      if (l == 0) break;
      double* dprev = delta[l - 1].data();
      const double* zprev = pre[l - 1].data();
      for (int i = 0; i < L.in; ++i) {
        dprev[i] = 0.0;
      }
      for (int o = 0; o < L.out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        const double* row = &L.w[static_cast<std::size_t>(o) * static_cast<std::size_t>(L.in)];
        for (int i = 0; i < L.in; ++i) {
          dprev[i] += row[i] * dv;
        }
      }
      for (int i = 0; i < L.in; ++i) {
        if (!(zprev[i] > 0.0)) dprev[i] = 0.0;
      }
    }
    return loss;
  }
};

}  // namespace detail

/// Mean CE over the ID batch plus alpha times the mean CE towards the reject
/// class (the last output) over the OOD batch. An empty OOD batch contributes 0.
inline double loss_eq2(const MlpModel& model, const Batch& id, const Batch& ood, double alpha) {
  detail::check_eq2_inputs(model, id, ood);
  double id_sum = 0.0;
  for (std::size_t i = 0; i < id.size(); ++i) {
    id_sum += cross_entropy(forward(model, id.row(i)).logits, id.labels[i]);
  }
  double ood_sum = 0.0;
  for (std::size_t i = 0; i < ood.size(); ++i) {
    ood_sum += cross_entropy(forward(model, ood.row(i)).logits, model.output_dim());
  }
  const double id_term = id.size() > 0 ? id_sum / static_cast<double>(id.size()) : 0.0;
  const double ood_term = ood.size() > 0 ? ood_sum / static_cast<double>(ood.size()) : 0.0;
  return id_term + alpha * ood_term;
}

struct LossAndGradients {
  double loss = 0.0;
  MlpModel grads;  // same shape as the model
};

/// Analytic gradient of loss_eq2 with respect to every weight and bias.
inline LossAndGradients backward(const MlpModel& model, const Batch& id, const Batch& ood, double alpha) {
  detail::check_eq2_inputs(model, id, ood);
  LossAndGradients out{0.0, MlpModel(model.dims())};
  detail::Workspace ws(model);
  if (id.size() > 0) {
    const double s = 1.0 / static_cast<double>(id.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < id.size(); ++i) {
      sum += ws.accumulate(model, id.row(i), id.labels[i], s, out.grads);
    }
    out.loss += sum * s;
  }
  if (ood.size() > 0) {
    const double s = alpha / static_cast<double>(ood.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < ood.size(); ++i) {
      sum += ws.accumulate(model, ood.row(i), model.output_dim(), s, out.grads);
    }
    out.loss += alpha * sum / static_cast<double>(ood.size());
  }
  return out;
}

struct TrainConfig {
  double alpha = 1.0;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
  int epochs = 2000;
  int batch_size = 64;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("TrainConfig: alpha must be >= 0");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  }
};

class TrainingDiverged : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_history;  // mean minibatch loss per epoch
};

/// Produces the synthetic OOD minibatch for the ID rows `idx`, drawing only from `rng`.
using OodSampler = std::function<Batch(std::span<const std::size_t> idx, const RngStream& rng)>;

/// SGD with momentum (v <- mu v + g + wd theta; theta <- theta - lr v) on the
/// ID/OOD objective. Epoch e shuffles with RngStream(seed).child(e); minibatch b
/// of epoch e gets its OOD samples from RngStream(seed ^ tag).child(e).child(b).
inline TrainResult train(MlpModel model, const Batch& id_data, const OodSampler& sampler, const TrainConfig& cfg) {
  cfg.validate();
  if (id_data.size() == 0) {
    throw std::invalid_argument("train: empty ID data");
  }
  if (!model.finite()) {
    throw std::domain_error("train: non-finite initial parameters");
  }
  TrainResult result;
  MlpModel velocity(model.dims());
  detail::Workspace ws(model);
  const RngStream order_root(cfg.seed);
  const RngStream ood_root(cfg.seed ^ 0x6f6f642d73616d70ULL);
  std::vector<std::size_t> order(id_data.size());
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffler = order_root.child(static_cast<std::uint64_t>(epoch));
    shuffler.shuffle(std::span<std::size_t>(order));
    const RngStream epoch_rng = ood_root.child(static_cast<std::uint64_t>(epoch));
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(bs, order.size() - start));
      const Batch ood = sampler ? sampler(idx, epoch_rng.child(batches)) : Batch{};
      if (ood.size() > 0 && ood.dim != model.input_dim()) {
        throw std::invalid_argument("train: OOD sampler produced wrong dimension");
      }
      MlpModel grads(model.dims());
      double loss = 0.0;
      const double s_id = 1.0 / static_cast<double>(idx.size());
      for (std::size_t i : idx) {
        loss += s_id * ws.accumulate(model, id_data.row(i), id_data.labels[i], s_id, grads);
      }
      if (ood.size() > 0) {
        const double s_ood = cfg.alpha / static_cast<double>(ood.size());
        for (std::size_t i = 0; i < ood.size(); ++i) {
          loss += s_ood * ws.accumulate(model, ood.row(i), model.output_dim(), s_ood, grads);
        }
      }
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batches));
      }
      auto& layers = model.layers();
      auto& vel = velocity.layers();
      auto& gl = grads.layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t k = 0; k < layers[l].w.size(); ++k) {
          const double g = gl[l].w[k] + cfg.weight_decay * layers[l].w[k];
          vel[l].w[k] = cfg.momentum * vel[l].w[k] + g;
          layers[l].w[k] -= cfg.lr * vel[l].w[k];
        }
        for (std::size_t k = 0; k < layers[l].b.size(); ++k) {
          vel[l].b[k] = cfg.momentum * vel[l].b[k] + gl[l].b[k];
          layers[l].b[k] -= cfg.lr * vel[l].b[k];
        }
      }
      epoch_loss += loss;
      ++batches;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches));
    if (!model.finite()) {
      throw TrainingDiverged("train: parameters became non-finite at epoch " + std::to_string(epoch));
    }
  }
  result.model = std::move(model);
  return result;
}

namespace detail {

/// PBCC cannot pair a single-class minibatch (the trailing one of an epoch can
/// be). Such a batch draws its partners from the whole training set instead,
/// keeping the OOD count of the minibatch.
inline bool needs_full_pool(std::span<const int> labels, Variant v) {
  if (!uses_pbcc(v) || labels.empty()) return false;
  return std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) == labels.end();
}

inline GenConfig pooled_config(GenConfig gen, std::size_t minibatch, std::size_t pool) {
  const std::size_t want = gen.output_count(minibatch);
  gen.ood_ratio = (static_cast<double>(want) + 0.25) / static_cast<double>(pool);
  return gen;
}

inline void check_head(const MlpModel& model, int class_count, Variant v) {
  const int want = v == Variant::none ? class_count : class_count + 1;
  if (model.output_dim() != want) {
    throw std::invalid_argument("train: model has " + std::to_string(model.output_dim()) + " outputs, variant " +
                                std::string(to_string(v)) + " needs " + std::to_string(want));
  }
}

}  // namespace detail

/// Planar training with synthetic OOD minibatches from cnc_datagen_2d.
/// scale_warp is taken about the centroid of the full training set.
inline TrainResult train(MlpModel model, const Point2Dataset& id_data, const GenConfig& gen, const TrainConfig& cfg,
                         const SeverityTable& table = SeverityTable::defaults()) {
  id_data.validate();
  gen.validate();
  detail::check_head(model, id_data.class_count, gen.variant);
  const Batch all = to_batch(id_data);
  const Point2 center = id_data.centroid();
  OodSampler sampler;
  if (gen.variant != Variant::none) {
    const RngStream gen_root(gen.seed);
    sampler = [&, gen_root](std::span<const std::size_t> idx, const RngStream& rng) {
      Point2Dataset mb;
      mb.class_count = id_data.class_count;
      for (std::size_t i : idx) {
        mb.points.push_back(id_data.points[i]);
        mb.labels.push_back(id_data.labels[i]);
      }
      RngStream draw = rng;
      const RngStream stream = gen_root.child(draw.next_u64());
      if (detail::needs_full_pool(mb.labels, gen.variant)) {
        return to_batch(cnc_datagen_2d(id_data, detail::pooled_config(gen, mb.size(), id_data.size()), stream, center, table));
      }
      return to_batch(cnc_datagen_2d(mb, gen, stream, center, table));
    };
  }
  return train(std::move(model), all, sampler, cfg);
}

/// Image training on flattened tensors with OOD minibatches from cnc_datagen.
inline TrainResult train(MlpModel model, const LabeledImageSet& id_data, const GenConfig& gen,
                         const TrainConfig& cfg, const SeverityTable& table = SeverityTable::defaults()) {
  id_data.validate();
  gen.validate();
  detail::check_head(model, id_data.class_count, gen.variant);
  const Batch all = to_batch(id_data);
  OodSampler sampler;
  if (gen.variant != Variant::none) {
    const RngStream gen_root(gen.seed);
    sampler = [&, gen_root](std::span<const std::size_t> idx, const RngStream& rng) {
      LabeledImageSet mb;
      mb.class_count = id_data.class_count;
      for (std::size_t i : idx) {
        mb.images.push_back(id_data.images[i]);
        mb.labels.push_back(id_data.labels[i]);
      }
      RngStream draw = rng;
      const RngStream stream = gen_root.child(draw.next_u64());
      if (detail::needs_full_pool(mb.labels, gen.variant)) {
        return to_batch(cnc_datagen(id_data, detail::pooled_config(gen, mb.size(), id_data.size()), stream, table));
      }
      return to_batch(cnc_datagen(mb, gen, stream, table));
    };
  }
  return train(std::move(model), all, sampler, cfg);
}

// ---------------------------------------------------------------------------
// Checkpoint: "CNCM", u32 layer-dim count, u32 dims..., then per layer the
// weights (row-major out x in) followed by the biases, as float64. All
// integers and floats little-endian.
// ---------------------------------------------------------------------------
inline std::string encode_checkpoint(const MlpModel& m) {
  std::string out = "CNCM";
  detail::put_u32(out, static_cast<std::uint32_t>(m.dims().size()));
  for (int d : m.dims()) {
    detail::put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (const Layer& l : m.layers()) {
    for (double v : l.w) detail::put_f64(out, v);
    for (double v : l.b) detail::put_f64(out, v);
  }
  return out;
}

inline MlpModel decode_checkpoint(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.remaining() < 4 || in.take(4) != "CNCM") {
    throw FormatError("checkpoint: bad magic");
  }
  const std::uint32_t n = in.u32();
  if (n < 2 || n > 64) {
    throw FormatError("checkpoint: implausible layer count");
  }
  std::vector<int> dims;
  std::uint64_t params = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t d = in.u32();
    if (d == 0 || d > (1u << 24)) {
      throw FormatError("checkpoint: invalid layer dimension");
    }
    if (!dims.empty()) {
      params += static_cast<std::uint64_t>(dims.back()) * d + d;
    }
    dims.push_back(static_cast<int>(d));
  }
  if (params * 8 != in.remaining()) {
    throw FormatError("checkpoint: parameter payload size mismatch");
  }
  MlpModel m(dims);
  for (Layer& l : m.layers()) {
    for (double& v : l.w) v = in.f64();
    for (double& v : l.b) v = in.f64();
  }
  if (!m.finite()) {
    throw FormatError("checkpoint: non-finite parameters");
  }
  return m;
}

inline void save_checkpoint(const MlpModel& m, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(m));
}

inline MlpModel load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace cnc
