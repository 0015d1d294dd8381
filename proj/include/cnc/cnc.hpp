#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cnc/corruptions.hpp"
#include "cnc/io.hpp"
#include "cnc/pbcc.hpp"
#include "cnc/rng.hpp"
#include "cnc/tensor.hpp"

namespace cnc {

/// Synthetic-OOD recipe. `none` produces no samples and stands for plain
/// K-class training.
enum class Variant { none, cnc, r_cnc, pbcc_only, corruption_only };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::none: return "none";
    case Variant::cnc: return "cnc";
    case Variant::r_cnc: return "r_cnc";
    case Variant::pbcc_only: return "pbcc_only";
    case Variant::corruption_only: return "corruption_only";
  }
  return "none";
}

inline Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::none, Variant::cnc, Variant::r_cnc, Variant::pbcc_only, Variant::corruption_only}) {
    if (s == to_string(v)) {
      return v;
    }
  }
  if (s == "vanilla") {
    return Variant::none;
  }
  throw std::invalid_argument("unknown variant '" + std::string(s) + "'");
}

inline bool uses_pbcc(Variant v) { return v == Variant::cnc || v == Variant::r_cnc || v == Variant::pbcc_only; }
inline bool uses_corruption(Variant v) {
  return v == Variant::cnc || v == Variant::r_cnc || v == Variant::corruption_only;
}

inline std::vector<std::string> default_image_ops() {
  return {kImageCorruptions.begin(), kImageCorruptions.end()};
}

inline std::vector<std::string> default_point_ops() {
  return {kPointCorruptions.begin(), kPointCorruptions.end()};
}

struct GenConfig {
  Variant variant = Variant::cnc;
  LambdaLaw lambda_law{};
  std::vector<std::string> op_pool;
  std::vector<int> severity_pool{1, 2, 3, 4, 5};
  double ood_ratio = 1.0;  // OOD samples per ID sample
  std::uint64_t seed = 0;

  void validate() const {
    lambda_law.validate();
    if (!(ood_ratio > 0.0) || !std::isfinite(ood_ratio)) {
      throw std::invalid_argument("GenConfig: ood_ratio must be > 0");
    }
    if (uses_corruption(variant)) {
      if (op_pool.empty() || severity_pool.empty()) {
        throw std::invalid_argument("GenConfig: op_pool and severity_pool must be non-empty");
      }
      for (const auto& op : op_pool) {
        if (!is_registered(op)) {
          throw std::invalid_argument("GenConfig: unregistered corruption '" + op + "'");
        }
      }
      for (int s : severity_pool) {
        if (s < 1 || s > 5) {
          throw std::invalid_argument("GenConfig: severities must be in 1..5");
        }
      }
    }
  }

  std::size_t output_count(std::size_t batch_size) const {
    if (variant == Variant::none) {
      return 0;
    }
    return static_cast<std::size_t>(std::llround(ood_ratio * static_cast<double>(batch_size)));
  }
};

namespace detail {

inline CorruptionSpec draw_corruption(const GenConfig& cfg, RngStream& rng) {
  CorruptionSpec spec;
  spec.op = cfg.op_pool[static_cast<std::size_t>(rng.uniform_index(cfg.op_pool.size()))];
  spec.severity = cfg.severity_pool[static_cast<std::size_t>(rng.uniform_index(cfg.severity_pool.size()))];
  spec.rng = rng.child(rng.next_u64());
  return spec;
}

/// Label pairs among the classes present in a batch, plus per-class indices.
struct PairPlan {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::pair<int, int>> pairs;

  PairPlan(std::span<const int> labels, int class_count) {
    groups = group_by_label(labels, class_count);
    std::vector<int> present;
    for (int k = 1; k <= class_count; ++k) {
      if (!groups[static_cast<std::size_t>(k - 1)].empty()) {
        present.push_back(k);
      }
    }
    pairs = label_pairs(present);
  }

  /// Indices (a, b) for sample i: pair i mod P, one random member per label.
  std::pair<std::size_t, std::size_t> pick(std::size_t i, RngStream& rng) const {
    const auto [la, lb] = pairs[i % pairs.size()];
    const auto& ga = groups[static_cast<std::size_t>(la - 1)];
    const auto& gb = groups[static_cast<std::size_t>(lb - 1)];
    const std::size_t a = ga[static_cast<std::size_t>(rng.uniform_index(ga.size()))];
    const std::size_t b = gb[static_cast<std::size_t>(rng.uniform_index(gb.size()))];
    return {a, b};
  }
};

inline void require_pairs(const PairPlan& plan, Variant v) {
  if (uses_pbcc(v) && plan.pairs.empty()) {
    throw std::invalid_argument("cnc_datagen: PBCC variants need at least two classes in the batch");
  }
}

}  // namespace detail

/// Synthetic OOD images for one ID batch, all labeled K + 1. Sample i only
/// draws from rng.child(i), so the result does not depend on how samples are
/// scheduled.
///   cnc             PBCC, then one (op, severity) corruption
///   r_cnc           corrupt both sources independently, then PBCC
///   pbcc_only       PBCC only
///   corruption_only corruption of ID image i mod batch size
inline LabeledImageSet cnc_datagen(const LabeledImageSet& batch, const GenConfig& cfg, const RngStream& rng,
                                   const SeverityTable& table = SeverityTable::defaults()) {
  cfg.validate();
  batch.validate();
  LabeledImageSet out;
  out.class_count = batch.class_count;
  const std::size_t n = cfg.output_count(batch.size());
  if (n == 0) {
    return out;
  }
  if (batch.size() == 0) {
    throw std::invalid_argument("cnc_datagen: empty batch");
  }
  for (const auto& op : cfg.op_pool) {
    if (uses_corruption(cfg.variant) && !is_image_corruption(op)) {
      throw std::invalid_argument("cnc_datagen: '" + op + "' is not an image corruption");
    }
  }
  const detail::PairPlan plan(batch.labels, batch.class_count);
  detail::require_pairs(plan, cfg.variant);
  out.images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream local = rng.child(i);
    ImageTensor sample;
    if (cfg.variant == Variant::corruption_only) {
      const auto& src = batch.images[i % batch.size()];
      sample = apply_corruption(src, detail::draw_corruption(cfg, local), table);
    } else {
      const auto [ia, ib] = plan.pick(i, local);
      const ImageTensor* a = &batch.images[ia];
      const ImageTensor* b = &batch.images[ib];
      ImageTensor ca;
      ImageTensor cb;
      if (cfg.variant == Variant::r_cnc) {
        ca = apply_corruption(*a, detail::draw_corruption(cfg, local), table);
        cb = apply_corruption(*b, detail::draw_corruption(cfg, local), table);
        a = &ca;
        b = &cb;
      }
      const double lambda = cfg.lambda_law.sample(local);
      sample = apply_pbcc(*a, *b, sample_box(a->width(), a->height(), lambda, local));
      if (cfg.variant == Variant::cnc) {
        sample = apply_corruption(sample, detail::draw_corruption(cfg, local), table);
      }
    }
    out.images.push_back(std::move(sample));
    out.labels.push_back(batch.class_count + 1);
  }
  return out;
}

/// Planar counterpart of cnc_datagen using pbcc_2d and corrupt_point_2d.
/// scale_warp is taken about `centroid`, by default the batch centroid.
inline Point2Dataset cnc_datagen_2d(const Point2Dataset& batch, const GenConfig& cfg, const RngStream& rng,
                                    std::optional<Point2> centroid = std::nullopt,
                                    const SeverityTable& table = SeverityTable::defaults()) {
  cfg.validate();
  batch.validate();
  Point2Dataset out;
  out.class_count = batch.class_count;
  const std::size_t n = cfg.output_count(batch.size());
  if (n == 0) {
    return out;
  }
  if (batch.size() == 0) {
    throw std::invalid_argument("cnc_datagen_2d: empty batch");
  }
  for (const auto& op : cfg.op_pool) {
    if (uses_corruption(cfg.variant) && !is_point_corruption(op)) {
      throw std::invalid_argument("cnc_datagen_2d: '" + op + "' is not a point corruption");
    }
  }
  const Point2 center = centroid.value_or(batch.centroid());
  const detail::PairPlan plan(batch.labels, batch.class_count);
  detail::require_pairs(plan, cfg.variant);
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream local = rng.child(i);
    Point2 p;
    if (cfg.variant == Variant::corruption_only) {
      const Point2 src = batch.points[i % batch.size()];
      p = corrupt_point_2d(src, detail::draw_corruption(cfg, local), center, table);
    } else {
      const auto [ia, ib] = plan.pick(i, local);
      Point2 a = batch.points[ia];
      Point2 b = batch.points[ib];
      if (cfg.variant == Variant::r_cnc) {
        a = corrupt_point_2d(a, detail::draw_corruption(cfg, local), center, table);
        b = corrupt_point_2d(b, detail::draw_corruption(cfg, local), center, table);
      }
      p = pbcc_2d(a, b, cfg.lambda_law.sample(local));
      if (cfg.variant == Variant::cnc) {
        p = corrupt_point_2d(p, detail::draw_corruption(cfg, local), center, table);
      }
    }
    out.points.push_back(p);
    out.labels.push_back(batch.class_count + 1);
  }
  return out;
}

/// Writes each image as sample_NNNNNN.cnct plus a manifest with one
/// "filename label" line per sample.
inline void write_offline_cache(const LabeledImageSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string manifest;
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::string name = std::to_string(i);
    name = "sample_" + std::string(6 - std::min<std::size_t>(6, name.size()), '0') + name + ".cnct";
    save_raw_tensor(set.images[i], dir / name);
    manifest += name + " " + std::to_string(set.labels[i]) + "\n";
  }
  write_file(dir / "manifest.txt", manifest);
}

inline LabeledImageSet read_offline_cache(const std::filesystem::path& dir, int class_count) {
  LabeledImageSet set;
  set.class_count = class_count;
  const std::string manifest = read_file(dir / "manifest.txt");
  std::size_t start = 0;
  while (start < manifest.size()) {
    const std::size_t end = std::min(manifest.find('\n', start), manifest.size());
    const std::string line = manifest.substr(start, end - start);
    start = end + 1;
    if (line.empty()) {
      continue;
    }
    const auto sp = line.find(' ');
    if (sp == std::string::npos) {
      throw FormatError("manifest: malformed line '" + line + "'");
    }
    set.images.push_back(load_raw_tensor(dir / line.substr(0, sp)));
    set.labels.push_back(std::stoi(line.substr(sp + 1)));
  }
  set.validate();
  return set;
}

}  // namespace cnc
