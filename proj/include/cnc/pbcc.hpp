#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cnc/rng.hpp"
#include "cnc/tensor.hpp"

namespace cnc {

/// Distribution of the crop-area ratio lambda: U(lo, hi), or the constant lo
/// when lo == hi.
struct LambdaLaw {
  double lo = 0.0;
  double hi = 1.0;

  static LambdaLaw fixed(double v) { return {v, v}; }

  void validate() const {
    if (!(lo >= 0.0 && hi <= 1.0 && lo <= hi)) {
      throw std::invalid_argument("LambdaLaw: need 0 <= lo <= hi <= 1");
    }
  }

  double sample(RngStream& rng) const { return lo == hi ? lo : rng.uniform(lo, hi); }
};

/// Pasted rectangle. x/y are the top-left pixel, w/h the extent after
/// clipping to the image.
struct CropBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double lambda = 1.0;

  /// Side length before clipping: round(size * sqrt(1 - lambda)).
  static int extent(int size, double lambda) {
    return static_cast<int>(std::lround(static_cast<double>(size) * std::sqrt(1.0 - lambda)));
  }

  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
  long long pixel_count() const { return static_cast<long long>(w) * h; }

  friend bool operator==(const CropBox&, const CropBox&) = default;
};

inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
}

/// Box with the given top-left corner; extents from lambda, clipped to W x H.
inline CropBox make_box(int width, int height, double lambda, int x, int y) {
  check_lambda(lambda);
  if (width <= 0 || height <= 0 || x < 0 || y < 0 || x >= width || y >= height) {
    throw std::invalid_argument("make_box: corner outside the image");
  }
  CropBox box;
  box.x = x;
  box.y = y;
  box.lambda = lambda;
  box.w = std::min(CropBox::extent(width, lambda), width - x);
  box.h = std::min(CropBox::extent(height, lambda), height - y);
  return box;
}

/// r_x ~ U{0..W-1}, r_y ~ U{0..H-1}.
inline CropBox sample_box(int width, int height, double lambda, RngStream& rng) {
  check_lambda(lambda);
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("sample_box: image must be non-empty");
  }
  const int x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(width)));
  const int y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(height)));
  return make_box(width, height, lambda, x, y);
}

/// Pixels inside the box come from x_b, all others from x_a.
inline ImageTensor apply_pbcc(const ImageTensor& x_a, const ImageTensor& x_b, const CropBox& box) {
  if (!x_a.same_shape(x_b)) {
    throw std::invalid_argument("apply_pbcc: image dimensions differ");
  }
  ImageTensor out = x_a;
  const int x1 = std::min(box.x + box.w, x_a.width());
  const int y1 = std::min(box.y + box.h, x_a.height());
  for (int y = std::max(box.y, 0); y < y1; ++y) {
    for (int x = std::max(box.x, 0); x < x1; ++x) {
      for (int c = 0; c < x_a.channels(); ++c) {
        out.at(x, y, c) = x_b.at(x, y, c);
      }
    }
  }
  return out;
}

inline Point2 pbcc_2d(Point2 p1, Point2 p2, double lambda) {
  check_lambda(lambda);
  return {lambda * p1.x + (1.0 - lambda) * p2.x, lambda * p1.y + (1.0 - lambda) * p2.y};
}

/// Unordered label pairs (a < b) drawn from `labels`, in lexicographic order.
inline std::vector<std::pair<int, int>> label_pairs(const std::vector<int>& labels) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      pairs.emplace_back(labels[i], labels[j]);
    }
  }
  return pairs;
}

inline std::vector<std::pair<int, int>> label_pairs(int class_count) {
  std::vector<int> labels;
  for (int k = 1; k <= class_count; ++k) {
    labels.push_back(k);
  }
  return label_pairs(labels);
}

/// One PBCC sample together with its provenance.
struct PbccSample {
  ImageTensor image;
  int label = 0;  // always K + 1
  int label_a = 0;
  int label_b = 0;
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  CropBox box;
};

/// Endless stream of PBCC samples. Cycles through the K-choose-2 label pairs;
/// for each pair it picks one random image per label, draws lambda and a box,
/// and emits the mix labeled K + 1. Sample i only uses rng.child(i).
class PbccPairing {
public:
  PbccPairing(const LabeledImageSet& dataset, LambdaLaw law, RngStream rng)
      : dataset_(&dataset), law_(law), rng_(rng) {
    law_.validate();
    if (dataset.class_count < 2) {
      throw std::invalid_argument("PbccPairing: need at least two classes");
    }
    groups_ = group_by_label(dataset.labels, dataset.class_count);
    for (std::size_t k = 0; k < groups_.size(); ++k) {
      if (groups_[k].empty()) {
        throw std::invalid_argument("PbccPairing: class " + std::to_string(k + 1) + " has no images");
      }
    }
    pairs_ = label_pairs(dataset.class_count);
  }

  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  std::uint64_t emitted() const { return emitted_; }

  PbccSample next() {
    RngStream local = rng_.child(emitted_);
    const auto [la, lb] = pairs_[static_cast<std::size_t>(emitted_ % pairs_.size())];
    ++emitted_;
    const auto& ga = groups_[static_cast<std::size_t>(la - 1)];
    const auto& gb = groups_[static_cast<std::size_t>(lb - 1)];
    PbccSample s;
    s.label_a = la;
    s.label_b = lb;
    s.index_a = ga[static_cast<std::size_t>(local.uniform_index(ga.size()))];
    s.index_b = gb[static_cast<std::size_t>(local.uniform_index(gb.size()))];
    const ImageTensor& a = dataset_->images[s.index_a];
    const ImageTensor& b = dataset_->images[s.index_b];
    s.box = sample_box(a.width(), a.height(), law_.sample(local), local);
    s.image = apply_pbcc(a, b, s.box);
    s.label = dataset_->class_count + 1;
    return s;
  }

private:
  const LabeledImageSet* dataset_;
  LambdaLaw law_;
  RngStream rng_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::pair<int, int>> pairs_;
  std::uint64_t emitted_ = 0;
};

}  // namespace cnc
