#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cnc {

/// W x H x C image with intensities in [0, 1], stored row-major with the
/// channels of each pixel interleaved: index = (y * W + x) * C + c.
class ImageTensor {
public:
  ImageTensor() = default;

  ImageTensor(int width, int height, int channels, float fill = 0.0f)
      : width_(width), height_(height), channels_(channels) {
    check_dims(width, height, channels);
    data_.assign(element_count(width, height, channels), fill);
    check_range();
  }

  ImageTensor(int width, int height, int channels, std::vector<float> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height, channels);
    if (data_.size() != element_count(width, height, channels)) {
      throw std::invalid_argument("ImageTensor: data length does not match W*H*C");
    }
    check_range();
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool same_shape(const ImageTensor& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  /// Clamps every value into [0, 1]; NaN becomes 0.
  void clamp() {
    for (float& v : data_) {
      v = std::isnan(v) ? 0.0f : std::fmin(1.0f, std::fmax(0.0f, v));
    }
  }

  void check_range() const {
    for (float v : data_) {
      if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
        throw std::domain_error("ImageTensor: intensity outside [0,1]");
      }
    }
  }

  std::vector<double> flatten() const { return {data_.begin(), data_.end()}; }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

  static std::size_t element_count(int width, int height, int channels) {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(channels);
  }

private:
  static void check_dims(int width, int height, int channels) {
    if (width <= 0 || height <= 0 || channels <= 0) {
      throw std::invalid_argument("ImageTensor: dimensions must be positive");
    }
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

/// Labeled planar points. Labels are 1-based; class_count + 1 is the reject class.
struct Point2Dataset {
  std::vector<Point2> points;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return points.size(); }

  void validate() const {
    if (points.size() != labels.size()) {
      throw std::invalid_argument("Point2Dataset: points/labels length mismatch");
    }
    for (const Point2& p : points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw std::domain_error("Point2Dataset: non-finite coordinate");
      }
    }
    for (int l : labels) {
      if (l < 1 || l > class_count + 1) {
        throw std::invalid_argument("Point2Dataset: label out of range");
      }
    }
  }

  Point2 centroid() const {
    Point2 c;
    if (points.empty()) {
      return c;
    }
    for (const Point2& p : points) {
      c = c + p;
    }
    return (1.0 / static_cast<double>(points.size())) * c;
  }
};

struct LabeledImageSet {
  std::vector<ImageTensor> images;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return images.size(); }

  void validate() const {
    if (images.size() != labels.size()) {
      throw std::invalid_argument("LabeledImageSet: images/labels length mismatch");
    }
    for (int l : labels) {
      if (l < 1 || l > class_count + 1) {
        throw std::invalid_argument("LabeledImageSet: label out of range");
      }
    }
  }
};

/// Indices of samples grouped by label, for labels 1..class_count.
/// Box-filter downsampling by an integer factor; trailing rows/columns that do
/// not fill a whole block are dropped.
inline ImageTensor downsample(const ImageTensor& img, int factor) {
  if (factor < 1) {
    throw std::invalid_argument("downsample: factor must be >= 1");
  }
  if (factor == 1) return img;
  const int w = img.width() / factor;
  const int h = img.height() / factor;
  if (w < 1 || h < 1) {
    throw std::invalid_argument("downsample: factor larger than the image");
  }
  ImageTensor out(w, h, img.channels());
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) acc += img.at(x * factor + dx, y * factor + dy, c);
        }
        out.at(x, y, c) = static_cast<float>(std::min(1.0, acc * inv));
      }
    }
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> group_by_label(std::span<const int> labels,
                                                            int class_count) {
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l >= 1 && l <= class_count) {
      groups[static_cast<std::size_t>(l - 1)].push_back(i);
    }
  }
  return groups;
}

}  // namespace cnc
