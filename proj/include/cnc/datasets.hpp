#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cnc/rng.hpp"
#include "cnc/tensor.hpp"

namespace cnc {

// Arc parameterization shared by two_moons and its tests.
// Class 1: (cos t, sin t); class 2: (1 - cos t, 0.5 - sin t), t in [0, pi].
inline Point2 upper_moon(double t) { return {std::cos(t), std::sin(t)}; }
inline Point2 lower_moon(double t) { return {1.0 - std::cos(t), 0.5 - std::sin(t)}; }

/// Two interleaved unit semicircles with isotropic Gaussian jitter.
/// Arc positions are uniform in angle. Labels 1 (upper) and 2 (lower).
inline Point2Dataset two_moons(int n_per_class, double noise_sigma, RngStream& rng) {
  if (n_per_class < 1) {
    throw std::invalid_argument("two_moons: n_per_class must be >= 1");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("two_moons: noise_sigma must be >= 0");
  }
  Point2Dataset ds;
  ds.class_count = 2;
  ds.points.reserve(2 * static_cast<std::size_t>(n_per_class));
  for (int label = 1; label <= 2; ++label) {
    for (int i = 0; i < n_per_class; ++i) {
      const double t = rng.uniform(0.0, std::numbers::pi);
      Point2 p = label == 1 ? upper_moon(t) : lower_moon(t);
      const double dx = rng.normal();
      const double dy = rng.normal();
      p.x += noise_sigma * dx;
      p.y += noise_sigma * dy;
      ds.points.push_back(p);
      ds.labels.push_back(label);
    }
  }
  return ds;
}

/// Isotropic Gaussian blobs, one per center, labels 1..k.
inline Point2Dataset gaussian_clusters_2d(int k, int n_per_class, const std::vector<Point2>& centers,
                                          double sigma, RngStream& rng) {
  if (k < 2 || static_cast<std::size_t>(k) != centers.size()) {
    throw std::invalid_argument("gaussian_clusters_2d: k must equal the number of centers (>= 2)");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("gaussian_clusters_2d: sigma must be > 0");
  }
  if (n_per_class < 1) {
    throw std::invalid_argument("gaussian_clusters_2d: n_per_class must be >= 1");
  }
  Point2Dataset ds;
  ds.class_count = k;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      const double dx = rng.normal();
      const double dy = rng.normal();
      ds.points.push_back({centers[static_cast<std::size_t>(c)].x + sigma * dx,
                           centers[static_cast<std::size_t>(c)].y + sigma * dy});
      ds.labels.push_back(c + 1);
    }
  }
  return ds;
}

/// Four blobs on the corners of a square of side `side` centered at the origin.
inline std::vector<Point2> square_corner_centers(double side = 2.0) {
  const double h = side / 2.0;
  return {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
}

/// k centers evenly spaced on a circle, the first on the positive x axis.
inline std::vector<Point2> circle_centers(int k, double radius) {
  std::vector<Point2> out;
  for (int i = 0; i < k; ++i) {
    const double t = 2.0 * std::numbers::pi * i / k;
    out.push_back({radius * std::cos(t), radius * std::sin(t)});
  }
  return out;
}

/// Root-mean-square distance of the points from their centroid.
inline double rms_spread(const Point2Dataset& ds) {
  if (ds.points.empty()) {
    throw std::invalid_argument("rms_spread: empty dataset");
  }
  const Point2 c = ds.centroid();
  double acc = 0.0;
  for (const Point2& p : ds.points) acc += dot(p - c, p - c);
  return std::sqrt(acc / static_cast<double>(ds.points.size()));
}

/// n points at uniform angle on the circle of the given radius.
inline std::vector<Point2> ring_points(Point2 center, double radius, int n, RngStream& rng) {
  if (n < 0 || !(radius >= 0.0)) {
    throw std::invalid_argument("ring_points: need n >= 0 and radius >= 0");
  }
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    out.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
  }
  return out;
}

/// n points uniform in [x0, x1] x [y0, y1].
inline std::vector<Point2> box_points(double x0, double y0, double x1, double y1, int n, RngStream& rng) {
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(x0, x1);
    out.push_back({x, rng.uniform(y0, y1)});
  }
  return out;
}

}  // namespace cnc
