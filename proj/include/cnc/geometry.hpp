#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cnc/tensor.hpp"

namespace cnc::geom {

/// Convex polygon, vertices counterclockwise, no repeated closing vertex.
using Polygon = std::vector<Point2>;

inline constexpr double kVertexEps = 1e-9;
inline constexpr double kMinArea = 1e-12;

/// Points p with normal . p + offset = 0. The negative side is where the
/// expression is < 0.
struct Line {
  Point2 normal;
  double offset = 0.0;

  double eval(Point2 p) const { return dot(normal, p) + offset; }
};

struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }

  Polygon polygon() const { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

  /// Bounding box of the points, scaled by `factor` about its center.
  static Box around(const std::vector<Point2>& pts, double factor) {
    if (pts.empty()) {
      throw std::invalid_argument("Box::around: no points");
    }
    Box b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
    for (const Point2& p : pts) {
      b.x0 = std::min(b.x0, p.x);
      b.y0 = std::min(b.y0, p.y);
      b.x1 = std::max(b.x1, p.x);
      b.y1 = std::max(b.y1, p.y);
    }
    const double cx = 0.5 * (b.x0 + b.x1);
    const double cy = 0.5 * (b.y0 + b.y1);
    const double hx = 0.5 * factor * std::max(b.width(), 1e-6);
    const double hy = 0.5 * factor * std::max(b.height(), 1e-6);
    return {cx - hx, cy - hy, cx + hx, cy + hy};
  }
};

inline double signed_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    s += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * s;
}

inline double area(const Polygon& poly) { return std::fabs(signed_area(poly)); }

/// Area centroid; falls back to the vertex mean for degenerate input.
inline Point2 centroid(const Polygon& poly) {
  if (poly.empty()) {
    return {};
  }
  const double a = signed_area(poly);
  if (std::fabs(a) < 1e-300) {
    Point2 m;
    for (const Point2& p : poly) m = m + p;
    return (1.0 / static_cast<double>(poly.size())) * m;
  }
  // Relative to the first vertex to limit cancellation.
  const Point2 o = poly[0];
  double cx = 0.0;
  double cy = 0.0;
  double a2 = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point2 p = poly[i] - o;
    const Point2 q = poly[(i + 1) % n] - o;
    const double w = cross(p, q);
    a2 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  return {o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2)};
}

/// Point in convex CCW polygon, boundary included within `tol`.
inline bool contains(const Polygon& poly, Point2 p, double tol = 1e-9) {
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point2 a = poly[i];
    const Point2 e = poly[(i + 1) % n] - a;
    const double len = norm(e);
    if (len == 0.0) continue;
    if (cross(e, p - a) / len < -tol) {
      return false;
    }
  }
  return true;
}

inline bool is_convex_ccw(const Polygon& poly, double tol = 1e-9) {
  if (poly.size() < 3) return false;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[(i + 1) % n];
    const Point2 c = poly[(i + 2) % n];
    if (cross(b - a, c - b) < -tol) return false;
  }
  return signed_area(poly) > 0.0;
}

namespace detail {

inline Polygon cleanup(Polygon poly) {
  Polygon out;
  out.reserve(poly.size());
  for (const Point2& p : poly) {
    if (out.empty() || norm(p - out.back()) > 1e-12) {
      out.push_back(p);
    }
  }
  while (out.size() > 1 && norm(out.front() - out.back()) <= 1e-12) {
    out.pop_back();
  }
  if (out.size() < 3 || signed_area(out) < kMinArea) {
    return {};
  }
  return out;
}

}  // namespace detail

struct SplitResult {
  Polygon negative;
  Polygon positive;
};

/// Cuts a convex polygon by a line. Vertices within `eps` (in distance) of the
/// line belong to both sides; pieces below the minimum area are returned empty.
inline SplitResult split_polygon(const Polygon& poly, const Line& line, double eps = kVertexEps) {
  if (poly.size() < 3 || signed_area(poly) <= kMinArea) {
    throw std::invalid_argument("split_polygon: degenerate polygon");
  }
  const double nrm = norm(line.normal);
  if (nrm == 0.0) {
    if (line.offset > 0.0) return {{}, poly};
    return {poly, {}};
  }
  const std::size_t n = poly.size();
  std::vector<double> d(n);
  bool any_neg = false;
  bool any_pos = false;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = line.eval(poly[i]) / nrm;
    any_neg = any_neg || d[i] < -eps;
    any_pos = any_pos || d[i] > eps;
  }
  if (!any_pos) return {poly, {}};
  if (!any_neg) return {{}, poly};

  Polygon neg;
  Polygon pos;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const Point2 a = poly[i];
    const Point2 b = poly[j];
    const double da = d[i];
    const double db = d[j];
    if (da <= eps) neg.push_back(a);
    if (da >= -eps) pos.push_back(a);
    if ((da < -eps && db > eps) || (da > eps && db < -eps)) {
      const double t = da / (da - db);
      const Point2 x{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      neg.push_back(x);
      pos.push_back(x);
    }
  }
  return {detail::cleanup(std::move(neg)), detail::cleanup(std::move(pos))};
}

/// Rotates the vertex list so it starts at the lexicographically smallest vertex.
inline Polygon canonical(Polygon poly) {
  if (poly.empty()) return poly;
  const auto it = std::min_element(poly.begin(), poly.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::rotate(poly.begin(), it, poly.end());
  return poly;
}

inline bool lex_less(const Polygon& a, const Polygon& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](Point2 p, Point2 q) {
    return p.x < q.x || (p.x == q.x && p.y < q.y);
  });
}

/// Convex hull by monotone chain, counterclockwise, collinear points dropped.
inline Polygon convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace cnc::geom
