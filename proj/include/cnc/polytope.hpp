#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnc/format.hpp"
#include "cnc/geometry.hpp"
#include "cnc/io.hpp"
#include "cnc/mlp.hpp"
#include "cnc/svg.hpp"
#include "cnc/tensor.hpp"

namespace cnc {

/// y = A x + c for x in the plane; A is rows x 2, row-major.
struct AffineMap2 {
  std::vector<double> a;
  std::vector<double> c;

  std::size_t rows() const { return c.size(); }

  std::vector<double> eval(Point2 p) const {
    std::vector<double> y(c);
    for (std::size_t r = 0; r < y.size(); ++r) {
      y[r] += a[2 * r] * p.x + a[2 * r + 1] * p.y;
    }
    return y;
  }

  static AffineMap2 identity() { return {{1.0, 0.0, 0.0, 1.0}, {0.0, 0.0}}; }

  /// Composes a dense layer (no activation) on top of this map.
  AffineMap2 then(const Layer& layer) const {
    if (static_cast<std::size_t>(layer.in) != rows()) {
      throw std::invalid_argument("AffineMap2::then: layer input width mismatch");
    }
    AffineMap2 out{std::vector<double>(2 * static_cast<std::size_t>(layer.out), 0.0), layer.b};
    for (int o = 0; o < layer.out; ++o) {
      double ax = 0.0;
      double ay = 0.0;
      double cc = 0.0;
      for (int i = 0; i < layer.in; ++i) {
        const double w = layer.weight(o, i);
        ax += w * a[2 * static_cast<std::size_t>(i)];
        ay += w * a[2 * static_cast<std::size_t>(i) + 1];
        cc += w * c[static_cast<std::size_t>(i)];
      }
      out.a[2 * static_cast<std::size_t>(o)] = ax;
      out.a[2 * static_cast<std::size_t>(o) + 1] = ay;
      out.c[static_cast<std::size_t>(o)] += cc;
    }
    return out;
  }
};

struct RegionPolygon {
  geom::Polygon vertices;
  std::vector<std::uint8_t> activation_pattern;
  AffineMap2 logit_map;

  double area() const { return geom::area(vertices); }
};

struct DecisionCell {
  std::size_t parent_region = 0;
  geom::Polygon vertices;
  int argmax_class = 0;  // 1-based

  double area() const { return geom::area(vertices); }
};

/// On/off state of every hidden neuron at x, in layer order.
inline std::vector<std::uint8_t> activation_pattern(const MlpModel& model, Point2 x) {
  const double in[2] = {x.x, x.y};
  const ForwardResult fr = forward(model, in);
  std::vector<std::uint8_t> bits;
  for (std::size_t l = 0; l + 1 < fr.preacts.size(); ++l) {
    for (double v : fr.preacts[l]) bits.push_back(v > 0.0 ? 1 : 0);
  }
  return bits;
}

inline std::uint64_t pattern_hash(std::span<const std::uint8_t> bits) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bits) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline void sort_regions(std::vector<RegionPolygon>& regions) {
  for (RegionPolygon& r : regions) r.vertices = geom::canonical(std::move(r.vertices));
  std::sort(regions.begin(), regions.end(),
            [](const RegionPolygon& a, const RegionPolygon& b) { return geom::lex_less(a.vertices, b.vertices); });
}

/// Activation regions of a 2-input ReLU network over the box, canonically sorted.
inline std::vector<RegionPolygon> enumerate_regions(const MlpModel& model, const geom::Box& domain) {
  if (model.input_dim() != 2) {
    throw std::invalid_argument("enumerate_regions: model input dim must be 2");
  }
  if (!model.finite()) {
    throw std::invalid_argument("enumerate_regions: non-finite parameters");
  }
  if (!(domain.width() > 0.0 && domain.height() > 0.0) || !std::isfinite(domain.area())) {
    throw std::invalid_argument("enumerate_regions: degenerate domain");
  }

  struct Piece {
    geom::Polygon poly;
    std::vector<std::uint8_t> pattern;
    AffineMap2 map;  // input of the next layer as a function of x
  };
  std::vector<Piece> pieces{{domain.polygon(), {}, AffineMap2::identity()}};
  const auto& layers = model.layers();

  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    std::vector<Piece> next;
    for (Piece& piece : pieces) {
      const AffineMap2 pre = piece.map.then(layers[l]);
      std::vector<geom::Polygon> parts{std::move(piece.poly)};
      for (std::size_t j = 0; j < pre.rows(); ++j) {
        const geom::Line line{{pre.a[2 * j], pre.a[2 * j + 1]}, pre.c[j]};
        std::vector<geom::Polygon> cut;
        cut.reserve(parts.size() + 1);
        for (const geom::Polygon& p : parts) {
          geom::SplitResult s = geom::split_polygon(p, line);
          if (!s.negative.empty()) cut.push_back(std::move(s.negative));
          if (!s.positive.empty()) cut.push_back(std::move(s.positive));
        }
        parts = std::move(cut);
      }
      for (geom::Polygon& p : parts) {
        const Point2 mid = geom::centroid(p);
        const std::vector<double> z = pre.eval(mid);
        Piece child{std::move(p), piece.pattern, pre};
        for (std::size_t j = 0; j < z.size(); ++j) {
          const bool on = z[j] > 0.0;
          child.pattern.push_back(on ? 1 : 0);
          if (!on) {
            child.map.a[2 * j] = 0.0;
            child.map.a[2 * j + 1] = 0.0;
            child.map.c[j] = 0.0;
          }
        }
        next.push_back(std::move(child));
      }
    }
    pieces = std::move(next);
  }

  std::vector<RegionPolygon> out;
  out.reserve(pieces.size());
  for (Piece& p : pieces) {
    out.push_back({std::move(p.poly), std::move(p.pattern), p.map.then(layers.back())});
  }
  sort_regions(out);
  return out;
}

namespace detail {

inline int argmax_of(const std::vector<double>& z) {
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

}  // namespace detail

/// Splits every region into cells of constant argmax class.
inline std::vector<DecisionCell> decision_cells(const std::vector<RegionPolygon>& regions) {
  std::vector<DecisionCell> cells;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const AffineMap2& map = regions[r].logit_map;
    std::vector<geom::Polygon> stack{regions[r].vertices};
    std::vector<DecisionCell> local;
    int guard = 0;
    while (!stack.empty()) {
      geom::Polygon poly = std::move(stack.back());
      stack.pop_back();
      std::vector<std::vector<double>> z;
      double scale = 1.0;
      for (const Point2& v : poly) {
        z.push_back(map.eval(v));
        for (double x : z.back()) scale = std::max(scale, std::fabs(x));
      }
      const double tol = 1e-9 * scale;
      const std::size_t k = map.rows();
      // A class within tol of the max at every vertex is the max on the whole polygon.
      int winner = -1;
      double best = -std::numeric_limits<double>::infinity();
      const std::vector<double> zc = map.eval(geom::centroid(poly));
      for (std::size_t c = 0; c < k; ++c) {
        bool ok = true;
        for (const auto& zv : z) {
          if (zv[c] < *std::max_element(zv.begin(), zv.end()) - tol) {
            ok = false;
            break;
          }
        }
        if (ok && zc[c] > best) {
          best = zc[c];
          winner = static_cast<int>(c);
        }
      }
      if (winner < 0 && ++guard < 100000) {
        const int i = detail::argmax_of(z[0]);
        int j = -1;
        for (const auto& zv : z) {
          const int m = detail::argmax_of(zv);
          if (zv[static_cast<std::size_t>(i)] < zv[static_cast<std::size_t>(m)] - tol) {
            j = m;
            break;
          }
        }
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        const geom::Line line{{map.a[2 * ui] - map.a[2 * uj], map.a[2 * ui + 1] - map.a[2 * uj + 1]},
                              map.c[ui] - map.c[uj]};
        geom::SplitResult s = geom::split_polygon(poly, line);
        if (!s.negative.empty() && !s.positive.empty()) {
          stack.push_back(std::move(s.negative));
          stack.push_back(std::move(s.positive));
          continue;
        }
        // The competing line only grazes the polygon; fall through.
      }
      if (winner < 0) winner = detail::argmax_of(zc);
      local.push_back({r, geom::canonical(std::move(poly)), winner + 1});
    }
    std::sort(local.begin(), local.end(),
              [](const DecisionCell& a, const DecisionCell& b) { return geom::lex_less(a.vertices, b.vertices); });
    for (DecisionCell& c : local) cells.push_back(std::move(c));
  }
  return cells;
}

struct RegionFlags {
  bool has_id_cell = false;
  bool contains_id_point = false;

  bool id_empty() const { return has_id_cell && !contains_id_point; }
};

inline std::vector<RegionFlags> region_flags(const std::vector<RegionPolygon>& regions,
                                             const std::vector<DecisionCell>& cells,
                                             std::span<const Point2> id_points, int class_count) {
  std::vector<RegionFlags> flags(regions.size());
  for (const DecisionCell& c : cells) {
    if (c.parent_region >= regions.size()) {
      throw std::invalid_argument("region_flags: cell refers to unknown region");
    }
    if (c.argmax_class >= 1 && c.argmax_class <= class_count) {
      flags[c.parent_region].has_id_cell = true;
    }
  }
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const geom::Polygon& poly = regions[r].vertices;
    double x0 = poly[0].x, x1 = poly[0].x, y0 = poly[0].y, y1 = poly[0].y;
    for (const Point2& v : poly) {
      x0 = std::min(x0, v.x);
      x1 = std::max(x1, v.x);
      y0 = std::min(y0, v.y);
      y1 = std::max(y1, v.y);
    }
    for (const Point2& p : id_points) {
      if (p.x < x0 - 1e-9 || p.x > x1 + 1e-9 || p.y < y0 - 1e-9 || p.y > y1 + 1e-9) continue;
      if (geom::contains(poly, p, 1e-9)) {
        flags[r].contains_id_point = true;
        break;
      }
    }
  }
  return flags;
}

enum class AreaMetric { region, id_cell };

inline std::string to_string(AreaMetric m) { return m == AreaMetric::region ? "region" : "id_cell"; }

inline AreaMetric parse_area_metric(std::string_view s) {
  if (s == "region") return AreaMetric::region;
  if (s == "id_cell") return AreaMetric::id_cell;
  throw std::invalid_argument("unknown polytope metric '" + std::string(s) + "'");
}

/// Total area of regions that are (fully or partially) classified ID yet hold
/// no ID training point. With AreaMetric::id_cell only the ID-class cells of
/// such regions are counted.
inline double id_empty_polytope_area(const std::vector<RegionPolygon>& regions, const std::vector<DecisionCell>& cells,
                                     std::span<const Point2> id_points, int class_count,
                                     AreaMetric metric = AreaMetric::region) {
  const std::vector<RegionFlags> flags = region_flags(regions, cells, id_points, class_count);
  double total = 0.0;
  if (metric == AreaMetric::region) {
    for (std::size_t r = 0; r < regions.size(); ++r) {
      if (flags[r].id_empty()) total += regions[r].area();
    }
  } else {
    for (const DecisionCell& c : cells) {
      if (flags[c.parent_region].id_empty() && c.argmax_class >= 1 && c.argmax_class <= class_count) {
        total += c.area();
      }
    }
  }
  return total;
}

inline std::string regions_csv(const std::vector<RegionPolygon>& regions, const std::vector<RegionFlags>& flags) {
  std::string out = csv_row({"region_id", "area", "pattern_hash", "has_id_cell", "contains_id_point"});
  for (std::size_t r = 0; r < regions.size(); ++r) {
    char hex[17];
    const std::uint64_t h = pattern_hash(regions[r].activation_pattern);
    for (int i = 0; i < 16; ++i) hex[i] = "0123456789abcdef"[(h >> (60 - 4 * i)) & 0xf];
    hex[16] = '\0';
    out += csv_row({std::to_string(r), fmt_double(regions[r].area()), hex, flags[r].has_id_cell ? "1" : "0",
                    flags[r].contains_id_point ? "1" : "0"});
  }
  return out;
}

inline svg::Viewport complex_viewport(const geom::Box& domain, double width = 640.0) {
  return {domain, width, width * domain.height() / domain.width(), 0.0, 0.0};
}

/// Cells as filled paths, region outlines as polygons (white when ID-empty),
/// training points as circles.
inline std::string render_complex_svg(const std::vector<RegionPolygon>& regions, const std::vector<DecisionCell>& cells,
                                      const Point2Dataset& points, const geom::Box& domain, int class_count) {
  const svg::Viewport vp = complex_viewport(domain);
  const std::vector<RegionFlags> flags = region_flags(regions, cells, points.points, class_count);
  svg::Document doc(vp.width, vp.height);
  for (const DecisionCell& c : cells) {
    doc.path(vp, c.vertices, "fill=\"" + svg::class_color(c.argmax_class, class_count) + "\" fill-opacity=\"0.45\" stroke=\"none\"");
  }
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const std::string fill = flags[r].id_empty() ? "fill=\"#ffffff\"" : "fill=\"none\"";
    doc.polygon(vp, regions[r].vertices, fill + " stroke=\"#333333\" stroke-width=\"0.5\"");
  }
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    doc.circle(vp, points.points[i], 2.0,
               "fill=\"" + svg::class_color(points.labels[i], class_count) + "\" stroke=\"#000000\" stroke-width=\"0.3\"");
  }
  return doc.str();
}

inline void export_complex_svg(const std::vector<RegionPolygon>& regions, const std::vector<DecisionCell>& cells,
                               const Point2Dataset& points, const geom::Box& domain, int class_count,
                               const std::filesystem::path& path) {
  write_file(path, render_complex_svg(regions, cells, points, domain, class_count));
}

}  // namespace cnc
