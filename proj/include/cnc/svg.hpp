#pragma once

#include <string>
#include <vector>

#include "cnc/format.hpp"
#include "cnc/geometry.hpp"

namespace cnc::svg {

/// Maps a data-space box onto a pixel viewport (y axis flipped).
struct Viewport {
  geom::Box domain;
  double width = 640.0;
  double height = 640.0;
  double offset_x = 0.0;
  double offset_y = 0.0;

  Point2 map(Point2 p) const {
    return {offset_x + (p.x - domain.x0) / domain.width() * width,
            offset_y + (domain.y1 - p.y) / domain.height() * height};
  }
};

class Document {
public:
  Document(double width, double height) : width_(width), height_(height) {}

  void polygon(const Viewport& vp, const geom::Polygon& poly, const std::string& style) {
    body_ += "<polygon points=\"" + point_list(vp, poly) + "\" " + style + "/>\n";
  }

  void path(const Viewport& vp, const geom::Polygon& poly, const std::string& style) {
    std::string d;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point2 q = vp.map(poly[i]);
      d += (i == 0 ? "M" : " L") + fmt_fixed(q.x) + " " + fmt_fixed(q.y);
    }
    body_ += "<path d=\"" + d + " Z\" " + style + "/>\n";
  }

  void polyline(const Viewport& vp, const std::vector<Point2>& pts, const std::string& style) {
    body_ += "<polyline points=\"" + point_list(vp, pts) + "\" " + style + "/>\n";
  }

  void circle(const Viewport& vp, Point2 p, double r, const std::string& style) {
    const Point2 q = vp.map(p);
    body_ += "<circle cx=\"" + fmt_fixed(q.x) + "\" cy=\"" + fmt_fixed(q.y) + "\" r=\"" + fmt_fixed(r, 2) + "\" " +
             style + "/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& style) {
    body_ += "<rect x=\"" + fmt_fixed(x) + "\" y=\"" + fmt_fixed(y) + "\" width=\"" + fmt_fixed(w) + "\" height=\"" +
             fmt_fixed(h) + "\" " + style + "/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& style = "font-size=\"14\"") {
    std::string esc;
    for (char c : s) {
      if (c == '<') esc += "&lt;";
      else if (c == '>') esc += "&gt;";
      else if (c == '&') esc += "&amp;";
      else esc += c;
    }
    body_ += "<text x=\"" + fmt_fixed(x) + "\" y=\"" + fmt_fixed(y) + "\" " + style + ">" + esc + "</text>\n";
  }

  std::string str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           fmt_fixed(width_, 0) + "\" height=\"" + fmt_fixed(height_, 0) + "\" viewBox=\"0 0 " + fmt_fixed(width_, 0) +
           " " + fmt_fixed(height_, 0) + "\">\n" + body_ + "</svg>\n";
  }

private:
  static std::string point_list(const Viewport& vp, const std::vector<Point2>& pts) {
    std::string s;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point2 q = vp.map(pts[i]);
      if (i) s += ' ';
      s += fmt_fixed(q.x) + "," + fmt_fixed(q.y);
    }
    return s;
  }

  double width_;
  double height_;
  std::string body_;
};

/// Fill colors for 1-based classes; the last entry is used for the reject class.
inline std::string class_color(int label, int class_count) {
  static const std::vector<std::string> palette = {"#4daf4a", "#ffbf00", "#377eb8", "#984ea3",
                                                   "#ff7f00", "#a65628", "#f781bf", "#999999"};
  if (label == class_count + 1) return "#e41a1c";
  return palette[static_cast<std::size_t>(label - 1) % palette.size()];
}

}  // namespace cnc::svg
