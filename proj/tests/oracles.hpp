#pragma once

// Independent reference computations used as test oracles. Everything here is
// deliberately naive (quadratic, long double, or brute force) and shares no
// code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "cnc/mlp.hpp"
#include "cnc/tensor.hpp"

namespace oracle {

inline long double auroc(const std::vector<double>& id, const std::vector<double>& ood) {
  long double acc = 0;
  for (double a : id) {
    for (double b : ood) {
      if (a < b) acc += 1;
      else if (a == b) acc += 0.5L;
    }
  }
  return acc / (static_cast<long double>(id.size()) * ood.size());
}

inline long double fraction_le(const std::vector<double>& v, double t) {
  std::size_t n = 0;
  for (double s : v) n += s <= t;
  return static_cast<long double>(n) / v.size();
}

// Smallest observed ID score whose ID fraction at or below it reaches 0.95.
inline double delta95(const std::vector<double>& id) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : id) {
    std::size_t n = 0;
    for (double s : id) n += s <= t;
    if (100 * n >= 95 * id.size()) best = std::min(best, t);
  }
  return best;
}

inline long double tnr_at_tpr95(const std::vector<double>& id, const std::vector<double>& ood) {
  return 1.0L - fraction_le(ood, delta95(id));
}

// Every observed score plus both infinities as a threshold; ID iff score <= t.
inline long double detection_error(const std::vector<double>& id, const std::vector<double>& ood) {
  std::vector<double> cand(id);
  cand.insert(cand.end(), ood.begin(), ood.end());
  cand.push_back(-std::numeric_limits<double>::infinity());
  cand.push_back(std::numeric_limits<double>::infinity());
  long double best = 2;
  for (double t : cand) {
    best = std::min(best, 0.5L * (1 - fraction_le(id, t)) + 0.5L * fraction_le(ood, t));
  }
  return best;
}

struct LongForward {
  std::vector<long double> logits;
  std::vector<long double> probs;
  std::vector<std::uint8_t> pattern;
  long double min_abs_hidden = std::numeric_limits<long double>::infinity();
};

inline LongForward forward(const cnc::MlpModel& m, const std::vector<double>& x) {
  std::vector<long double> a(x.begin(), x.end());
  LongForward r;
  const auto& layers = m.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    std::vector<long double> z(static_cast<std::size_t>(L.out));
    for (int o = 0; o < L.out; ++o) {
      long double s = L.b[static_cast<std::size_t>(o)];
      for (int i = 0; i < L.in; ++i) s += static_cast<long double>(L.weight(o, i)) * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] = s;
    }
    if (l + 1 < layers.size()) {
      for (long double& v : z) {
        r.pattern.push_back(v > 0);
        r.min_abs_hidden = std::min(r.min_abs_hidden, std::fabs(v));
        v = v > 0 ? v : 0;
      }
      a = z;
    } else {
      r.logits = z;
    }
  }
  long double mx = *std::max_element(r.logits.begin(), r.logits.end());
  long double sum = 0;
  for (long double v : r.logits) sum += std::exp(v - mx);
  for (long double v : r.logits) r.probs.push_back(std::exp(v - mx) / sum);
  return r;
}

inline long double cross_entropy(const cnc::MlpModel& m, const std::vector<double>& x, int label) {
  const LongForward f = oracle::forward(m, x);
  return -std::log(f.probs[static_cast<std::size_t>(label - 1)]);
}

inline long double eq2_loss(const cnc::MlpModel& m, const cnc::Batch& id, const cnc::Batch& ood, double alpha) {
  long double a = 0, b = 0;
  for (std::size_t i = 0; i < id.size(); ++i) {
    const auto r = id.row(i);
    a += cross_entropy(m, {r.begin(), r.end()}, id.labels[i]);
  }
  for (std::size_t i = 0; i < ood.size(); ++i) {
    const auto r = ood.row(i);
    b += cross_entropy(m, {r.begin(), r.end()}, m.output_dim());
  }
  if (id.size() > 0) a /= id.size();
  if (ood.size() > 0) b /= ood.size();
  return a + alpha * b;
}

// Closest hidden pre-activation to a ReLU kink over both batches.
inline long double kink_margin(const cnc::MlpModel& m, const cnc::Batch& id, const cnc::Batch& ood) {
  long double best = std::numeric_limits<long double>::infinity();
  for (const cnc::Batch* b : {&id, &ood}) {
    for (std::size_t i = 0; i < b->size(); ++i) {
      const auto r = b->row(i);
      best = std::min(best, oracle::forward(m, std::vector<double>(r.begin(), r.end())).min_abs_hidden);
    }
  }
  return best;
}

// Central differences of eq2_loss, laid out like MlpModel (weights then biases per layer).
inline std::vector<double> fd_gradient(const cnc::MlpModel& m, const cnc::Batch& id, const cnc::Batch& ood,
                                       double alpha, double h = 1e-5) {
  std::vector<double> g;
  cnc::MlpModel work = m;
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    for (std::vector<double> cnc::Layer::*field : {&cnc::Layer::w, &cnc::Layer::b}) {
      std::vector<double>& v = work.layers()[l].*field;
      for (std::size_t k = 0; k < v.size(); ++k) {
        const double keep = v[k];
        v[k] = keep + h;
        const long double up = eq2_loss(work, id, ood, alpha);
        v[k] = keep - h;
        const long double down = eq2_loss(work, id, ood, alpha);
        v[k] = keep;
        g.push_back(static_cast<double>((up - down) / (2 * h)));
      }
    }
  }
  return g;
}

inline std::vector<double> flatten(const cnc::MlpModel& m) {
  std::vector<double> out;
  for (const cnc::Layer& l : m.layers()) {
    out.insert(out.end(), l.w.begin(), l.w.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
  return out;
}

inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-7) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::fabs(a[i] - b[i]);
    worst = std::max(worst, d / std::max({std::fabs(a[i]), std::fabs(b[i]), floor}));
  }
  return worst;
}

inline double shoelace(const std::vector<cnc::Point2>& p) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    s += static_cast<long double>(a.x) * b.y - static_cast<long double>(b.x) * a.y;
  }
  return static_cast<double>(std::fabs(s) / 2);
}

// Gift-wrapping hull (CCW), collinear points dropped.
inline std::vector<cnc::Point2> jarvis_hull(const std::vector<cnc::Point2>& pts) {
  auto orient = [](cnc::Point2 o, cnc::Point2 a, cnc::Point2 b) {
    return static_cast<long double>(a.x - o.x) * (b.y - o.y) - static_cast<long double>(a.y - o.y) * (b.x - o.x);
  };
  std::size_t start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].x < pts[start].x || (pts[i].x == pts[start].x && pts[i].y < pts[start].y)) start = i;
  }
  std::vector<cnc::Point2> hull;
  std::size_t cur = start;
  do {
    hull.push_back(pts[cur]);
    std::size_t next = (cur + 1) % pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const long double o = orient(pts[cur], pts[next], pts[i]);
      const auto d2 = [&](std::size_t k) {
        return std::hypot(pts[k].x - pts[cur].x, pts[k].y - pts[cur].y);
      };
      if (o < 0 || (o == 0 && d2(i) > d2(next))) next = i;
    }
    cur = next;
  } while (cur != start && hull.size() <= pts.size());
  return hull;
}

// Inside or on the boundary of a CCW convex polygon, with an absolute slack.
inline bool in_hull(const std::vector<cnc::Point2>& hull, cnc::Point2 p, double tol = 1e-9) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto a = hull[i];
    const auto b = hull[(i + 1) % hull.size()];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double c = ex * (p.y - a.y) - ey * (p.x - a.x);
    if (c < -tol * std::hypot(ex, ey)) return false;
  }
  return true;
}

}  // namespace oracle
