#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnc/format.hpp"

namespace cnc {

/// OOD scores F+(x)[K+1]; higher means more OOD.
struct ScoreSet {
  std::vector<double> id_scores;
  std::vector<double> ood_scores;

  void validate(bool need_both = true) const {
    if (need_both && (id_scores.empty() || ood_scores.empty())) {
      throw std::invalid_argument("ScoreSet: both score arrays must be non-empty");
    }
    for (const auto* v : {&id_scores, &ood_scores}) {
      for (double s : *v) {
        if (!(s >= 0.0 && s <= 1.0)) {
          throw std::domain_error("ScoreSet: score outside [0,1]");
        }
      }
    }
  }
};

enum class Decision { id, ood };

inline constexpr std::size_t kMinDeltaSamples = 20;

/// Smallest delta (one of the ID scores) such that at least 95% of the ID
/// scores satisfy score <= delta.
inline double select_delta(std::span<const double> id_scores) {
  if (id_scores.size() < kMinDeltaSamples) {
    throw std::invalid_argument("select_delta: need at least 20 ID scores");
  }
  std::vector<double> s(id_scores.begin(), id_scores.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const std::size_t k = (95 * n + 99) / 100;  // ceil(0.95 n)
  return s[k - 1];
}

/// OOD iff score > delta.
inline Decision detect(double score, double delta) { return score > delta ? Decision::ood : Decision::id; }

/// argmax over the first K entries of a (K+1)-vector; ties go to the lower
/// index. Returns a 1-based class.
inline int classify_id(std::span<const double> probs) {
  if (probs.size() < 2) {
    throw std::invalid_argument("classify_id: need a vector of length K+1 >= 2");
  }
  const std::size_t k = probs.size() - 1;
  std::size_t best = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (probs[i] > probs[best]) {
      best = i;
    }
  }
  return static_cast<int>(best) + 1;
}

inline double tpr_at(std::span<const double> id_scores, double delta) {
  std::size_t pass = 0;
  for (double s : id_scores) {
    pass += s <= delta ? 1 : 0;
  }
  return static_cast<double>(pass) / static_cast<double>(id_scores.size());
}

/// P(id < ood) + 0.5 P(id == ood) over all ID/OOD pairs, via one sort.
inline double auroc(const ScoreSet& scores) {
  scores.validate();
  struct Item {
    double score;
    bool ood;
  };
  std::vector<Item> all;
  all.reserve(scores.id_scores.size() + scores.ood_scores.size());
  for (double s : scores.id_scores) all.push_back({s, false});
  for (double s : scores.ood_scores) all.push_back({s, true});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
  // Count pairs (id, ood) with id < ood, and ties, in units of half-pairs so
  // the sum stays an exact integer.
  unsigned long long half_pairs = 0;
  std::size_t id_below = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::size_t id_here = 0;
    std::size_t ood_here = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].ood ? ood_here : id_here) += 1;
      ++j;
    }
    half_pairs += 2ULL * ood_here * id_below + static_cast<unsigned long long>(ood_here) * id_here;
    id_below += id_here;
    i = j;
  }
  const double total = 2.0 * static_cast<double>(scores.id_scores.size()) * static_cast<double>(scores.ood_scores.size());
  return static_cast<double>(half_pairs) / total;
}

/// Fraction of OOD scores above the 95%-TPR threshold of the ID scores.
inline double tnr_at_tpr95(const ScoreSet& scores) {
  scores.validate();
  const double delta = select_delta(scores.id_scores);
  std::size_t caught = 0;
  for (double s : scores.ood_scores) {
    caught += s > delta ? 1 : 0;
  }
  return static_cast<double>(caught) / static_cast<double>(scores.ood_scores.size());
}

/// min over thresholds t in the observed scores of 0.5 (1 - TPR(t)) + 0.5 FPR(t),
/// where a sample is predicted ID iff score <= t.
inline double detection_error(const ScoreSet& scores) {
  scores.validate();
  std::vector<double> id(scores.id_scores);
  std::vector<double> ood(scores.ood_scores);
  std::sort(id.begin(), id.end());
  std::sort(ood.begin(), ood.end());
  std::vector<double> cand(id);
  cand.insert(cand.end(), ood.begin(), ood.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  const double n_id = static_cast<double>(id.size());
  const double n_ood = static_cast<double>(ood.size());
  double best = std::numeric_limits<double>::infinity();
  std::size_t i_id = 0;
  std::size_t i_ood = 0;
  for (double t : cand) {
    while (i_id < id.size() && id[i_id] <= t) ++i_id;
    while (i_ood < ood.size() && ood[i_ood] <= t) ++i_ood;
    const double tpr = static_cast<double>(i_id) / n_id;
    const double fpr = static_cast<double>(i_ood) / n_ood;
    best = std::min(best, 0.5 * (1.0 - tpr) + 0.5 * fpr);
  }
  return best;
}

/// ROC points (FPR, TPR) for every distinct threshold, from (0,0) to (1,1).
inline std::vector<std::pair<double, double>> roc_curve(const ScoreSet& scores) {
  scores.validate();
  std::vector<double> cand(scores.id_scores);
  cand.insert(cand.end(), scores.ood_scores.begin(), scores.ood_scores.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::vector<double> id(scores.id_scores);
  std::vector<double> ood(scores.ood_scores);
  std::sort(id.begin(), id.end());
  std::sort(ood.begin(), ood.end());
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  std::size_t i_id = 0;
  std::size_t i_ood = 0;
  for (double t : cand) {
    while (i_id < id.size() && id[i_id] <= t) ++i_id;
    while (i_ood < ood.size() && ood[i_ood] <= t) ++i_ood;
    pts.emplace_back(static_cast<double>(i_ood) / static_cast<double>(ood.size()),
                     static_cast<double>(i_id) / static_cast<double>(id.size()));
  }
  return pts;
}

/// -sum p ln p with 0 ln 0 = 0.
inline double entropy(std::span<const double> probs) {
  double sum = 0.0;
  double h = 0.0;
  for (double p : probs) {
    if (p < 0.0 || !std::isfinite(p)) {
      throw std::invalid_argument("entropy: probabilities must be finite and non-negative");
    }
    sum += p;
    if (p > 0.0) {
      h -= p * std::log(p);
    }
  }
  if (std::fabs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("entropy: probabilities must sum to 1");
  }
  return h;
}

/// Mean over points of the Euclidean distance to the nearest other point.
inline double diversity(const std::vector<std::vector<double>>& vectors) {
  if (vectors.size() < 2) {
    throw std::invalid_argument("diversity: need at least two vectors");
  }
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw std::invalid_argument("diversity: vectors differ in length");
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < vectors.size(); ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = vectors[i][k] - vectors[j][k];
        d2 += d * d;
      }
      best = std::min(best, d2);
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(vectors.size());
}

/// Expected calibration error over `bins` equal-width confidence bins.
/// Confidence is the max probability, the prediction its 1-based argmax.
inline double ece(const std::vector<std::vector<double>>& probs, std::span<const int> labels, int bins = 15) {
  if (probs.empty() || probs.size() != labels.size()) {
    throw std::invalid_argument("ece: need equally many, non-zero probability vectors and labels");
  }
  if (bins < 1) {
    throw std::invalid_argument("ece: bins must be >= 1");
  }
  std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> acc_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& p = probs[i];
    const auto it = std::max_element(p.begin(), p.end());
    const double conf = *it;
    const int pred = static_cast<int>(it - p.begin()) + 1;
    const auto b = static_cast<std::size_t>(std::clamp(static_cast<int>(std::floor(conf * bins)), 0, bins - 1));
    conf_sum[b] += conf;
    acc_sum[b] += pred == labels[i] ? 1.0 : 0.0;
    ++count[b];
  }
  double e = 0.0;
  const double n = static_cast<double>(probs.size());
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0) continue;
    const double nb = static_cast<double>(count[b]);
    e += (nb / n) * std::fabs(acc_sum[b] / nb - conf_sum[b] / nb);
  }
  return e;
}

struct SubfunctionTerm {
  double probability = 0.0;  // P(h_i)
  double gap = 0.0;          // (1 / P(h_i)) sqrt(ln(2/delta) / 2N); +inf when P = 0
};

/// Per-region smoothed probability mass and generalization-gap term.
/// `kernel` is a row-major C x C matrix of non-negative weights k(h_i, h_j);
/// an empty kernel means the identity.
inline std::vector<SubfunctionTerm> subfunction_bound(std::span<const double> region_counts,
                                                      std::span<const double> kernel, double delta_conf) {
  const std::size_t c = region_counts.size();
  if (c == 0) {
    throw std::invalid_argument("subfunction_bound: no regions");
  }
  if (!(delta_conf > 0.0 && delta_conf <= 1.0)) {
    throw std::invalid_argument("subfunction_bound: delta must be in (0, 1]");
  }
  if (!kernel.empty() && kernel.size() != c * c) {
    throw std::invalid_argument("subfunction_bound: kernel must be C x C");
  }
  double total_n = 0.0;
  for (double n : region_counts) {
    if (n < 0.0) throw std::invalid_argument("subfunction_bound: negative count");
    total_n += n;
  }
  if (!(total_n > 0.0)) {
    throw std::invalid_argument("subfunction_bound: total sample count must be positive");
  }
  auto k = [&](std::size_t i, std::size_t j) {
    if (kernel.empty()) return i == j ? 1.0 : 0.0;
    const double v = kernel[i * c + j];
    if (v < 0.0) throw std::invalid_argument("subfunction_bound: negative kernel weight");
    return v;
  };
  std::vector<double> mass(c, 0.0);
  double denom = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      mass[i] += region_counts[j] * k(i, j);
    }
    denom += mass[i];
  }
  if (!(denom > 0.0)) {
    throw std::invalid_argument("subfunction_bound: zero denominator");
  }
  const double root = std::sqrt(std::log(2.0 / delta_conf) / (2.0 * total_n));
  std::vector<SubfunctionTerm> out(c);
  for (std::size_t i = 0; i < c; ++i) {
    out[i].probability = mass[i] / denom;
    out[i].gap = out[i].probability > 0.0 ? root / out[i].probability : std::numeric_limits<double>::infinity();
  }
  return out;
}

struct Confusion {
  std::size_t tp = 0;  // ID kept as ID
  std::size_t fp = 0;  // OOD accepted as ID
  std::size_t fn = 0;  // ID rejected as OOD
  std::size_t tn = 0;  // OOD rejected
  std::size_t total() const { return tp + fp + fn + tn; }
};

struct EvalReport {
  double delta = 0.0;
  double tnr_at_tpr95 = 0.0;
  double auroc = 0.0;
  double detection_error = 0.0;
  double id_accuracy = 0.0;
  Confusion confusion;
  double ece = 0.0;
  double diversity = 0.0;
  double entropy = 0.0;
};

/// Full report for a (K+1)-class model. `id_probs`/`ood_probs` are softmax
/// vectors of length K+1, `id_logits`/`ood_logits` the raw logits. Diversity
/// and entropy are taken over the OOD set restricted to the first K classes;
/// ECE over the ID set.
inline EvalReport evaluate(const std::vector<std::vector<double>>& id_probs, std::span<const int> id_labels,
                           const std::vector<std::vector<double>>& ood_probs,
                           const std::vector<std::vector<double>>& ood_logits, int ece_bins = 15) {
  if (id_probs.size() != id_labels.size()) {
    throw std::invalid_argument("evaluate: ID probabilities and labels differ in length");
  }
  ScoreSet scores;
  for (const auto& p : id_probs) scores.id_scores.push_back(p.back());
  for (const auto& p : ood_probs) scores.ood_scores.push_back(p.back());
  scores.validate();
  EvalReport r;
  r.delta = select_delta(scores.id_scores);
  r.tnr_at_tpr95 = tnr_at_tpr95(scores);
  r.auroc = auroc(scores);
  r.detection_error = detection_error(scores);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < id_probs.size(); ++i) {
    const bool keep = detect(scores.id_scores[i], r.delta) == Decision::id;
    (keep ? r.confusion.tp : r.confusion.fn) += 1;
    correct += classify_id(id_probs[i]) == id_labels[i] ? 1 : 0;
  }
  for (double s : scores.ood_scores) {
    (detect(s, r.delta) == Decision::id ? r.confusion.fp : r.confusion.tn) += 1;
  }
  r.id_accuracy = static_cast<double>(correct) / static_cast<double>(id_probs.size());
  r.ece = ece(id_probs, id_labels, ece_bins);
  std::vector<std::vector<double>> k_logits;
  double h = 0.0;
  for (const auto& z : ood_logits) {
    std::vector<double> head(z.begin(), z.end() - 1);
    const double mx = *std::max_element(head.begin(), head.end());
    std::vector<double> p(head.size());
    double s = 0.0;
    for (std::size_t i = 0; i < head.size(); ++i) {
      p[i] = std::exp(head[i] - mx);
      s += p[i];
    }
    for (double& v : p) v /= s;
    h += entropy(p);
    k_logits.push_back(std::move(head));
  }
  r.entropy = ood_logits.empty() ? 0.0 : h / static_cast<double>(ood_logits.size());
  r.diversity = k_logits.size() >= 2 ? diversity(k_logits) : 0.0;
  return r;
}

inline std::string report_csv(const EvalReport& r) {
  std::string out = csv_row({"delta", "tnr_at_tpr95", "auroc", "detection_error", "id_accuracy", "tp", "fp", "fn",
                             "tn", "ece", "diversity", "entropy"});
  out += csv_row({fmt_double(r.delta), fmt_double(r.tnr_at_tpr95), fmt_double(r.auroc), fmt_double(r.detection_error),
                  fmt_double(r.id_accuracy), std::to_string(r.confusion.tp), std::to_string(r.confusion.fp),
                  std::to_string(r.confusion.fn), std::to_string(r.confusion.tn), fmt_double(r.ece),
                  fmt_double(r.diversity), fmt_double(r.entropy)});
  return out;
}

inline std::string report_text(const EvalReport& r) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + std::string(18 - k.size(), ' ') + v + "\n"; };
  line("delta", fmt_double(r.delta));
  line("tnr_at_tpr95", fmt_double(r.tnr_at_tpr95));
  line("auroc", fmt_double(r.auroc));
  line("detection_error", fmt_double(r.detection_error));
  line("id_accuracy", fmt_double(r.id_accuracy));
  line("confusion", "TP=" + std::to_string(r.confusion.tp) + " FP=" + std::to_string(r.confusion.fp) +
                        " FN=" + std::to_string(r.confusion.fn) + " TN=" + std::to_string(r.confusion.tn));
  line("ece", fmt_double(r.ece));
  line("diversity", fmt_double(r.diversity));
  line("entropy", fmt_double(r.entropy));
  return out;
}

}  // namespace cnc
