#pragma once

// Brute-force reference implementations used to pin down the library code in
// tests. Everything here trades speed for obviousness and shares no code with
// the implementations under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsol/eval.hpp"
#include "wsol/geometry.hpp"

namespace oracle {

// Gaussian elimination with partial pivoting on a dense row-major system.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                       std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (std::fabs(a[pivot * n + col]) < 1e-300) throw std::runtime_error("singular system");
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t k = ri + 1; k < n; ++k) acc -= a[ri * n + k] * x[k];
    x[ri] = acc / a[ri * n + ri];
  }
  return x;
}

// Number of tied pairs within one sequence.
inline long long count_pair_ties(const std::vector<double>& v) {
  long long t = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (v[i] == v[j]) ++t;
  return t;
}

// Kendall tau-b by direct O(n^2) pair counting.
inline double kendall_tau_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (y.size() != n || n < 2) throw std::invalid_argument("kendall_tau_pairs: bad input");
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double denom_x = n0 - static_cast<double>(count_pair_ties(x));
  const double denom_y = n0 - static_cast<double>(count_pair_ties(y));
  if (denom_x <= 0.0 || denom_y <= 0.0)
    throw std::invalid_argument("kendall_tau_pairs: constant input");
  return static_cast<double>(concordant - discordant) / std::sqrt(denom_x * denom_y);
}

// Greedy NMS by repeated global argmax over the not-yet-suppressed set.
inline std::vector<std::size_t> nms_keep(const std::vector<double>& scores,
                                         const std::vector<wsol::Box>& boxes, double nms_iou,
                                         std::size_t top_n) {
  const std::size_t n = scores.size();
  std::vector<bool> gone(n, false);
  std::vector<std::size_t> kept;
  while (kept.size() < top_n) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (gone[i]) continue;
      if (best == n || scores[i] > scores[best]) best = i;
    }
    if (best == n) break;
    kept.push_back(best);
    gone[best] = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!gone[i] && wsol::iou(boxes[best], boxes[i]) > nms_iou) gone[i] = true;
  }
  return kept;
}

struct LabeledScore {
  double score = 0.0;
  bool is_tp = false;
};

// Matches detections to ground truth exactly like a detection benchmark:
// walk detections in score order; each is judged against its single
// highest-IoU gt box and counts as a true positive only when that box clears
// the threshold and nothing claimed it earlier.
inline std::vector<LabeledScore> label_detections(
    const std::vector<std::vector<wsol::ScoredBox>>& per_image_detections,
    const std::vector<std::vector<wsol::Box>>& per_image_gt, double iou_threshold) {
  struct Flat {
    double score;
    std::size_t image;
    wsol::Box box;
  };
  std::vector<Flat> flat;
  for (std::size_t i = 0; i < per_image_detections.size(); ++i)
    for (const auto& sb : per_image_detections[i]) flat.push_back({sb.score, i, sb.box});
  std::stable_sort(flat.begin(), flat.end(),
                   [](const Flat& a, const Flat& b) { return a.score > b.score; });
  std::vector<std::vector<bool>> claimed;
  for (const auto& g : per_image_gt) claimed.emplace_back(g.size(), false);
  std::vector<LabeledScore> out;
  for (const auto& f : flat) {
    const auto& gts = per_image_gt[f.image];
    double best_iou = 0.0;
    std::size_t best_g = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = wsol::iou(f.box, gts[g]);
      if (v > best_iou) {
        best_iou = v;
        best_g = g;
      }
    }
    LabeledScore ls;
    ls.score = f.score;
    ls.is_tp = best_g < gts.size() && best_iou >= iou_threshold && !claimed[f.image][best_g];
    if (ls.is_tp) claimed[f.image][best_g] = true;
    out.push_back(ls);
  }
  return out;
}

// 11-point interpolated AP evaluated from first principles: at each recall
// level take the best precision among score cutoffs reaching that recall.
inline double ap_11pt(const std::vector<LabeledScore>& labeled, std::size_t total_gt) {
  if (total_gt == 0) throw std::invalid_argument("ap_11pt: no ground truth");
  double sum = 0.0;
  for (int t = 0; t <= 10; ++t) {
    const double level = t / 10.0;
    double best = 0.0;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      if (labeled[i].is_tp) ++tp;
      const double recall = static_cast<double>(tp) / static_cast<double>(total_gt);
      const double precision = static_cast<double>(tp) / static_cast<double>(i + 1);
      if (recall + 1e-12 >= level) best = std::max(best, precision);
    }
    sum += best;
  }
  return sum / 11.0;
}

// Exact area under the precision envelope over recall, by scanning every
// prefix cutoff.
inline double ap_all_points(const std::vector<LabeledScore>& labeled, std::size_t total_gt) {
  if (total_gt == 0) throw std::invalid_argument("ap_all_points: no ground truth");
  std::vector<double> recall{0.0};
  std::vector<double> precision{1.0};
  std::size_t tp = 0;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (labeled[i].is_tp) ++tp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  // Precision envelope: best precision at any recall >= r.
  double area = 0.0;
  for (std::size_t i = 1; i < recall.size(); ++i) {
    if (recall[i] == recall[i - 1]) continue;
    double env = 0.0;
    for (std::size_t j = 0; j < recall.size(); ++j)
      if (recall[j] >= recall[i]) env = std::max(env, precision[j]);
    area += (recall[i] - recall[i - 1]) * env;
  }
  return area;
}

// Logistic weight endpoints of the size compatibility window, evaluated with
// long-double arithmetic.
inline double size_window_weight(double s_p, double s_e, double sigma, double delta) {
  const long double left = 1.0L / (1.0L + std::exp(static_cast<long double>(
                                       delta * (s_e - 3.0 * sigma - s_p))));
  const long double right = 1.0L / (1.0L + std::exp(static_cast<long double>(
                                        delta * (s_p - s_e - 3.0 * sigma))));
  return static_cast<double>(left < right ? left : right);
}

}  // namespace oracle
