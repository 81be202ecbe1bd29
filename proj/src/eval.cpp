#include "wsol/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "wsol/geometry.hpp"

namespace wsol {

double corloc(const Selection& selection, const std::map<std::string, const ImageBag*>& images,
              const std::string& cls, double iou_threshold) {
  if (selection.empty()) throw std::invalid_argument("corloc: empty selection");
  std::size_t hits = 0;
  for (const auto& [id, proposal_index] : selection) {
    auto it = images.find(id);
    if (it == images.end()) throw std::invalid_argument("corloc: unknown image id " + id);
    const ImageBag& bag = *it->second;
    if (proposal_index >= bag.proposals.size())
      throw std::invalid_argument("corloc: proposal index out of range for " + id);
    auto gt_it = bag.gt_boxes.find(cls);
    if (gt_it == bag.gt_boxes.end() || gt_it->second.empty())
      throw std::invalid_argument("corloc: no gt boxes for class " + cls + " in " + id);
    const Box& picked = bag.proposals[proposal_index].box;
    double best = 0.0;
    for (const Box& gt : gt_it->second) best = std::max(best, iou(picked, gt));
    if (best >= iou_threshold) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(selection.size());
}

DetectionList detect(const ImageBag& image, const std::vector<double>& proposal_scores,
                     double nms_iou, std::size_t top_n) {
  if (proposal_scores.size() != image.proposals.size())
    throw std::invalid_argument("detect: score count does not match proposal count");
  std::vector<std::size_t> order(proposal_scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return proposal_scores[a] > proposal_scores[b];
  });
  DetectionList kept;
  for (std::size_t idx : order) {
    if (kept.size() >= top_n) break;
    const Box& candidate = image.proposals[idx].box;
    bool suppressed = false;
    for (const ScoredBox& winner : kept) {
      if (iou(candidate, winner.box) > nms_iou) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back({candidate, proposal_scores[idx], idx});
  }
  return kept;
}

namespace {

struct FlatDetection {
  std::size_t image = 0;
  double score = 0.0;
  const Box* box = nullptr;
};

double ap_from_curve(const std::vector<double>& precision, const std::vector<double>& recall,
                     ApStyle style) {
  if (style == ApStyle::voc07_11pt) {
    double sum = 0.0;
    for (int i = 0; i <= 10; ++i) {
      double t = 0.1 * i;
      double best = 0.0;
      for (std::size_t j = 0; j < recall.size(); ++j)
        if (recall[j] >= t - 1e-12) best = std::max(best, precision[j]);
      sum += best;
    }
    return sum / 11.0;
  }
  // All-points: integrate recall against the running max of future precision.
  std::vector<double> interp(precision.size());
  double best = 0.0;
  for (std::size_t j = precision.size(); j-- > 0;) {
    best = std::max(best, precision[j]);
    interp[j] = best;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t j = 0; j < recall.size(); ++j) {
    ap += (recall[j] - prev_recall) * interp[j];
    prev_recall = recall[j];
  }
  return ap;
}

}  // namespace

bool average_precision(const std::vector<ImageDetections>& detections,
                       const std::map<std::string, std::vector<Box>>& gt, double iou_threshold,
                       ApStyle style, double* ap_out) {
  std::size_t npos = 0;
  for (const auto& [id, boxes] : gt) npos += boxes.size();
  if (npos == 0) return false;

  std::vector<FlatDetection> flat;
  std::vector<std::vector<char>> matched(detections.size());
  std::vector<const std::vector<Box>*> gt_of(detections.size(), nullptr);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    auto it = gt.find(detections[i].image_id);
    if (it != gt.end()) {
      gt_of[i] = &it->second;
      matched[i].assign(it->second.size(), 0);
    }
    for (const ScoredBox& d : detections[i].detections) flat.push_back({i, d.score, &d.box});
  }
  std::stable_sort(flat.begin(), flat.end(),
                   [](const FlatDetection& a, const FlatDetection& b) { return a.score > b.score; });

  std::vector<double> precision, recall;
  precision.reserve(flat.size());
  recall.reserve(flat.size());
  std::size_t tp = 0, fp = 0;
  for (const FlatDetection& d : flat) {
    bool hit = false;
    if (gt_of[d.image] != nullptr) {
      const std::vector<Box>& boxes = *gt_of[d.image];
      double best = 0.0;
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < boxes.size(); ++j) {
        double v = iou(*d.box, boxes[j]);
        if (v > best) {
          best = v;
          best_j = j;
        }
      }
      if (best >= iou_threshold && !matched[d.image][best_j]) {
        matched[d.image][best_j] = 1;
        hit = true;
      }
    }
    if (hit)
      ++tp;
    else
      ++fp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(npos));
  }
  *ap_out = flat.empty() ? 0.0 : ap_from_curve(precision, recall, style);
  return true;
}

double mean_average_precision(const std::map<std::string, double>& per_class_ap) {
  if (per_class_ap.empty()) throw std::invalid_argument("mean_average_precision: no classes");
  double sum = 0.0;
  for (const auto& [cls, ap] : per_class_ap) sum += ap;
  return sum / static_cast<double>(per_class_ap.size());
}

namespace {

// Merge sort counting strict inversions (v[i] > v[j], i < j).
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
  std::size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      count += mid - a;
      scratch[out++] = v[b++];
    } else {
      scratch[out++] = v[a++];
    }
  }
  while (a < mid) scratch[out++] = v[a++];
  while (b < hi) scratch[out++] = v[b++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, v.begin() + lo);
  return count;
}

std::uint64_t tie_pairs_sorted(const std::vector<double>& sorted) {
  std::uint64_t pairs = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    std::uint64_t run = j - i;
    pairs += run * (run - 1) / 2;
    i = j;
  }
  return pairs;
}

}  // namespace

double kendall_tau(const std::vector<double>& estimates, const std::vector<double>& truths) {
  const std::size_t n = estimates.size();
  if (truths.size() != n) throw std::invalid_argument("kendall_tau: length mismatch");
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least two pairs");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (estimates[a] != estimates[b]) return estimates[a] < estimates[b];
    return truths[a] < truths[b];
  });

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t n1 = 0, n3 = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && estimates[order[j]] == estimates[order[i]]) ++j;
      std::uint64_t run = j - i;
      n1 += run * (run - 1) / 2;
      std::size_t a = i;
      while (a < j) {
        std::size_t b = a;
        while (b < j && truths[order[b]] == truths[order[a]]) ++b;
        std::uint64_t both = b - a;
        n3 += both * (both - 1) / 2;
        a = b;
      }
      i = j;
    }
  }

  std::vector<double> y_sorted(truths);
  std::sort(y_sorted.begin(), y_sorted.end());
  const std::uint64_t n2 = tie_pairs_sorted(y_sorted);
  if (n1 == n0 || n2 == n0)
    throw std::invalid_argument("kendall_tau: one side is constant, tau undefined");

  std::vector<double> y_in_x_order(n);
  for (std::size_t i = 0; i < n; ++i) y_in_x_order[i] = truths[order[i]];
  std::vector<double> scratch(n);
  const std::uint64_t discordant = count_inversions(y_in_x_order, scratch, 0, n);

  const double numerator = static_cast<double>(n0) - static_cast<double>(n1) -
                           static_cast<double>(n2) + static_cast<double>(n3) -
                           2.0 * static_cast<double>(discordant);
  const double denom = std::sqrt(static_cast<double>(n0 - n1)) *
                       std::sqrt(static_cast<double>(n0 - n2));
  return numerator / denom;
}

double mse_root_space(const std::vector<double>& estimates, const std::vector<double>& truths,
                      int r) {
  if (estimates.size() != truths.size())
    throw std::invalid_argument("mse_root_space: length mismatch");
  if (estimates.empty()) throw std::invalid_argument("mse_root_space: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    double diff = root_transform(estimates[i], r) - root_transform(truths[i], r);
    sum += diff * diff;
  }
  return sum / static_cast<double>(estimates.size());
}

RecallCurve interbatch_recall(const std::vector<std::string>& gt_order,
                              const std::vector<std::string>& est_order, int k) {
  if (gt_order.size() != est_order.size())
    throw std::invalid_argument("interbatch_recall: order length mismatch");
  {
    std::vector<std::string> a(gt_order), b(est_order);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw std::invalid_argument("interbatch_recall: orders cover different images");
  }
  std::vector<std::pair<std::size_t, std::size_t>> spans = contiguous_split(gt_order.size(), k);

  RecallCurve curve;
  curve.reserve(spans.size());
  std::vector<std::string> gt_prefix, est_prefix;
  for (const auto& [begin, end] : spans) {
    for (std::size_t i = begin; i < end; ++i) {
      gt_prefix.push_back(gt_order[i]);
      est_prefix.push_back(est_order[i]);
    }
    std::vector<std::string> a(gt_prefix), b(est_prefix);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    curve.push_back(static_cast<double>(common.size()) / static_cast<double>(a.size()));
  }
  return curve;
}

}  // namespace wsol
