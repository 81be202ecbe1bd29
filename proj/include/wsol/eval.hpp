#pragma once

#include <map>
#include <string>
#include <vector>

#include "wsol/dataset.hpp"

namespace wsol {

// One selected proposal per positive image: the working output of the MIL
// loop for a single class.
using Selection = std::map<std::string, std::size_t>;

struct ScoredBox {
  Box box;
  double score = 0.0;
  std::size_t proposal_index = 0;
};

// Post-NMS detections of one image, sorted by descending score.
using DetectionList = std::vector<ScoredBox>;

enum class ApStyle { voc07_11pt, all_points };

// Percentage of images whose selected proposal reaches IoU >= 0.5 with some
// gt box of the class. Boundary 0.5 counts as correct.
double corloc(const Selection& selection, const std::map<std::string, const ImageBag*>& images,
              const std::string& cls, double iou_threshold = 0.5);

// Greedy NMS over one bag's proposals given their scores; survivors keep no
// pair with IoU > nms_iou; top_n best kept.
DetectionList detect(const ImageBag& image, const std::vector<double>& proposal_scores,
                     double nms_iou, std::size_t top_n);

struct ImageDetections {
  std::string image_id;
  DetectionList detections;
};

// Average precision for one class over a dataset: greedy matching in
// descending score, each gt matched at most once, IoU >= iou_threshold.
// Returns false when the class has no gt boxes (AP undefined).
bool average_precision(const std::vector<ImageDetections>& detections,
                       const std::map<std::string, std::vector<Box>>& gt, double iou_threshold,
                       ApStyle style, double* ap_out);

// Unweighted mean over classes with defined AP; classes with zero gt are
// excluded with a warning.
double mean_average_precision(const std::map<std::string, double>& per_class_ap);

// Tie-corrected (tau-b) rank correlation, O(n log n) merge-sort counting.
double kendall_tau(const std::vector<double>& estimates, const std::vector<double>& truths);

// Mean squared error after taking the r-th root of both sides.
double mse_root_space(const std::vector<double>& estimates, const std::vector<double>& truths,
                      int r);

using RecallCurve = std::vector<double>;

// Eq-style inter-batch recall: both orders are cut into K contiguous batches
// (remainder to earlier batches); recall(k) = |Q_GT^k intersect Q_ES^k| /
// |Q_GT^k| where Q^k is the union of batches 1..k. recall(K) == 1 always.
RecallCurve interbatch_recall(const std::vector<std::string>& gt_order,
                              const std::vector<std::string>& est_order, int k);

}  // namespace wsol
