#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wsol/geometry.hpp"

namespace wsol {

// One candidate region inside an image: the MIL instance.
struct Proposal {
  Box box;
  std::vector<double> feature;
  double objectness = 0.0;  // in [0,1]
};

// One training image as a bag of proposals. gt_boxes exist for evaluation
// only; the learning loop never reads them.
struct ImageBag {
  std::string id;
  double width = 0.0;
  double height = 0.0;
  std::vector<double> whole_image_feature;
  std::vector<Proposal> proposals;
  std::set<std::string> class_labels;
  std::map<std::string, std::vector<Box>> gt_boxes;

  bool positive_for(const std::string& cls) const { return class_labels.count(cls) > 0; }
};

enum class DatasetRole { regressor_train, wsol_train, test };

std::string role_name(DatasetRole role);
DatasetRole role_from_name(const std::string& name);

struct Dataset {
  DatasetRole role = DatasetRole::wsol_train;
  std::vector<std::string> classes;
  std::size_t feature_dim = 0;
  std::vector<ImageBag> images;

  const ImageBag* find(const std::string& id) const;
};

// JSONL persistence: line 1 is a header record {role, classes, feature_dim,
// format_version}, each following line is one ImageBag. Floats are written
// with round-trip precision, so load(save(ds)) == ds field for field.
void save_jsonl(const Dataset& ds, const std::string& path);
Dataset load_jsonl(const std::string& path);

// Validates invariants shared by generated and loaded datasets. Positive
// images with an empty proposal list are dropped with a warning (MIL is
// undefined on empty bags); gt boxes are clipped to image bounds.
void canonicalize(Dataset& ds);

// Cut n items into K contiguous [begin, end) spans of near-equal length,
// remainder going to earlier spans. Shared by batch construction and the
// inter-batch recall curve so both cut at identical boundaries.
std::vector<std::pair<std::size_t, std::size_t>> contiguous_split(std::size_t n, int k);

// Sort image ids by size estimate descending (ties by ascending id) and cut
// into K contiguous batches of near-equal size, remainder to earlier batches.
// Batch 1 holds the largest estimates.
std::vector<std::vector<std::string>> split_batches(const std::vector<const ImageBag*>& images,
                                                    const std::map<std::string, double>& estimates,
                                                    int k);

// Seeded uniform shuffle, then the same contiguous cut.
std::vector<std::vector<std::string>> random_batches(const std::vector<const ImageBag*>& images,
                                                     int k, std::uint64_t seed);

}  // namespace wsol
