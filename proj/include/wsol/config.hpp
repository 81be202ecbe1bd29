#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsol/curriculum.hpp"
#include "wsol/eval.hpp"
#include "wsol/regressor.hpp"
#include "wsol/synthetic.hpp"

namespace wsol {

struct RegressorConfig {
  RegressorMode mode = RegressorMode::class_specific;
  KernelKind kernel = KernelKind::rbf;
  int folds = 7;
  int root = 3;
  std::vector<double> lambda_grid;              // empty = default log ladder
  std::vector<double> bandwidth_factors = {0.5, 1.0, 2.0};  // x median heuristic
  // across-class mode: two named groups of classes; each group's model serves
  // the other group's classes.
  std::map<std::string, std::vector<std::string>> groups;
};

struct EvalSettings {
  double nms_iou = 0.3;
  std::size_t top_n = 100;
  ApStyle ap_style = ApStyle::voc07_11pt;
  double iou_threshold = 0.5;
};

// ALL is encoded as 0 in the ladder.
struct SweepConfig {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<std::string> variants = {"baseline", "order", "order-weight"};
  std::vector<std::size_t> n_ladder = {30, 50, 100, 0};
};

// The one structured document every command reads. A single global seed
// feeds all named substreams; per-component seed fields are derived, never
// set directly.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  SyntheticConfig synthetic;
  RegressorConfig regressor;
  CurriculumConfig curriculum;
  EvalSettings eval;
  SweepConfig sweep;
};

nlohmann::ordered_json config_to_json(const RunConfig& cfg);

// Strict parse: unknown keys anywhere in the document are an error, so a
// typoed setting can never silently fall back to a default.
RunConfig config_from_json(const nlohmann::ordered_json& j);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

}  // namespace wsol
