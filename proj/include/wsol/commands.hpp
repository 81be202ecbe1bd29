#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsol/config.hpp"
#include "wsol/curriculum.hpp"
#include "wsol/regressor.hpp"

namespace wsol {

// FNV-1a over the file's bytes, hex-encoded; the content hash recorded in
// manifests and compared by rerun tests.
std::string file_hash_hex(const std::string& path);

// Writes content to path via a temp file and rename, so partial writes are
// never observed.
void write_file_atomic(const std::string& path, const std::string& content);

// One regressor per class name. In class-generic mode every class maps to
// the same underlying model; in across-class mode each class maps to the
// model fit on the other group.
struct SizeModelSet {
  RegressorMode mode = RegressorMode::class_specific;
  std::map<std::string, SizeRegressor> by_class;
  std::map<std::string, std::string> model_key_of_class;  // class -> model identity
};

SizeModelSet train_size_models(const Dataset& regressor_set, const RegressorConfig& rc,
                               std::uint64_t seed);

// Root-space size estimates for every positive image of every class in the
// wsol set.
std::map<std::string, SizeEstimates> estimate_sizes(const SizeModelSet& models,
                                                    const Dataset& wsol_set);

// True normalized size of the largest gt box of cls (or of any class when
// cls is empty); false when the image carries none.
bool true_size_of(const ImageBag& image, const std::string& cls, double* out);

// Curriculum settings of one named experiment arm. baseline: random order,
// no size weighting; order: size order only; order-weight: size order plus
// Eq-style weighting.
CurriculumConfig variant_config(const CurriculumConfig& base, const std::string& variant);

nlohmann::ordered_json model_to_json(const SizeRegressor& reg, const std::string& train_hash);
SizeRegressor model_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json trace_to_json(const RunTrace& trace);
RunTrace trace_from_json(const nlohmann::ordered_json& j);

// CLI verbs. All throw on error; the CLI maps exceptions to nonzero exit.
void cmd_gen(const RunConfig& cfg);
void cmd_train_size(const RunConfig& cfg);
void cmd_estimate(const RunConfig& cfg);
void cmd_wsol(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_sweep(const RunConfig& cfg);

// The sweep's computation, exposed separately so experiments can run
// in-process: per (seed, variant) final CorLoc per class, and per (seed, N)
// estimation quality on a regressor set truncated to N images.
struct SweepVariantResult {
  std::uint64_t seed = 0;
  std::string variant;
  std::map<std::string, double> final_corloc;
};

struct SweepLadderResult {
  std::uint64_t seed = 0;
  std::size_t n = 0;  // 0 = ALL
  std::map<std::string, double> tau;
  std::map<std::string, double> mse_root;
  std::map<std::string, RecallCurve> recall;
};

struct SweepResult {
  std::vector<SweepVariantResult> variants;
  std::vector<SweepLadderResult> ladder;
};

SweepResult run_sweep(const RunConfig& cfg);

}  // namespace wsol
