#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wsol/classifier.hpp"
#include "wsol/dataset.hpp"
#include "wsol/eval.hpp"
#include "wsol/weighting.hpp"

namespace wsol {

enum class Ordering { estimated_size, random };

std::string ordering_name(Ordering o);
Ordering ordering_from_name(const std::string& name);

struct CurriculumConfig {
  int batches = 3;      // K: positive images are fed in K waves
  int iterations = 3;   // M: re-localize / re-train rounds per wave
  Ordering ordering = Ordering::estimated_size;
  bool use_size_weighting = true;
  bool use_objectness = true;
  double svm_c = 1.0;
  double weight_delta = 3.0;
  WeightSpace weight_space = WeightSpace::root;
  std::size_t negatives_per_image = 200;
  std::size_t hard_negative_cap = 0;  // 0 = 50 per positive example
  double hard_negative_threshold = -1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Root-space size estimates for one class's positive images, with the
// held-out residual spread that parameterizes the size weight.
struct SizeEstimates {
  int root = 3;
  double sigma = 0.1;                      // root space
  std::map<std::string, double> s_e_root;  // image id -> root-space estimate
};

// One re-localization round. corloc is measured against gt for reporting
// only; nothing downstream reads it.
struct IterationRecord {
  int batch = 0;       // 1-based
  int iteration = 0;   // 1-based
  std::size_t working_set = 0;
  std::size_t positive_training_count = 0;
  std::size_t negative_cache = 0;
  Selection selection;
  double corloc = 0.0;
  std::uint64_t model_hash = 0;
};

struct RunTrace {
  std::string cls;
  std::vector<std::vector<std::string>> batch_ids;
  std::vector<IterationRecord> rounds;
  Selection final_selection;
  double final_corloc = 0.0;
  CalibratedModel final_model;
  // Provenance: identities of every mined hard negative, for auditing that
  // negatives only ever come from negative images.
  std::vector<std::pair<std::string, std::size_t>> mined_sources;
};

// Content hash of a trained model, for provenance records and rerun
// comparison.
std::uint64_t model_hash(const LinearModel& m);

// Fixed negative material drawn once per run: each negative image
// contributes a seeded sample of its proposal features to the base set;
// every negative proposal stays available to hard-negative mining.
struct NegativePool {
  std::vector<std::vector<double>> base;
  std::vector<MiningCandidate> mining;
};

NegativePool build_negative_pool(const std::vector<const ImageBag*>& negative_images,
                                 const CurriculumConfig& cfg);

// Whole-image initialization: complete positive images of the first batch
// against the negative pool.
CalibratedModel initialize(const std::vector<const ImageBag*>& batch1,
                           const std::vector<std::vector<double>>& negative_pool,
                           const CurriculumConfig& cfg);

// Scores one bag's proposals with the current model: Platt-calibrated score,
// optionally multiplied by objectness and by the size weight of each
// proposal against the image's estimated size.
std::vector<double> score_proposals(const ImageBag& image, const CalibratedModel& model,
                                    const SizeEstimates& estimates, const CurriculumConfig& cfg);

// Picks the highest fused-scoring proposal of every working-set image; ties
// go to the lowest index.
Selection relocalize(const std::vector<const ImageBag*>& working_set, const CalibratedModel& model,
                     const SizeEstimates& estimates, const CurriculumConfig& cfg);

// Retrains on the currently selected proposals against base plus mined
// negatives. k and m only salt the solver's permutation stream.
CalibratedModel retrain(const Selection& selection,
                        const std::map<std::string, const ImageBag*>& positive_by_id,
                        const std::vector<std::vector<double>>& negatives,
                        const CurriculumConfig& cfg, int k, int m);

// Full MIL loop for one class: order positives into batches, initialize from
// whole-image features, then per (k, m): re-localize over batches 1..k, mine
// hard negatives with the current model, re-train. The model carries over
// from batch to batch.
RunTrace run_curriculum(const Dataset& train, const std::string& cls,
                        const SizeEstimates& estimates, const CurriculumConfig& cfg);

}  // namespace wsol
