#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace wsol {

// Linear large-margin appearance model over proposal features. Features are
// L2-normalized at ingestion (train and score see the same preprocessing).
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  double reg_c = 1.0;

  std::size_t dim() const { return weights.size(); }
};

// Sigmoid 1 / (1 + exp(a_cal * s + b_cal)); a_cal < 0 so the calibrated
// probability strictly increases with the raw score.
struct PlattParams {
  double a_cal = -1.0;
  double b_cal = 0.0;
};

struct TrainOptions {
  double c = 1.0;
  double tol = 1e-5;      // stop when the projected-gradient gap falls below this
  int max_epochs = 1000;
  std::uint64_t seed = 0;  // seeds the coordinate permutation stream
};

// Hinge-loss minimization, (1/2)|w|^2 + C * sum hinge, by dual coordinate
// descent. Deterministic given seed. Throws on single-class input.
LinearModel train(const std::vector<std::vector<double>>& positives,
                  const std::vector<std::vector<double>>& negatives, const TrainOptions& opts);

// The preprocessing applied to every feature entering train(); scoring call
// sites apply it themselves so score stays a pure affine map.
std::vector<double> l2_normalized(const std::vector<double>& x);

// w . x + bias, no preprocessing.
double score(const LinearModel& m, const std::vector<double>& feature);
std::vector<double> score_batch(const LinearModel& m,
                                const std::vector<std::vector<double>>& features);

// Primal objective at the model's solution; used by tests and convergence
// checks.
double primal_objective(const LinearModel& m, const std::vector<std::vector<double>>& positives,
                        const std::vector<std::vector<double>>& negatives);

PlattParams fit_platt(const std::vector<double>& scores, const std::vector<int>& labels);
double calibrate(const PlattParams& p, double s);

// Hard negatives mined from negative images, identified by (image id,
// proposal index) so re-mining is idempotent.
struct NegativeCache {
  std::vector<std::vector<double>> features;
  std::vector<std::pair<std::string, std::size_t>> sources;
  std::set<std::pair<std::string, std::size_t>> seen;

  std::size_t size() const { return features.size(); }
};

struct MiningCandidate {
  std::string image_id;
  std::size_t proposal_index = 0;
  double model_score = 0.0;
  const std::vector<double>* feature = nullptr;
};

// Adds candidates scoring above threshold, highest first, until the cache
// reaches cap. Already-seen identities are skipped.
void mine_hard_negatives(const std::vector<MiningCandidate>& candidates, NegativeCache& cache,
                         double threshold, std::size_t cap);

// Trains the model and fits Platt calibration on held-out scores from an
// internal 3-fold split; the returned model is refit on all data.
struct CalibratedModel {
  LinearModel model;
  PlattParams platt;
};

CalibratedModel train_calibrated(const std::vector<std::vector<double>>& positives,
                                 const std::vector<std::vector<double>>& negatives,
                                 const TrainOptions& opts);

}  // namespace wsol
