#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsol/kernels.hpp"

namespace wsol {

enum class RegressorMode { class_specific, class_generic, across_class };

std::string regressor_mode_name(RegressorMode m);
RegressorMode regressor_mode_from_name(const std::string& name);

// Kernel ridge regression from whole-image features to root-space normalized
// object size. sigma is the standard deviation of cross-validation residuals,
// measured in root space like the targets.
struct SizeRegressor {
  KernelSpec kernel;
  std::vector<double> support_features;  // row-major n x d
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> dual_weights;
  double ridge = 1e-2;
  int root = 3;
  double sigma = 0.0;
  RegressorMode training_mode = RegressorMode::class_specific;

  // Raw prediction floor; sizes are normalized areas, so Eq-style weighting
  // downstream needs a strictly positive estimate.
  static constexpr double kFloor = 1e-4;
};

struct SizePrediction {
  double s_e_root = 0.0;  // clamped to (kFloor, 1]
  double s_e = 0.0;       // s_e_root^root
};

// Solves (G + lambda I) alpha = y with an SPD factorization. targets are
// already in root space, each in (0,1].
SizeRegressor fit_krr(const std::vector<double>& features, std::size_t n, std::size_t d,
                      const std::vector<double>& targets, double ridge, const KernelSpec& kernel,
                      int root);

SizePrediction predict(const SizeRegressor& reg, const std::vector<double>& feature);
std::vector<SizePrediction> predict_batch(const SizeRegressor& reg,
                                          const std::vector<double>& features, std::size_t n);

// Median of pairwise Euclidean distances over a seeded subsample of <= 1000
// rows, zero self-pairs excluded.
double median_heuristic(const std::vector<double>& features, std::size_t n, std::size_t d,
                        std::uint64_t seed);

struct CrossValidationResult {
  SizeRegressor model;  // refit on all data with the winning setting
  double sigma = 0.0;
  double best_lambda = 0.0;
  double best_bandwidth = 0.0;  // 0 for linear kernel
  double best_mse = 0.0;        // mean held-out squared error, root space
};

// Grid search over (lambda, bandwidth), k-fold. Fold partition is a seeded
// shuffle, deterministic per seed. sigma = std of pooled held-out residuals
// of the winning setting.
CrossValidationResult cross_validate(const std::vector<double>& features, std::size_t n,
                                     std::size_t d, const std::vector<double>& targets, int folds,
                                     const std::vector<double>& lambda_grid,
                                     const std::vector<double>& bandwidth_grid,
                                     KernelKind kind, int root, std::uint64_t seed);

std::vector<double> default_lambda_grid();

}  // namespace wsol
