#include "wsol/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "wsol/rng.hpp"

namespace wsol {

std::string regressor_mode_name(RegressorMode m) {
  switch (m) {
    case RegressorMode::class_specific: return "class-specific";
    case RegressorMode::class_generic: return "class-generic";
    case RegressorMode::across_class: return "across-class";
  }
  throw std::logic_error("unknown regressor mode");
}

RegressorMode regressor_mode_from_name(const std::string& name) {
  if (name == "class-specific") return RegressorMode::class_specific;
  if (name == "class-generic") return RegressorMode::class_generic;
  if (name == "across-class") return RegressorMode::across_class;
  throw std::invalid_argument("unknown regressor mode: " + name);
}

SizeRegressor fit_krr(const std::vector<double>& features, std::size_t n, std::size_t d,
                      const std::vector<double>& targets, double ridge, const KernelSpec& kernel,
                      int root) {
  if (n < 2) throw std::invalid_argument("fit_krr: need at least 2 training rows");
  if (targets.size() != n) throw std::invalid_argument("fit_krr: targets/features length mismatch");
  if (features.size() != n * d) throw std::invalid_argument("fit_krr: feature matrix shape mismatch");
  for (double t : targets)
    if (!(t > 0.0) || t > 1.0 + 1e-12)
      throw std::invalid_argument("fit_krr: targets must lie in (0,1]");
  if (ridge < 0.0) throw std::invalid_argument("fit_krr: ridge must be nonnegative");

  std::vector<double> gram = gram_matrix(features, n, d, kernel);
  Eigen::Map<Eigen::MatrixXd> g(gram.data(), static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(n));
  Eigen::MatrixXd a = g;
  a.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "fit_krr: Gram system is not positive definite (duplicate rows or degenerate kernel); "
        "use ridge > 0");
  Eigen::Map<const Eigen::VectorXd> y(targets.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd alpha = llt.solve(y);

  SizeRegressor reg;
  reg.kernel = kernel;
  reg.support_features = features;
  reg.n = n;
  reg.d = d;
  reg.dual_weights.assign(alpha.data(), alpha.data() + n);
  reg.ridge = ridge;
  reg.root = root;
  return reg;
}

SizePrediction predict(const SizeRegressor& reg, const std::vector<double>& feature) {
  if (feature.size() != reg.d)
    throw std::invalid_argument("predict: feature dimension mismatch");
  double raw = 0.0;
  kernel_predict_serial(reg.support_features.data(), reg.n, reg.dual_weights.data(),
                        feature.data(), 1, reg.d, reg.kernel, &raw);
  SizePrediction p;
  p.s_e_root = std::min(1.0, std::max(SizeRegressor::kFloor, raw));
  p.s_e = std::pow(p.s_e_root, static_cast<double>(reg.root));
  return p;
}

std::vector<SizePrediction> predict_batch(const SizeRegressor& reg,
                                          const std::vector<double>& features, std::size_t n) {
  if (features.size() != n * reg.d)
    throw std::invalid_argument("predict_batch: feature matrix shape mismatch");
  std::vector<double> raw = kernel_predict(reg.support_features, reg.n, reg.dual_weights,
                                           features, n, reg.d, reg.kernel);
  std::vector<SizePrediction> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].s_e_root = std::min(1.0, std::max(SizeRegressor::kFloor, raw[i]));
    out[i].s_e = std::pow(out[i].s_e_root, static_cast<double>(reg.root));
  }
  return out;
}

double median_heuristic(const std::vector<double>& features, std::size_t n, std::size_t d,
                        std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("median_heuristic: need at least 2 rows");
  constexpr std::size_t kMaxRows = 1000;
  std::vector<double> sub;
  std::size_t m = n;
  if (n > kMaxRows) {
    Rng rng(seed, "median-heuristic");
    auto idx = rng.sample_without_replacement(n, kMaxRows);
    std::sort(idx.begin(), idx.end());
    sub.reserve(kMaxRows * d);
    for (std::size_t i : idx)
      sub.insert(sub.end(), features.begin() + static_cast<std::ptrdiff_t>(i * d),
                 features.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    m = kMaxRows;
  }
  const std::vector<double>& x = n > kMaxRows ? sub : features;
  std::vector<double> dist = pairwise_distances(x, m, d);
  dist.erase(std::remove(dist.begin(), dist.end(), 0.0), dist.end());
  if (dist.empty()) throw std::invalid_argument("median_heuristic: all points identical");
  std::sort(dist.begin(), dist.end());
  const std::size_t k = dist.size();
  if (k % 2 == 1) return dist[k / 2];
  return 0.5 * (dist[k / 2 - 1] + dist[k / 2]);
}

std::vector<double> default_lambda_grid() {
  // 1e-4 .. 1e1 log-spaced.
  return {1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1};
}

CrossValidationResult cross_validate(const std::vector<double>& features, std::size_t n,
                                     std::size_t d, const std::vector<double>& targets, int folds,
                                     const std::vector<double>& lambda_grid,
                                     const std::vector<double>& bandwidth_grid,
                                     KernelKind kind, int root, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");
  if (n < static_cast<std::size_t>(folds))
    throw std::invalid_argument("cross_validate: fewer rows than folds");
  if (lambda_grid.empty()) throw std::invalid_argument("cross_validate: empty lambda grid");
  const std::vector<double> bw_grid =
      kind == KernelKind::linear ? std::vector<double>{0.0} : bandwidth_grid;
  if (bw_grid.empty()) throw std::invalid_argument("cross_validate: empty bandwidth grid");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed, "cv-folds");
  rng.shuffle(order);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = static_cast<int>(i % folds);

  double best_mse = std::numeric_limits<double>::infinity();
  double best_lambda = lambda_grid.front();
  double best_bw = bw_grid.front();
  std::vector<double> best_residuals;

  for (double bw : bw_grid) {
    for (double lambda : lambda_grid) {
      KernelSpec spec{kind, kind == KernelKind::rbf ? bw : 1.0};
      std::vector<double> residuals;
      residuals.reserve(n);
      bool failed = false;
      for (int f = 0; f < folds && !failed; ++f) {
        std::vector<double> train_x, train_y, test_x, test_y;
        for (std::size_t i = 0; i < n; ++i) {
          auto begin = features.begin() + static_cast<std::ptrdiff_t>(i * d);
          auto end = begin + static_cast<std::ptrdiff_t>(d);
          if (fold_of[i] == f) {
            test_x.insert(test_x.end(), begin, end);
            test_y.push_back(targets[i]);
          } else {
            train_x.insert(train_x.end(), begin, end);
            train_y.push_back(targets[i]);
          }
        }
        try {
          SizeRegressor m = fit_krr(train_x, train_y.size(), d, train_y, lambda, spec, root);
          auto preds = predict_batch(m, test_x, test_y.size());
          for (std::size_t i = 0; i < test_y.size(); ++i)
            residuals.push_back(preds[i].s_e_root - test_y[i]);
        } catch (const std::exception&) {
          failed = true;  // singular setting, skip this grid point
        }
      }
      if (failed || residuals.empty()) continue;
      double mse = 0.0;
      for (double r : residuals) mse += r * r;
      mse /= static_cast<double>(residuals.size());
      if (mse < best_mse) {
        best_mse = mse;
        best_lambda = lambda;
        best_bw = bw;
        best_residuals = residuals;
      }
    }
  }
  if (!std::isfinite(best_mse))
    throw std::runtime_error("cross_validate: every grid setting failed");

  double mean = 0.0;
  for (double r : best_residuals) mean += r;
  mean /= static_cast<double>(best_residuals.size());
  double var = 0.0;
  for (double r : best_residuals) var += (r - mean) * (r - mean);
  var /= static_cast<double>(best_residuals.size());

  CrossValidationResult result;
  KernelSpec spec{kind, kind == KernelKind::rbf ? best_bw : 1.0};
  result.model = fit_krr(features, n, d, targets, best_lambda, spec, root);
  result.sigma = std::max(std::sqrt(var), 1e-8);
  result.model.sigma = result.sigma;
  result.best_lambda = best_lambda;
  result.best_bandwidth = kind == KernelKind::rbf ? best_bw : 0.0;
  result.best_mse = best_mse;
  return result;
}

}  // namespace wsol
