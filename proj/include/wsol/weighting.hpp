#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsol {

enum class WeightSpace { root, raw };

// Parameters of the size weight: delta controls decay speed, sigma comes from
// the size regressor's cross-validation residuals. space records which space
// (root-transformed or raw normalized area) s_p and s_e are expressed in; the
// caller transforms sizes before evaluating.
struct WeightParams {
  double delta = 3.0;
  double sigma = 0.1;
  WeightSpace space = WeightSpace::root;

  void validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("WeightParams: delta must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("WeightParams: sigma must be positive");
  }
};

namespace detail {
// 1 / (1 + e^t) without overflow for large |t|.
inline double inv_logistic(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}
}  // namespace detail

// Weight of a proposal of size s_p against estimated size s_e: high inside
// the three-sigma interval [s_e - 3 sigma, s_e + 3 sigma], exactly 0.5 at the
// endpoints, decaying quickly outside.
inline double size_weight(double s_p, double s_e, const WeightParams& wp) {
  wp.validate();
  const double left = detail::inv_logistic(wp.delta * (s_e - 3.0 * wp.sigma - s_p));
  const double right = detail::inv_logistic(wp.delta * (s_p - s_e - 3.0 * wp.sigma));
  return std::min(left, right);
}

struct FusionFlags {
  bool use_calibrated = true;
  bool use_objectness = true;
  bool use_size_weight = true;
};

// Product of the active factors; inactive factors contribute 1.
inline double fused_score(double calibrated, double objectness, double weight,
                          const FusionFlags& flags) {
  double s = 1.0;
  if (flags.use_calibrated) s *= calibrated;
  if (flags.use_objectness) s *= objectness;
  if (flags.use_size_weight) s *= weight;
  return s;
}

}  // namespace wsol
