#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsol/dataset.hpp"

namespace wsol {

// Object-size distribution: a mixture of uniform components over (0,1].
struct SizeLawComponent {
  double lo = 0.02;
  double hi = 0.90;
  double weight = 1.0;
};

struct SizeLaw {
  std::vector<SizeLawComponent> components;
};

// Noise model tied to object size: per-proposal feature noise grows as the
// ground-truth object shrinks, which is what makes small-object images hard.
struct SnrLaw {
  double feature_noise_base = 0.2;   // feature noise std at s = 1
  double feature_noise_slope = 4.0;  // std = base * (1 + slope * (1 - s)^4)
  double objectness_noise = 0.12;
  double whole_image_noise = 0.30;
};

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t num_regressor_images = 600;
  std::size_t num_wsol_images = 300;
  std::size_t num_test_images = 300;
  std::vector<std::string> classes = {"alpha", "beta", "gamma"};
  std::size_t feature_dim = 16;
  std::size_t proposals_per_image = 30;
  SizeLaw size_law;  // empty = default three-component mixture over (0.02, 0.9]
  SnrLaw snr_law;
  double clutter = 0.5;  // fraction of non-anchor proposals that are background boxes

  void validate() const;
};

struct SyntheticWorld {
  Dataset regressor_set;  // R
  Dataset wsol_set;       // I
  Dataset test_set;       // X
};

SizeLaw default_size_law();

// Deterministic per seed, byte-identical across reruns. Every image carries
// exactly one class label and one ground-truth box; proposals mix jittered
// copies of the gt box with background boxes; objectness is a noisy
// increasing function of max-IoU with the gt.
SyntheticWorld generate_synthetic(const SyntheticConfig& cfg);

}  // namespace wsol
