#include "wsol/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wsol/rng.hpp"

namespace wsol {

namespace {

// Internal appearance constants. These are world-building knobs, not part of
// the config surface; the config controls noise, clutter and sizes.
constexpr double kClassAmp = 1.7;        // class prototype amplitude
constexpr double kBackgroundAmp = 2.2;   // background prototype amplitude
constexpr double kContextAmp = 3.0;      // class-correlated context amplitude
constexpr double kSizeChannelAmp = 2.0;  // whole-image size signal amplitude
constexpr int kNumBackgroundProtos = 4;
constexpr double kObjectnessBase = 0.15;
constexpr double kObjectnessGain = 0.3;  // reward for bounding the object
constexpr double kStructureGain = 0.45;  // reward for bounding any salient blob

std::vector<double> random_unit_vector(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

struct WorldParams {
  std::vector<std::vector<double>> class_protos;
  std::vector<std::vector<double>> context_protos;  // class-correlated surroundings
  std::vector<std::vector<double>> bg_protos;
  std::vector<double> size_channel;
  std::vector<double> class_size_gain;  // per-class scale of the size channel
};

WorldParams make_world(const SyntheticConfig& cfg) {
  WorldParams wp;
  Rng rng(cfg.seed, "world-prototypes");
  const std::size_t d = cfg.feature_dim;
  for (std::size_t c = 0; c < cfg.classes.size(); ++c)
    wp.class_protos.push_back(random_unit_vector(rng, d));
  for (std::size_t c = 0; c < cfg.classes.size(); ++c)
    wp.context_protos.push_back(random_unit_vector(rng, d));
  for (int j = 0; j < kNumBackgroundProtos; ++j)
    wp.bg_protos.push_back(random_unit_vector(rng, d));
  wp.size_channel = random_unit_vector(rng, d);
  const std::size_t nc = cfg.classes.size();
  for (std::size_t c = 0; c < nc; ++c) {
    const double t = nc > 1 ? static_cast<double>(c) / static_cast<double>(nc - 1) : 0.5;
    wp.class_size_gain.push_back(0.75 + 0.5 * t);
  }
  return wp;
}

double sample_size(const SizeLaw& law, Rng& rng) {
  double total = 0.0;
  for (const auto& c : law.components) total += c.weight;
  double u = rng.uniform() * total;
  for (const auto& c : law.components) {
    if (u < c.weight || &c == &law.components.back()) return rng.uniform(c.lo, c.hi);
    u -= c.weight;
  }
  return rng.uniform(law.components.back().lo, law.components.back().hi);
}

double feature_noise_std(const SnrLaw& snr, double s) {
  // Quartic ramp: noise stays near base for medium and large objects and
  // climbs steeply only once the object gets genuinely small.
  const double shrink = 1.0 - s;
  return snr.feature_noise_base *
         (1.0 + snr.feature_noise_slope * shrink * shrink * shrink * shrink);
}

Box sample_box_with_area(Rng& rng, double img_w, double img_h, double area_frac) {
  const double box_area = area_frac * img_w * img_h;
  // Aspect ratio restricted to what fits inside the image.
  const double ar_lo = std::max(0.6, box_area / (img_h * img_h));
  const double ar_hi = std::min(1.6, img_w * img_w / box_area);
  const double ar = ar_lo < ar_hi ? rng.uniform(ar_lo, ar_hi) : (ar_lo + ar_hi) * 0.5;
  double w = std::sqrt(box_area * ar);
  double h = box_area / w;
  w = std::min(w, img_w);
  h = std::min(h, img_h);
  const double x0 = rng.uniform(0.0, img_w - w);
  const double y0 = rng.uniform(0.0, img_h - h);
  return Box{x0, y0, x0 + w, y0 + h};
}

// Jitter a box by relative shift and scale; magnitude ~ how far the result
// drifts from the original in IoU.
Box jitter_box(Rng& rng, const Box& b, double magnitude, double img_w, double img_h) {
  const double w = b.x_max - b.x_min;
  const double h = b.y_max - b.y_min;
  const double dx = rng.uniform(-magnitude, magnitude) * w;
  const double dy = rng.uniform(-magnitude, magnitude) * h;
  const double sx = std::exp(rng.uniform(-magnitude, magnitude));
  const double sy = std::exp(rng.uniform(-magnitude, magnitude));
  const double cx = 0.5 * (b.x_min + b.x_max) + dx;
  const double cy = 0.5 * (b.y_min + b.y_max) + dy;
  Box j{cx - 0.5 * w * sx, cy - 0.5 * h * sy, cx + 0.5 * w * sx, cy + 0.5 * h * sy};
  j = clip_to_image(j, img_w, img_h);
  if (!j.valid()) {
    // Degenerate after clipping; fall back to a 1-unit box at the gt center.
    const double fx = std::min(std::max(cx, 0.5), img_w - 0.5);
    const double fy = std::min(std::max(cy, 0.5), img_h - 0.5);
    j = Box{fx - 0.5, fy - 0.5, fx + 0.5, fy + 0.5};
  }
  return j;
}

// Pooled appearance of a crop: the class prototype in proportion to how much
// of the crop the object fills, the surrounding content for the rest.
std::vector<double> blend_feature(const WorldParams& wp, std::size_t class_idx, double occupancy,
                                  const std::vector<double>& bg_vec, double noise_std, Rng& rng) {
  const std::size_t d = bg_vec.size();
  std::vector<double> f(d);
  const auto& proto = wp.class_protos[class_idx];
  for (std::size_t k = 0; k < d; ++k) {
    f[k] = occupancy * kClassAmp * proto[k] + (1.0 - occupancy) * bg_vec[k];
    f[k] += rng.normal(0.0, noise_std);
  }
  return f;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

ImageBag make_image(const SyntheticConfig& cfg, const WorldParams& wp, const std::string& id,
                    std::size_t class_idx, std::uint64_t image_seed) {
  Rng rng(image_seed);
  ImageBag img;
  img.id = id;
  img.width = rng.uniform(80.0, 120.0);
  img.height = rng.uniform(80.0, 120.0);
  const std::string cls = cfg.classes[class_idx];
  img.class_labels.insert(cls);

  const double s = sample_size(cfg.size_law, rng);
  const Box gt = sample_box_with_area(rng, img.width, img.height, s);
  img.gt_boxes[cls] = {gt};

  const std::size_t d = cfg.feature_dim;
  const double noise = feature_noise_std(cfg.snr_law, s);

  // Per-image background content: a recurring background prototype plus the
  // class's own context. The context direction co-occurs with the class in
  // every positive image, so it is genuinely discriminative against other
  // classes' images; an appearance model that latches onto it keeps picking
  // large context boxes. That is the trap size weighting is meant to spring.
  const auto& bg_proto = wp.bg_protos[rng.below(wp.bg_protos.size())];
  const double context_strength = rng.uniform(0.65, 1.0);
  std::vector<double> bg_vec(d);
  for (std::size_t k = 0; k < d; ++k)
    bg_vec[k] = kBackgroundAmp * bg_proto[k] +
                context_strength * kContextAmp * wp.context_protos[class_idx][k] +
                rng.normal(0.0, 0.3);

  // Whole-image appearance: the object occupies fraction s of the image, the
  // rest is background; a separate channel carries a monotone size signal.
  const double root_s = std::cbrt(s);
  img.whole_image_feature.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    img.whole_image_feature[k] = s * kClassAmp * wp.class_protos[class_idx][k] +
                                 (1.0 - s) * bg_vec[k] +
                                 kSizeChannelAmp * wp.class_size_gain[class_idx] * root_s *
                                     wp.size_channel[k] +
                                 rng.normal(0.0, cfg.snr_law.whole_image_noise);
  }

  const std::size_t n_props = cfg.proposals_per_image;
  const std::size_t n_rest = n_props > 0 ? n_props - 1 : 0;
  // Proposal quality tracks object size: small objects attract fewer and
  // sloppier object-derived boxes, so more of the pool is background.
  const double object_share = (1.0 - cfg.clutter) * (0.35 + 0.65 * s);
  const std::size_t n_obj =
      std::min(n_rest, static_cast<std::size_t>(std::lround(object_share * n_rest)));
  const std::size_t n_bg = n_rest - n_obj;

  auto other_bg = [&]() {
    // Background crops mix a recurring prototype with this image's context,
    // so a context-corrupted appearance model has consistent material to
    // latch onto.
    const auto& proto = wp.bg_protos[rng.below(wp.bg_protos.size())];
    std::vector<double> v(d);
    for (std::size_t k = 0; k < d; ++k)
      v[k] = kBackgroundAmp * proto[k] +
             context_strength * kContextAmp * wp.context_protos[class_idx][k] +
             rng.normal(0.0, 0.3);
    return v;
  };

  auto push_proposal = [&](const Box& b, const std::vector<double>& local_bg,
                           bool background_box) {
    Proposal p;
    p.box = b;
    // Appearance follows how much of the crop the object fills. Objectness
    // scores how tightly the box bounds a salient blob; the object is one
    // blob, but recurring context structures are blobs too, so background
    // boxes can carry respectable objectness.
    double occupancy = 0.0;
    double overlap = 0.0;
    for (const auto& g : img.gt_boxes[cls]) {
      occupancy = std::max(occupancy, intersection_area(b, g) / area(b));
      overlap = std::max(overlap, iou(b, g));
    }
    // Bigger blobs read as more salient, so large background boxes tend to
    // carry the strongest spurious objectness.
    const double area_frac = area(b) / (img.width * img.height);
    const double structure = background_box
                                 ? rng.uniform(0.2, 0.7) + 0.3 * std::min(1.0, 2.0 * area_frac)
                                 : overlap;
    p.feature = blend_feature(wp, class_idx, occupancy, local_bg, noise, rng);
    p.objectness = clamp01(kObjectnessBase + kObjectnessGain * overlap +
                           kStructureGain * structure +
                           rng.normal(0.0, cfg.snr_law.objectness_noise));
    img.proposals.push_back(std::move(p));
  };

  if (n_props > 0) {
    // Anchor proposal: a near-exact copy of the gt box, so every positive bag
    // contains at least one proposal with IoU well above 0.5.
    push_proposal(jitter_box(rng, gt, 0.01, img.width, img.height), bg_vec, false);
    for (std::size_t i = 0; i < n_obj; ++i) {
      // Object-derived boxes are either tight or clearly off; big objects get
      // mostly tight ones, small objects mostly sloppy ones.
      const bool tight = rng.uniform() < 0.65 - 0.45 * (1.0 - s);
      const double mag = tight ? rng.uniform(0.03, 0.2) : rng.uniform(0.5, 1.0);
      push_proposal(jitter_box(rng, gt, mag, img.width, img.height), bg_vec, false);
    }
    for (std::size_t i = 0; i < n_bg; ++i) {
      // Background boxes skew large: context is what big sloppy boxes are
      // made of, which is exactly what a context-corrupted model prefers.
      const double area_frac =
          rng.uniform() < 0.7 ? rng.uniform(0.25, 0.95) : rng.uniform(0.02, 0.25);
      push_proposal(sample_box_with_area(rng, img.width, img.height, area_frac), other_bg(), true);
    }
  }
  return img;
}

Dataset make_role(const SyntheticConfig& cfg, const WorldParams& wp, DatasetRole role,
                  const char* prefix, std::size_t count) {
  Dataset ds;
  ds.role = role;
  ds.classes = cfg.classes;
  ds.feature_dim = cfg.feature_dim;
  char buf[32];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof(buf), "%s%05zu", prefix, i);
    const std::size_t class_idx = i % cfg.classes.size();
    const std::uint64_t image_seed =
        substream_seed(cfg.seed, std::string("image-") + buf);
    ds.images.push_back(make_image(cfg, wp, buf, class_idx, image_seed));
  }
  canonicalize(ds);
  return ds;
}

}  // namespace

SizeLaw default_size_law() {
  SizeLaw law;
  law.components = {{0.02, 0.10, 1.0}, {0.10, 0.35, 1.0}, {0.35, 0.90, 1.0}};
  return law;
}

void SyntheticConfig::validate() const {
  if (num_regressor_images == 0 || num_wsol_images == 0 || num_test_images == 0)
    throw std::invalid_argument("synthetic: image counts must be positive");
  if (classes.empty()) throw std::invalid_argument("synthetic: need at least one class");
  if (feature_dim < 4) throw std::invalid_argument("synthetic: feature_dim must be >= 4");
  if (proposals_per_image == 0)
    throw std::invalid_argument("synthetic: proposals_per_image must be positive");
  if (clutter < 0.0 || clutter > 1.0)
    throw std::invalid_argument("synthetic: clutter must be in [0,1]");
  for (const auto& c : size_law.components) {
    if (!(c.lo > 0.0) || !(c.hi <= 1.0) || !(c.lo < c.hi) || !(c.weight > 0.0))
      throw std::invalid_argument("synthetic: size_law support must lie within (0,1]");
  }
  if (snr_law.feature_noise_base < 0.0 || snr_law.objectness_noise < 0.0 ||
      snr_law.whole_image_noise < 0.0 || snr_law.feature_noise_slope < 0.0)
    throw std::invalid_argument("synthetic: noise levels must be nonnegative");
}

SyntheticWorld generate_synthetic(const SyntheticConfig& cfg_in) {
  SyntheticConfig cfg = cfg_in;
  if (cfg.size_law.components.empty()) cfg.size_law = default_size_law();
  cfg.validate();
  const WorldParams wp = make_world(cfg);
  SyntheticWorld world;
  world.regressor_set =
      make_role(cfg, wp, DatasetRole::regressor_train, "r", cfg.num_regressor_images);
  world.wsol_set = make_role(cfg, wp, DatasetRole::wsol_train, "i", cfg.num_wsol_images);
  world.test_set = make_role(cfg, wp, DatasetRole::test, "x", cfg.num_test_images);
  return world;
}

}  // namespace wsol
