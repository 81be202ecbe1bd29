#include "wsol/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "wsol/rng.hpp"

namespace wsol {

std::string ordering_name(Ordering o) {
  switch (o) {
    case Ordering::estimated_size: return "size";
    case Ordering::random: return "random";
  }
  throw std::logic_error("unknown ordering");
}

Ordering ordering_from_name(const std::string& name) {
  if (name == "size" || name == "estimated-size") return Ordering::estimated_size;
  if (name == "random") return Ordering::random;
  throw std::invalid_argument("unknown ordering: " + name);
}

void CurriculumConfig::validate() const {
  if (batches < 1) throw std::invalid_argument("CurriculumConfig: batches must be >= 1");
  if (iterations < 1) throw std::invalid_argument("CurriculumConfig: iterations must be >= 1");
  if (!(svm_c > 0.0)) throw std::invalid_argument("CurriculumConfig: svm_c must be positive");
  if (negatives_per_image < 1)
    throw std::invalid_argument("CurriculumConfig: negatives_per_image must be >= 1");
}

std::uint64_t model_hash(const LinearModel& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (double w : m.weights) mix(w);
  mix(m.bias);
  return h;
}

NegativePool build_negative_pool(const std::vector<const ImageBag*>& negative_images,
                                 const CurriculumConfig& cfg) {
  NegativePool pool;
  Rng rng(cfg.seed, "negative-pool");
  for (const ImageBag* bag : negative_images) {
    auto picks = rng.sample_without_replacement(bag->proposals.size(), cfg.negatives_per_image);
    std::sort(picks.begin(), picks.end());
    for (std::size_t idx : picks) pool.base.push_back(bag->proposals[idx].feature);
    for (std::size_t i = 0; i < bag->proposals.size(); ++i)
      pool.mining.push_back({bag->id, i, 0.0, &bag->proposals[i].feature});
  }
  return pool;
}

CalibratedModel initialize(const std::vector<const ImageBag*>& batch1,
                           const std::vector<std::vector<double>>& negative_pool,
                           const CurriculumConfig& cfg) {
  if (batch1.empty()) throw std::invalid_argument("initialize: first batch is empty");
  if (negative_pool.empty()) throw std::invalid_argument("initialize: no negative examples");
  std::vector<std::vector<double>> whole;
  whole.reserve(batch1.size());
  for (const ImageBag* bag : batch1) whole.push_back(bag->whole_image_feature);
  TrainOptions opts;
  opts.c = cfg.svm_c;
  opts.seed = substream_seed(cfg.seed, "svm-init");
  return train_calibrated(whole, negative_pool, opts);
}

std::vector<double> score_proposals(const ImageBag& image, const CalibratedModel& model,
                                    const SizeEstimates& estimates, const CurriculumConfig& cfg) {
  double s_e = 0.0;
  WeightParams wp;
  if (cfg.use_size_weighting) {
    auto it = estimates.s_e_root.find(image.id);
    if (it == estimates.s_e_root.end())
      throw std::invalid_argument("score_proposals: no size estimate for image " + image.id);
    s_e = (cfg.weight_space == WeightSpace::root)
              ? it->second
              : std::pow(it->second, static_cast<double>(estimates.root));
    wp = WeightParams{cfg.weight_delta, estimates.sigma, cfg.weight_space};
  }

  std::vector<double> scores;
  scores.reserve(image.proposals.size());
  for (const Proposal& p : image.proposals) {
    double s = calibrate(model.platt, score(model.model, l2_normalized(p.feature)));
    if (cfg.use_objectness) s *= p.objectness;
    if (cfg.use_size_weighting) {
      double s_p = normalized_size(p.box, image.width, image.height);
      if (cfg.weight_space == WeightSpace::root) s_p = root_transform(s_p, estimates.root);
      s *= size_weight(s_p, s_e, wp);
    }
    scores.push_back(s);
  }
  return scores;
}

namespace {

std::size_t argmax_lowest_index(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

double trace_corloc(const Selection& sel, const std::vector<const ImageBag*>& working_set,
                    const std::string& cls) {
  std::map<std::string, const ImageBag*> by_id;
  for (const ImageBag* bag : working_set) by_id[bag->id] = bag;
  return corloc(sel, by_id, cls);
}

}  // namespace

Selection relocalize(const std::vector<const ImageBag*>& working_set, const CalibratedModel& model,
                     const SizeEstimates& estimates, const CurriculumConfig& cfg) {
  Selection sel;
  for (const ImageBag* bag : working_set) {
    std::vector<double> scores = score_proposals(*bag, model, estimates, cfg);
    sel[bag->id] = argmax_lowest_index(scores);
  }
  return sel;
}

CalibratedModel retrain(const Selection& selection,
                        const std::map<std::string, const ImageBag*>& positive_by_id,
                        const std::vector<std::vector<double>>& negatives,
                        const CurriculumConfig& cfg, int k, int m) {
  TrainOptions opts;
  opts.c = cfg.svm_c;
  opts.seed = substream_seed(cfg.seed, "svm-k" + std::to_string(k) + "-m" + std::to_string(m));
  std::vector<std::vector<double>> pos_features;
  pos_features.reserve(selection.size());
  for (const auto& [id, idx] : selection) {
    const ImageBag* bag = positive_by_id.at(id);
    if (idx >= bag->proposals.size())
      throw std::invalid_argument("retrain: selection index out of range for image " + id);
    pos_features.push_back(bag->proposals[idx].feature);
  }
  return train_calibrated(pos_features, negatives, opts);
}

RunTrace run_curriculum(const Dataset& train, const std::string& cls,
                        const SizeEstimates& estimates, const CurriculumConfig& cfg) {
  cfg.validate();

  std::vector<const ImageBag*> positives, negatives;
  for (const ImageBag& img : train.images)
    (img.positive_for(cls) ? positives : negatives).push_back(&img);
  if (positives.empty()) throw std::invalid_argument("run_curriculum: no positive images for " + cls);
  if (negatives.empty()) throw std::invalid_argument("run_curriculum: no negative images for " + cls);

  RunTrace trace;
  trace.cls = cls;
  trace.batch_ids = (cfg.ordering == Ordering::estimated_size)
                        ? split_batches(positives, estimates.s_e_root, cfg.batches)
                        : random_batches(positives, cfg.batches, cfg.seed);

  std::map<std::string, const ImageBag*> positive_by_id;
  for (const ImageBag* bag : positives) positive_by_id[bag->id] = bag;

  NegativePool pool = build_negative_pool(negatives, cfg);
  NegativeCache cache;

  auto negatives_with_cache = [&]() {
    std::vector<std::vector<double>> all = pool.base;
    all.insert(all.end(), cache.features.begin(), cache.features.end());
    return all;
  };

  CalibratedModel model;
  std::vector<const ImageBag*> working_set;
  for (int k = 1; k <= cfg.batches; ++k) {
    for (const std::string& id : trace.batch_ids[static_cast<std::size_t>(k - 1)])
      working_set.push_back(positive_by_id.at(id));

    if (k == 1) model = initialize(working_set, negatives_with_cache(), cfg);

    for (int m = 1; m <= cfg.iterations; ++m) {
      Selection sel = relocalize(working_set, model, estimates, cfg);

      for (MiningCandidate& c : pool.mining)
        c.model_score = score(model.model, l2_normalized(*c.feature));
      // Cap 0 means proportional: 50 hard negatives per positive example.
      const std::size_t cap =
          cfg.hard_negative_cap > 0 ? cfg.hard_negative_cap : 50 * sel.size();
      mine_hard_negatives(pool.mining, cache, cfg.hard_negative_threshold, cap);

      model = retrain(sel, positive_by_id, negatives_with_cache(), cfg, k, m);

      IterationRecord rec;
      rec.batch = k;
      rec.iteration = m;
      rec.working_set = working_set.size();
      rec.positive_training_count = sel.size();
      rec.negative_cache = cache.size();
      rec.selection = std::move(sel);
      rec.corloc = trace_corloc(rec.selection, working_set, cls);
      rec.model_hash = model_hash(model.model);
      trace.rounds.push_back(std::move(rec));
    }
  }

  trace.final_selection = relocalize(working_set, model, estimates, cfg);
  trace.final_corloc = trace_corloc(trace.final_selection, working_set, cls);
  trace.final_model = std::move(model);
  trace.mined_sources = cache.sources;
  return trace;
}

}  // namespace wsol
