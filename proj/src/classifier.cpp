#include "wsol/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wsol/rng.hpp"

namespace wsol {

std::vector<double> l2_normalized(const std::vector<double>& x) {
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  if (n2 <= 0.0) return x;
  const double inv = 1.0 / std::sqrt(n2);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv;
  return out;
}

LinearModel train(const std::vector<std::vector<double>>& positives,
                  const std::vector<std::vector<double>>& negatives, const TrainOptions& opts) {
  if (positives.empty() || negatives.empty())
    throw std::invalid_argument("train: need at least one positive and one negative");
  if (!(opts.c > 0.0)) throw std::invalid_argument("train: C must be positive");

  const std::size_t d = positives.front().size();
  const std::size_t n = positives.size() + negatives.size();

  // Normalized rows with an appended bias feature of 1.
  const std::size_t da = d + 1;
  std::vector<double> x(n * da);
  std::vector<double> y(n);
  std::vector<double> qd(n);
  std::size_t row = 0;
  auto ingest = [&](const std::vector<double>& f, double label) {
    if (f.size() != d) throw std::invalid_argument("train: inconsistent feature dimensions");
    std::vector<double> v = l2_normalized(f);
    double q = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      x[row * da + k] = v[k];
      q += v[k] * v[k];
    }
    x[row * da + d] = 1.0;
    q += 1.0;
    qd[row] = q;
    y[row] = label;
    ++row;
  };
  for (const auto& f : positives) ingest(f, 1.0);
  for (const auto& f : negatives) ingest(f, -1.0);

  // Dual coordinate descent for the L1-loss SVM: keeps w = sum alpha_i y_i x_i
  // and sweeps coordinates in a seeded random order until the projected
  // gradient spread falls below tol.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> w(da, 0.0);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(opts.seed, "svm-solver");

  const double c = opts.c;
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    rng.shuffle(perm);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (std::size_t pi = 0; pi < n; ++pi) {
      const std::size_t i = perm[pi];
      const double* xi = x.data() + i * da;
      double wx = 0.0;
      for (std::size_t k = 0; k < da; ++k) wx += w[k] * xi[k];
      const double g = y[i] * wx - 1.0;
      double pg = g;
      if (alpha[i] <= 0.0)
        pg = std::min(g, 0.0);
      else if (alpha[i] >= c)
        pg = std::max(g, 0.0);
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::fabs(pg) > 1e-14) {
        const double old = alpha[i];
        alpha[i] = std::min(std::max(alpha[i] - g / qd[i], 0.0), c);
        const double delta = (alpha[i] - old) * y[i];
        if (delta != 0.0)
          for (std::size_t k = 0; k < da; ++k) w[k] += delta * xi[k];
      }
    }
    if (pg_max - pg_min < opts.tol) break;
  }

  LinearModel m;
  m.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d));
  m.bias = w[d];
  m.reg_c = c;
  return m;
}

double score(const LinearModel& m, const std::vector<double>& feature) {
  if (feature.size() != m.weights.size())
    throw std::invalid_argument("score: feature dimension mismatch");
  double s = m.bias;
  for (std::size_t k = 0; k < feature.size(); ++k) s += m.weights[k] * feature[k];
  return s;
}

std::vector<double> score_batch(const LinearModel& m,
                                const std::vector<std::vector<double>>& features) {
  std::vector<double> out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) out[i] = score(m, features[i]);
  return out;
}

double primal_objective(const LinearModel& m, const std::vector<std::vector<double>>& positives,
                        const std::vector<std::vector<double>>& negatives) {
  double obj = 0.5 * (m.bias * m.bias);
  for (double w : m.weights) obj += 0.5 * w * w;
  // The hinge is evaluated on the same normalized rows train() ingested.
  for (const auto& f : positives)
    obj += m.reg_c * std::max(0.0, 1.0 - score(m, l2_normalized(f)));
  for (const auto& f : negatives)
    obj += m.reg_c * std::max(0.0, 1.0 + score(m, l2_normalized(f)));
  return obj;
}

PlattParams fit_platt(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("fit_platt: scores/labels mismatch");
  double prior1 = 0.0, prior0 = 0.0;
  for (int l : labels) (l > 0 ? prior1 : prior0) += 1.0;
  if (prior1 == 0.0 || prior0 == 0.0)
    throw std::invalid_argument("fit_platt: both classes must be present");

  // Newton iteration on the regularized log-likelihood with prior-corrected
  // targets (Platt's method, numerically stabilized form).
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  const std::size_t n = scores.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi_target : lo_target;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double aa, double bb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fapb = aa * scores[i] + bb;
      if (fapb >= 0.0)
        f += t[i] * fapb + std::log1p(std::exp(-fapb));
      else
        f += (t[i] - 1.0) * fapb + std::log1p(std::exp(fapb));
    }
    return f;
  };

  double fval = objective(a, b);
  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigmaH = 1e-12;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigmaH, h22 = kSigmaH, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double fapb = a * scores[i] + b;
      double p, q;
      if (fapb >= 0.0) {
        p = std::exp(-fapb) / (1.0 + std::exp(-fapb));
        q = 1.0 / (1.0 + std::exp(-fapb));
      } else {
        p = 1.0 / (1.0 + std::exp(fapb));
        q = std::exp(fapb) / (1.0 + std::exp(fapb));
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = t[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < 1e-10 && std::fabs(g2) < 1e-10) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= kMinStep) {
      const double new_a = a + step * da;
      const double new_b = b + step * db;
      const double new_f = objective(new_a, new_b);
      if (new_f < fval + 1e-4 * step * gd) {
        a = new_a;
        b = new_b;
        fval = new_f;
        break;
      }
      step *= 0.5;
    }
    if (step < kMinStep) break;
  }

  PlattParams p;
  p.a_cal = std::min(a, -1e-12);  // degenerate fits clamp to keep monotonicity
  p.b_cal = b;
  return p;
}

double calibrate(const PlattParams& p, double s) {
  const double fapb = p.a_cal * s + p.b_cal;
  if (fapb >= 0.0) {
    const double e = std::exp(-fapb);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(fapb));
}

void mine_hard_negatives(const std::vector<MiningCandidate>& candidates, NegativeCache& cache,
                         double threshold, std::size_t cap) {
  std::vector<const MiningCandidate*> violators;
  for (const auto& c : candidates)
    if (c.model_score > threshold) violators.push_back(&c);
  std::sort(violators.begin(), violators.end(),
            [](const MiningCandidate* a, const MiningCandidate* b) {
              if (a->model_score != b->model_score) return a->model_score > b->model_score;
              if (a->image_id != b->image_id) return a->image_id < b->image_id;
              return a->proposal_index < b->proposal_index;
            });
  for (const MiningCandidate* c : violators) {
    if (cache.size() >= cap) break;
    auto key = std::make_pair(c->image_id, c->proposal_index);
    if (!cache.seen.insert(key).second) continue;
    cache.features.push_back(*c->feature);
    cache.sources.push_back(key);
  }
}

CalibratedModel train_calibrated(const std::vector<std::vector<double>>& positives,
                                 const std::vector<std::vector<double>>& negatives,
                                 const TrainOptions& opts) {
  CalibratedModel out;
  out.model = train(positives, negatives, opts);

  // Held-out scores from an internal 3-fold split keep the calibration off
  // the training scores. Tiny sets fall back to training scores.
  constexpr int kFolds = 3;
  std::vector<double> cal_scores;
  std::vector<int> cal_labels;
  if (positives.size() >= kFolds && negatives.size() >= kFolds) {
    for (int f = 0; f < kFolds; ++f) {
      std::vector<std::vector<double>> train_pos, train_neg;
      std::vector<const std::vector<double>*> held;
      std::vector<int> held_labels;
      for (std::size_t i = 0; i < positives.size(); ++i) {
        if (static_cast<int>(i % kFolds) == f) {
          held.push_back(&positives[i]);
          held_labels.push_back(1);
        } else {
          train_pos.push_back(positives[i]);
        }
      }
      for (std::size_t i = 0; i < negatives.size(); ++i) {
        if (static_cast<int>(i % kFolds) == f) {
          held.push_back(&negatives[i]);
          held_labels.push_back(0);
        } else {
          train_neg.push_back(negatives[i]);
        }
      }
      LinearModel sub = train(train_pos, train_neg, opts);
      for (std::size_t i = 0; i < held.size(); ++i) {
        cal_scores.push_back(score(sub, l2_normalized(*held[i])));
        cal_labels.push_back(held_labels[i]);
      }
    }
  } else {
    for (const auto& p : positives) {
      cal_scores.push_back(score(out.model, l2_normalized(p)));
      cal_labels.push_back(1);
    }
    for (const auto& nf : negatives) {
      cal_scores.push_back(score(out.model, l2_normalized(nf)));
      cal_labels.push_back(0);
    }
  }
  out.platt = fit_platt(cal_scores, cal_labels);
  return out;
}

}  // namespace wsol
