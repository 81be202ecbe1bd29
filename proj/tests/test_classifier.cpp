#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <doctest.h>

#include "wsol/classifier.hpp"
#include "wsol/rng.hpp"

using namespace wsol;

namespace {

// Two separable blobs around +c and -c in d dimensions.
void separable_blobs(std::size_t per_class, std::size_t d, double spread, Rng& rng,
                     std::vector<std::vector<double>>* pos,
                     std::vector<std::vector<double>>* neg) {
  for (std::size_t i = 0; i < per_class; ++i) {
    std::vector<double> p(d), n(d);
    for (std::size_t k = 0; k < d; ++k) {
      p[k] = (k == 0 ? 2.0 : 0.5) + rng.normal(0.0, spread);
      n[k] = (k == 0 ? -2.0 : -0.5) + rng.normal(0.0, spread);
    }
    pos->push_back(p);
    neg->push_back(n);
  }
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / (norm(a) * norm(b));
}

}  // namespace

TEST_CASE("separable unit points get symmetric margins") {
  const std::vector<std::vector<double>> pos = {{1.0, 0.0, 0.0}};
  const std::vector<std::vector<double>> neg = {{-1.0, 0.0, 0.0}};
  LinearModel m = train(pos, neg, {});
  const double sp = score(m, l2_normalized(pos[0]));
  const double sn = score(m, l2_normalized(neg[0]));
  CHECK(sp > 0.0);
  CHECK(sn < 0.0);
  CHECK(std::abs(sp + sn) < 1e-6);  // margins symmetric around the boundary
}

TEST_CASE("train rejects degenerate single-class input") {
  const std::vector<std::vector<double>> pos = {{1.0, 0.0}};
  CHECK_THROWS(train(pos, {}, {}));
  CHECK_THROWS(train({}, pos, {}));
  TrainOptions bad;
  bad.c = 0.0;
  CHECK_THROWS(train(pos, {{-1.0, 0.0}}, bad));
}

TEST_CASE("duplicating the training set keeps the boundary direction") {
  Rng rng(3, "svm-dup");
  std::vector<std::vector<double>> pos, neg;
  separable_blobs(12, 4, 0.15, rng, &pos, &neg);

  // The direction comparison needs both solves driven to tight optimality;
  // at the default tolerance the residual dominates the 1e-6 cosine bar.
  TrainOptions opts;
  opts.tol = 1e-10;
  opts.max_epochs = 20000;
  LinearModel base = train(pos, neg, opts);
  std::vector<std::vector<double>> pos2 = pos, neg2 = neg;
  pos2.insert(pos2.end(), pos.begin(), pos.end());
  neg2.insert(neg2.end(), neg.begin(), neg.end());
  LinearModel doubled = train(pos2, neg2, opts);

  std::vector<double> wa = base.weights, wb = doubled.weights;
  wa.push_back(base.bias);
  wb.push_back(doubled.bias);
  CHECK(cosine(wa, wb) > 1.0 - 1e-6);
}

TEST_CASE("weight norm shrinks monotonically as C shrinks") {
  Rng rng(9, "svm-ladder");
  std::vector<std::vector<double>> pos, neg;
  separable_blobs(10, 3, 0.3, rng, &pos, &neg);
  double prev = std::numeric_limits<double>::infinity();
  for (double c : {1.0, 0.1, 0.01, 1e-3, 1e-4}) {
    TrainOptions opts;
    opts.c = c;
    LinearModel m = train(pos, neg, opts);
    std::vector<double> w = m.weights;
    w.push_back(m.bias);
    const double n = norm(w);
    CHECK(n <= prev + 1e-9);
    prev = n;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("score is the plain affine map") {
  LinearModel m;
  m.weights = {0.0, 0.0, 0.0};
  m.bias = 0.5;
  CHECK(score(m, {7.0, -3.0, 2.5}) == 0.5);

  m.weights = {1.0, 0.0, 0.0};
  m.bias = 0.0;
  CHECK(score(m, {2.0, 0.0, 0.0}) == 2.0);

  m.weights = {0.4, -0.3, 0.2};
  m.bias = 0.25;
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> y = {-0.5, 0.7, 1.1};
  std::vector<double> xy(3);
  for (int k = 0; k < 3; ++k) xy[k] = x[k] + y[k];
  CHECK(std::abs(score(m, xy) - (score(m, x) + score(m, y) - m.bias)) < 1e-12);

  CHECK_THROWS(score(m, {1.0}));  // dimension mismatch

  auto batch = score_batch(m, {x, y});
  CHECK(batch[0] == score(m, x));
  CHECK(batch[1] == score(m, y));
}

TEST_CASE("objective at the solution beats the zero model") {
  Rng rng(21, "svm-objective");
  std::vector<std::vector<double>> pos, neg;
  separable_blobs(15, 5, 0.6, rng, &pos, &neg);
  LinearModel m = train(pos, neg, {});
  LinearModel zero;
  zero.weights.assign(5, 0.0);
  zero.reg_c = m.reg_c;
  const double at_solution = primal_objective(m, pos, neg);
  const double at_zero = primal_objective(zero, pos, neg);
  CHECK(std::isfinite(at_solution));
  CHECK(at_solution <= at_zero);
}

TEST_CASE("training is deterministic given the seed") {
  Rng rng(33, "svm-det");
  std::vector<std::vector<double>> pos, neg;
  separable_blobs(8, 4, 0.5, rng, &pos, &neg);
  TrainOptions opts;
  opts.seed = 77;
  LinearModel a = train(pos, neg, opts);
  LinearModel b = train(pos, neg, opts);
  CHECK(a.weights == b.weights);
  CHECK(a.bias == b.bias);
}

namespace {

std::vector<MiningCandidate> make_candidates(const std::vector<double>& scores,
                                             const std::vector<std::vector<double>>& storage) {
  std::vector<MiningCandidate> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    MiningCandidate c;
    c.image_id = "neg" + std::to_string(i / 10);
    c.proposal_index = i % 10;
    c.model_score = scores[i];
    c.feature = &storage[i];
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("mining ignores candidates below the threshold") {
  std::vector<std::vector<double>> storage(5, std::vector<double>{1.0, 2.0});
  auto candidates = make_candidates({-1.5, -2.0, -1.01, -3.0, -1.2}, storage);
  NegativeCache cache;
  mine_hard_negatives(candidates, cache, -1.0, 100);
  CHECK(cache.size() == 0);
}

TEST_CASE("mining keeps the highest-scoring violators up to the cap") {
  Rng rng(5, "mining");
  std::vector<std::vector<double>> storage(100, std::vector<double>{0.0});
  std::vector<double> scores(100);
  for (std::size_t i = 0; i < 100; ++i) {
    scores[i] = rng.uniform(-0.9, 3.0);  // every candidate violates the margin
    storage[i][0] = static_cast<double>(i);
  }
  auto candidates = make_candidates(scores, storage);
  NegativeCache cache;
  mine_hard_negatives(candidates, cache, -1.0, 10);
  REQUIRE(cache.size() == 10);

  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (std::size_t i = 0; i < 10; ++i) {
    // The cached feature identifies the candidate; check it is the i-th best.
    const double got = cache.features[i][0];
    CHECK(scores[static_cast<std::size_t>(got)] == sorted[i]);
  }
}

TEST_CASE("re-mining with the same model and bags changes nothing") {
  std::vector<std::vector<double>> storage(6, std::vector<double>{1.0});
  auto candidates = make_candidates({0.5, 1.5, -0.2, 2.0, 0.0, -0.8}, storage);
  NegativeCache cache;
  mine_hard_negatives(candidates, cache, -1.0, 100);
  const std::size_t first = cache.size();
  REQUIRE(first == 6);
  mine_hard_negatives(candidates, cache, -1.0, 100);
  CHECK(cache.size() == first);
  CHECK(cache.sources.size() == first);
}

TEST_CASE("calibration is monotone and ordered on separated scores") {
  const std::vector<double> scores = {-2.0, -2.0, -2.0, 2.0, 2.0, 2.0};
  const std::vector<int> labels = {0, 0, 0, 1, 1, 1};
  PlattParams p = fit_platt(scores, labels);
  CHECK(p.a_cal < 0.0);
  CHECK(calibrate(p, -2.0) < 0.5);
  CHECK(calibrate(p, 2.0) > 0.5);

  double prev = -1.0;
  for (double s : {-5.0, -1.0, 0.0, 0.3, 2.0, 10.0}) {
    const double v = calibrate(p, s);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("balanced symmetric data calibrates the midpoint to one half") {
  std::vector<double> scores;
  std::vector<int> labels;
  Rng rng(15, "platt-sym");
  for (int i = 0; i < 200; ++i) {
    const double jitter = rng.normal(0.0, 0.3);
    scores.push_back(1.0 + jitter);
    labels.push_back(1);
    scores.push_back(-1.0 - jitter);  // exact mirror
    labels.push_back(0);
  }
  PlattParams p = fit_platt(scores, labels);
  CHECK(std::abs(calibrate(p, 0.0) - 0.5) < 1e-3);
}

TEST_CASE("fit_platt requires both classes") {
  CHECK_THROWS(fit_platt({1.0, 2.0}, {1, 1}));
  CHECK_THROWS(fit_platt({1.0, 2.0}, {0, 0}));
  CHECK_THROWS(fit_platt({}, {}));
}

TEST_CASE("calibration never changes the argmax of a bag") {
  Rng rng(27, "platt-argmax");
  PlattParams p;
  p.a_cal = -1.7;
  p.b_cal = 0.4;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> raw(20), cal(20);
    for (int i = 0; i < 20; ++i) {
      raw[static_cast<std::size_t>(i)] = rng.normal(0.0, 2.0);
      cal[static_cast<std::size_t>(i)] = calibrate(p, raw[static_cast<std::size_t>(i)]);
    }
    const auto argmax = [](const std::vector<double>& v) {
      return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
    };
    CHECK(argmax(raw) == argmax(cal));
  }
}

TEST_CASE("bias shifts never change the argmax of a bag") {
  Rng rng(35, "bias-argmax");
  LinearModel m;
  m.weights = {0.7, -0.2, 0.4};
  m.bias = 0.1;
  LinearModel shifted = m;
  shifted.bias = 5.3;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> bag;
    for (int i = 0; i < 12; ++i)
      bag.push_back({rng.normal(), rng.normal(), rng.normal()});
    auto a = score_batch(m, bag);
    auto b = score_batch(shifted, bag);
    const auto argmax = [](const std::vector<double>& v) {
      return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
    };
    CHECK(argmax(a) == argmax(b));
  }
}

TEST_CASE("train_calibrated returns a usable model and calibration") {
  Rng rng(44, "svm-cal");
  std::vector<std::vector<double>> pos, neg;
  separable_blobs(12, 4, 0.4, rng, &pos, &neg);
  CalibratedModel cm = train_calibrated(pos, neg, {});
  CHECK(cm.platt.a_cal < 0.0);
  const double p_pos = calibrate(cm.platt, score(cm.model, l2_normalized(pos[0])));
  const double p_neg = calibrate(cm.platt, score(cm.model, l2_normalized(neg[0])));
  CHECK(p_pos > p_neg);
}
