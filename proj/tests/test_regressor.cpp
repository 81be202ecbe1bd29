#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <doctest.h>

#include "wsol/kernels.hpp"
#include "wsol/regressor.hpp"
#include "wsol/rng.hpp"
#include "oracles.hpp"

using namespace wsol;

namespace {

// Random feature matrix with entries in (0,1), flat row-major.
std::vector<double> random_features(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<double> x(n * d);
  for (double& v : x) v = rng.uniform();
  return x;
}

double in_sample_mse(const SizeRegressor& reg, const std::vector<double>& features, std::size_t n,
                     const std::vector<double>& targets) {
  auto preds = predict_batch(reg, features, n);
  double mse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = preds[i].s_e_root - targets[i];
    mse += r * r;
  }
  return mse / static_cast<double>(n);
}

}  // namespace

TEST_CASE("linear kernel with tiny ridge interpolates linear targets") {
  Rng rng(7, "krr-linear");
  const std::size_t n = 12, d = 4;
  const std::vector<double> x = random_features(n, d, rng);
  const std::vector<double> w = {0.3, 0.2, 0.1, 0.25};
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = 0.05;
    for (std::size_t k = 0; k < d; ++k) y[i] += w[k] * x[i * d + k];
  }

  // The constant offset rides on an appended all-ones column so the target
  // stays exactly linear in the features.
  std::vector<double> xb(n * (d + 1));
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(i * d),
              x.begin() + static_cast<std::ptrdiff_t>((i + 1) * d), xb.begin() + static_cast<std::ptrdiff_t>(i * (d + 1)));
    xb[i * (d + 1) + d] = 1.0;
  }
  SizeRegressor reg = fit_krr(xb, n, d + 1, y, 1e-10, {KernelKind::linear, 1.0}, 3);
  auto preds = predict_batch(reg, xb, n);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(preds[i].s_e_root - y[i]) < 1e-6);
}

TEST_CASE("fit_krr rejects degenerate input") {
  const std::vector<double> one_row = {0.1, 0.2};
  CHECK_THROWS(fit_krr(one_row, 1, 2, {0.5}, 0.1, {KernelKind::rbf, 1.0}, 3));

  const std::vector<double> x = {0.1, 0.2, 0.3, 0.4};
  CHECK_THROWS(fit_krr(x, 2, 2, {0.5, 1.5}, 0.1, {KernelKind::rbf, 1.0}, 3));  // target > 1
  CHECK_THROWS(fit_krr(x, 2, 2, {0.5, 0.0}, 0.1, {KernelKind::rbf, 1.0}, 3));  // target <= 0
  CHECK_THROWS(fit_krr(x, 2, 2, {0.5}, 0.1, {KernelKind::rbf, 1.0}, 3));       // length mismatch
  CHECK_THROWS(fit_krr(x, 2, 3, {0.5, 0.6}, 0.1, {KernelKind::rbf, 1.0}, 3));  // shape mismatch
}

TEST_CASE("ridge-free fit on duplicate rows fails advising a positive ridge") {
  const std::vector<double> x = {0.4, 0.6, 0.4, 0.6};  // two identical rows
  bool threw = false;
  try {
    fit_krr(x, 2, 2, {0.5, 0.5}, 0.0, {KernelKind::rbf, 1.0}, 3);
  } catch (const std::exception& e) {
    threw = true;
    CHECK(std::string(e.what()).find("ridge > 0") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("dual weights of a 3x3 system match a dense-solver oracle") {
  const std::vector<double> x = {0.1, 0.9, 0.5, 0.4, 0.8, 0.2};  // 3 rows, d=2
  const std::vector<double> y = {0.3, 0.6, 0.9};
  const KernelSpec spec{KernelKind::rbf, 1.5};
  const double ridge = 0.1;
  SizeRegressor reg = fit_krr(x, 3, 2, y, ridge, spec, 3);

  std::vector<double> a = gram_matrix(x, 3, 2, spec);
  for (std::size_t i = 0; i < 3; ++i) a[i * 3 + i] += ridge;
  const std::vector<double> alpha = oracle::solve_dense(a, y, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(reg.dual_weights[i] - alpha[i]) < 1e-10);
}

TEST_CASE("interpolating fit reproduces training targets at support points") {
  Rng rng(13, "krr-interp");
  const std::size_t n = 6, d = 3;
  const std::vector<double> x = random_features(n, d, rng);
  std::vector<double> y(n);
  for (double& v : y) v = 0.1 + 0.8 * rng.uniform();
  SizeRegressor reg = fit_krr(x, n, d, y, 1e-10, {KernelKind::rbf, 1.0}, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> q(x.begin() + static_cast<std::ptrdiff_t>(i * d),
                                x.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    CHECK(std::abs(predict(reg, q).s_e_root - y[i]) < 1e-6);
  }
}

TEST_CASE("predictions are clamped into the legal size range") {
  SizeRegressor reg;
  reg.kernel = {KernelKind::linear, 1.0};
  reg.support_features = {1.0};
  reg.n = 1;
  reg.d = 1;
  reg.root = 3;

  reg.dual_weights = {1.2};  // raw prediction 1.2 at query [1]
  SizePrediction high = predict(reg, {1.0});
  CHECK(high.s_e_root == 1.0);
  CHECK(high.s_e == 1.0);

  reg.dual_weights = {-0.1};  // raw prediction -0.1
  SizePrediction low = predict(reg, {1.0});
  CHECK(low.s_e_root == SizeRegressor::kFloor);
  CHECK(low.s_e == std::pow(SizeRegressor::kFloor, 3.0));

  CHECK_THROWS(predict(reg, {1.0, 2.0}));  // dimension mismatch
}

TEST_CASE("predictions ignore the ordering of training rows") {
  Rng rng(29, "krr-order");
  const std::size_t n = 10, d = 3;
  std::vector<double> x = random_features(n, d, rng);
  std::vector<double> y(n);
  for (double& v : y) v = 0.2 + 0.6 * rng.uniform();

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::vector<double> xp(n * d);
  std::vector<double> yp(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(perm[i] * d),
              x.begin() + static_cast<std::ptrdiff_t>((perm[i] + 1) * d),
              xp.begin() + static_cast<std::ptrdiff_t>(i * d));
    yp[i] = y[perm[i]];
  }

  SizeRegressor reg_a = fit_krr(x, n, d, y, 0.05, {KernelKind::rbf, 1.2}, 3);
  SizeRegressor reg_b = fit_krr(xp, n, d, yp, 0.05, {KernelKind::rbf, 1.2}, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> q = {rng.uniform(), rng.uniform(), rng.uniform()};
    CHECK(std::abs(predict(reg_a, q).s_e_root - predict(reg_b, q).s_e_root) < 1e-10);
  }
}

TEST_CASE("in-sample error never grows as the ridge shrinks") {
  Rng rng(31, "krr-ladder");
  const std::size_t n = 15, d = 3;
  const std::vector<double> x = random_features(n, d, rng);
  std::vector<double> y(n);
  for (double& v : y) v = 0.15 + 0.7 * rng.uniform();

  double prev = std::numeric_limits<double>::infinity();
  for (double ridge : {10.0, 1.0, 0.1, 0.01, 1e-3, 1e-4}) {
    SizeRegressor reg = fit_krr(x, n, d, y, ridge, {KernelKind::rbf, 1.0}, 3);
    const double mse = in_sample_mse(reg, x, n, y);
    CHECK(mse <= prev + 1e-12);
    prev = mse;
  }
}

TEST_CASE("root-space training recovers the original areas") {
  // Areas 1/8 and 1/27 have cube roots 1/2 and 1/3; an exact fit in root
  // space must reproduce the areas after cubing.
  const std::vector<double> x = {0.2, 0.3, 0.8, 0.7};
  const std::vector<double> y = {0.5, 1.0 / 3.0};
  SizeRegressor reg = fit_krr(x, 2, 2, y, 1e-12, {KernelKind::rbf, 1.0}, 3);
  CHECK(std::abs(predict(reg, {0.2, 0.3}).s_e - 0.125) < 1e-6);
  CHECK(std::abs(predict(reg, {0.8, 0.7}).s_e - 1.0 / 27.0) < 1e-6);
}

TEST_CASE("median_heuristic follows the hand-enumerated medians") {
  CHECK(median_heuristic({0.0, 2.0}, 2, 1, 1) == 2.0);

  // Colinear points 0, 1, 2: pairwise distances {1, 1, 2}, median 1.
  CHECK(median_heuristic({0.0, 1.0, 2.0}, 3, 1, 1) == 1.0);

  // Duplicating every row adds only zero self-pairs and repeats of the same
  // distances, so the median is unchanged.
  Rng rng(17, "median-dup");
  const std::size_t n = 9, d = 3;
  const std::vector<double> x = random_features(n, d, rng);
  std::vector<double> doubled;
  for (std::size_t i = 0; i < n; ++i)
    for (int rep = 0; rep < 2; ++rep)
      doubled.insert(doubled.end(), x.begin() + static_cast<std::ptrdiff_t>(i * d),
                     x.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
  CHECK(std::abs(median_heuristic(x, n, d, 1) - median_heuristic(doubled, 2 * n, d, 1)) < 1e-12);

  CHECK_THROWS(median_heuristic({0.5}, 1, 1, 1));                  // n < 2
  CHECK_THROWS(median_heuristic({0.5, 0.5, 0.5, 0.5}, 2, 2, 1));  // all identical
}

TEST_CASE("cross-validation picks a setting and reports a holdout sigma") {
  Rng rng(41, "cv-data");
  const std::size_t n = 35, d = 3;
  const std::vector<double> x = random_features(n, d, rng);
  std::vector<double> clean(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = 0.0;
    for (std::size_t k = 0; k < d; ++k) t += x[i * d + k];
    clean[i] = 0.2 + 0.6 * (t / static_cast<double>(d));
  }
  std::vector<double> noisy(n);
  for (std::size_t i = 0; i < n; ++i)
    noisy[i] = std::min(1.0, std::max(0.01, clean[i] + rng.normal(0.0, 0.1)));

  const std::vector<double> lambdas = default_lambda_grid();
  const double med = median_heuristic(x, n, d, 1);
  const std::vector<double> bws = {0.5 * med, med, 2.0 * med};

  auto cv_clean = cross_validate(x, n, d, clean, 7, lambdas, bws, KernelKind::rbf, 3, 5);
  auto cv_noisy = cross_validate(x, n, d, noisy, 7, lambdas, bws, KernelKind::rbf, 3, 5);
  CHECK(cv_clean.sigma < cv_noisy.sigma);
  CHECK(cv_clean.sigma > 0.0);

  // Same seed, same call: the fold split and hence sigma are bit-identical.
  auto cv_again = cross_validate(x, n, d, clean, 7, lambdas, bws, KernelKind::rbf, 3, 5);
  CHECK(cv_again.sigma == cv_clean.sigma);
  CHECK(cv_again.best_lambda == cv_clean.best_lambda);
  CHECK(cv_again.best_bandwidth == cv_clean.best_bandwidth);

  // A single-point grid is returned as-is.
  auto cv_single = cross_validate(x, n, d, clean, 7, {0.01}, {2.0}, KernelKind::rbf, 3, 5);
  CHECK(cv_single.best_lambda == 0.01);
  CHECK(cv_single.best_bandwidth == 2.0);

  CHECK_THROWS(cross_validate(x, 5, d, {0.5, 0.5, 0.5, 0.5, 0.5}, 7, lambdas, bws,
                              KernelKind::rbf, 3, 5));  // fewer rows than folds
}

TEST_CASE("regressor mode names round-trip") {
  for (RegressorMode m :
       {RegressorMode::class_specific, RegressorMode::class_generic, RegressorMode::across_class})
    CHECK(regressor_mode_from_name(regressor_mode_name(m)) == m);
  CHECK_THROWS(regressor_mode_from_name("sideways"));
}
