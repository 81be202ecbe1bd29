#include "wsol/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wsol {

namespace {
int g_threads = 1;

inline double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

inline double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}
}  // namespace

void set_num_threads(int n) { g_threads = n < 1 ? 1 : n; }
int num_threads() { return g_threads; }

double kernel_eval(const KernelSpec& spec, const double* a, const double* b, std::size_t d) {
  if (spec.kind == KernelKind::linear) return dot(a, b, d);
  if (!(spec.bandwidth > 0.0)) throw std::invalid_argument("rbf kernel needs bandwidth > 0");
  return std::exp(-sq_dist(a, b, d) / (2.0 * spec.bandwidth * spec.bandwidth));
}

void gram_matrix_serial(const double* x, std::size_t n, std::size_t d, const KernelSpec& spec,
                        double* out) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] = kernel_eval(spec, x + i * d, x + j * d, d);
}

void gram_matrix_parallel(const double* x, std::size_t n, std::size_t d, const KernelSpec& spec,
                          double* out) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(g_threads)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i) * n + j] =
          kernel_eval(spec, x + static_cast<std::size_t>(i) * d, x + j * d, d);
}

std::vector<double> gram_matrix(const std::vector<double>& x, std::size_t n, std::size_t d,
                                const KernelSpec& spec) {
  std::vector<double> out(n * n);
  if (g_threads > 1)
    gram_matrix_parallel(x.data(), n, d, spec, out.data());
  else
    gram_matrix_serial(x.data(), n, d, spec, out.data());
  return out;
}

void kernel_predict_serial(const double* support, std::size_t ns, const double* alpha,
                           const double* queries, std::size_t nq, std::size_t d,
                           const KernelSpec& spec, double* out) {
  for (std::size_t q = 0; q < nq; ++q) {
    double s = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
      s += alpha[i] * kernel_eval(spec, support + i * d, queries + q * d, d);
    out[q] = s;
  }
}

void kernel_predict_parallel(const double* support, std::size_t ns, const double* alpha,
                             const double* queries, std::size_t nq, std::size_t d,
                             const KernelSpec& spec, double* out) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(g_threads)
#endif
  for (long long q = 0; q < static_cast<long long>(nq); ++q) {
    double s = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
      s += alpha[i] * kernel_eval(spec, support + i * d, queries + static_cast<std::size_t>(q) * d, d);
    out[q] = s;
  }
}

std::vector<double> kernel_predict(const std::vector<double>& support, std::size_t ns,
                                   const std::vector<double>& alpha,
                                   const std::vector<double>& queries, std::size_t nq,
                                   std::size_t d, const KernelSpec& spec) {
  std::vector<double> out(nq);
  if (g_threads > 1)
    kernel_predict_parallel(support.data(), ns, alpha.data(), queries.data(), nq, d, spec,
                            out.data());
  else
    kernel_predict_serial(support.data(), ns, alpha.data(), queries.data(), nq, d, spec,
                          out.data());
  return out;
}

void pairwise_distances_serial(const double* x, std::size_t n, std::size_t d, double* out) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      out[idx++] = std::sqrt(sq_dist(x + i * d, x + j * d, d));
}

void pairwise_distances_parallel(const double* x, std::size_t n, std::size_t d, double* out) {
  // Row i starts at offset i*n - i*(i+1)/2 - i - ... precompute instead.
  std::vector<std::size_t> row_start(n);
  std::size_t acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    row_start[i] = acc;
    acc += n - i - 1;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(g_threads)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    std::size_t idx = row_start[static_cast<std::size_t>(i)];
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j)
      out[idx++] = std::sqrt(sq_dist(x + static_cast<std::size_t>(i) * d, x + j * d, d));
  }
}

std::vector<double> pairwise_distances(const std::vector<double>& x, std::size_t n, std::size_t d) {
  std::vector<double> out(n * (n - 1) / 2);
  if (g_threads > 1)
    pairwise_distances_parallel(x.data(), n, d, out.data());
  else
    pairwise_distances_serial(x.data(), n, d, out.data());
  return out;
}

void linear_scores_serial(const double* w, double bias, const double* x, std::size_t n,
                          std::size_t d, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = dot(w, x + i * d, d) + bias;
}

void linear_scores_parallel(const double* w, double bias, const double* x, std::size_t n,
                            std::size_t d, double* out) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(g_threads)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    out[i] = dot(w, x + static_cast<std::size_t>(i) * d, d) + bias;
}

std::vector<double> linear_scores(const std::vector<double>& w, double bias,
                                  const std::vector<double>& x, std::size_t n, std::size_t d) {
  std::vector<double> out(n);
  if (g_threads > 1)
    linear_scores_parallel(w.data(), bias, x.data(), n, d, out.data());
  else
    linear_scores_serial(w.data(), bias, x.data(), n, d, out.data());
  return out;
}

}  // namespace wsol
