#pragma once

#include <cstddef>
#include <vector>

namespace wsol {

// Hot loops shared by the regressor, the classifier and the curriculum.
// Every kernel comes in two flavours: a plain serial reference and an
// OpenMP-parallel version. The parallel versions only ever parallelize over
// independent output slots (each slot computed by the same serial inner loop),
// so their results are bit-identical to the reference at any thread count.
// Matrices are flat row-major double arrays.

// Threads used by the *_parallel kernels; 1 disables OpenMP dispatch.
void set_num_threads(int n);
int num_threads();

enum class KernelKind { rbf, linear };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double bandwidth = 1.0;  // rbf only, must be > 0
};

double kernel_eval(const KernelSpec& spec, const double* a, const double* b, std::size_t d);

// n x n Gram matrix of X (n rows, d cols), written into out (n*n).
void gram_matrix_serial(const double* x, std::size_t n, std::size_t d, const KernelSpec& spec,
                        double* out);
void gram_matrix_parallel(const double* x, std::size_t n, std::size_t d, const KernelSpec& spec,
                          double* out);
std::vector<double> gram_matrix(const std::vector<double>& x, std::size_t n, std::size_t d,
                                const KernelSpec& spec);

// out[q] = sum_i alpha[i] * k(support_i, query_q) for nq query rows.
void kernel_predict_serial(const double* support, std::size_t ns, const double* alpha,
                           const double* queries, std::size_t nq, std::size_t d,
                           const KernelSpec& spec, double* out);
void kernel_predict_parallel(const double* support, std::size_t ns, const double* alpha,
                             const double* queries, std::size_t nq, std::size_t d,
                             const KernelSpec& spec, double* out);
std::vector<double> kernel_predict(const std::vector<double>& support, std::size_t ns,
                                   const std::vector<double>& alpha,
                                   const std::vector<double>& queries, std::size_t nq,
                                   std::size_t d, const KernelSpec& spec);

// All n*(n-1)/2 pairwise Euclidean distances, row-major upper triangle order.
void pairwise_distances_serial(const double* x, std::size_t n, std::size_t d, double* out);
void pairwise_distances_parallel(const double* x, std::size_t n, std::size_t d, double* out);
std::vector<double> pairwise_distances(const std::vector<double>& x, std::size_t n, std::size_t d);

// out[i] = w . x_i + bias for n feature rows.
void linear_scores_serial(const double* w, double bias, const double* x, std::size_t n,
                          std::size_t d, double* out);
void linear_scores_parallel(const double* w, double bias, const double* x, std::size_t n,
                            std::size_t d, double* out);
std::vector<double> linear_scores(const std::vector<double>& w, double bias,
                                  const std::vector<double>& x, std::size_t n, std::size_t d);

}  // namespace wsol
