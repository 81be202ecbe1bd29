#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <vector>

#include "wsol/kernels.hpp"
#include "wsol/rng.hpp"

using namespace wsol;

namespace {

double seconds_of(const std::function<void()>& fn, int repeats) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const std::chrono::duration<double> elapsed = clock::now() - start;
  return elapsed.count() / repeats;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void report(const char* name, double t_serial, double t_parallel, bool equal) {
  std::printf("%-18s serial %.4fs  parallel %.4fs  speedup %.2fx  equal=%s\n", name, t_serial,
              t_parallel, t_serial / t_parallel, equal ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 4;
  std::size_t n = 1200, d = 64;
  int repeats = 3;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) threads = std::atoi(argv[++i]);
    if (std::strcmp(argv[i], "--n") == 0 && i + 1 < argc) n = std::strtoull(argv[++i], nullptr, 10);
    if (std::strcmp(argv[i], "--dim") == 0 && i + 1 < argc) d = std::strtoull(argv[++i], nullptr, 10);
    if (std::strcmp(argv[i], "--repeats") == 0 && i + 1 < argc) repeats = std::atoi(argv[++i]);
  }

  Rng rng(7, "bench");
  std::vector<double> rows(n * d), queries(n * d), alphas(n);
  for (double& v : rows) v = rng.normal();
  for (double& v : queries) v = rng.normal();
  for (double& v : alphas) v = rng.normal();
  const KernelSpec spec{KernelKind::rbf, 2.5};

  std::printf("n=%zu d=%zu threads=%d repeats=%d\n", n, d, threads, repeats);

  {
    std::vector<double> serial_out(n * n), parallel_out;
    const double t_serial = seconds_of(
        [&] { gram_matrix_serial(rows.data(), n, d, spec, serial_out.data()); }, repeats);
    set_num_threads(threads);
    const double t_parallel =
        seconds_of([&] { parallel_out = gram_matrix(rows, n, d, spec); }, repeats);
    report("gram_matrix", t_serial, t_parallel, bitwise_equal(serial_out, parallel_out));
  }
  {
    std::vector<double> serial_out(n), parallel_out;
    set_num_threads(1);
    const double t_serial = seconds_of(
        [&] {
          kernel_predict_serial(rows.data(), n, alphas.data(), queries.data(), n, d, spec,
                                serial_out.data());
        },
        repeats);
    set_num_threads(threads);
    const double t_parallel = seconds_of(
        [&] { parallel_out = kernel_predict(rows, n, alphas, queries, n, d, spec); }, repeats);
    report("kernel_predict", t_serial, t_parallel, bitwise_equal(serial_out, parallel_out));
  }
  {
    std::vector<double> serial_out(n * (n - 1) / 2), parallel_out;
    set_num_threads(1);
    const double t_serial = seconds_of(
        [&] { pairwise_distances_serial(rows.data(), n, d, serial_out.data()); }, repeats);
    set_num_threads(threads);
    const double t_parallel =
        seconds_of([&] { parallel_out = pairwise_distances(rows, n, d); }, repeats);
    report("pairwise_distances", t_serial, t_parallel, bitwise_equal(serial_out, parallel_out));
  }
  {
    std::vector<double> w(d);
    for (double& v : w) v = rng.normal();
    std::vector<double> serial_out(n), parallel_out;
    set_num_threads(1);
    const double t_serial = seconds_of(
        [&] { linear_scores_serial(w.data(), 0.25, rows.data(), n, d, serial_out.data()); },
        repeats);
    set_num_threads(threads);
    const double t_parallel =
        seconds_of([&] { parallel_out = linear_scores(w, 0.25, rows, n, d); }, repeats);
    report("linear_scores", t_serial, t_parallel, bitwise_equal(serial_out, parallel_out));
  }
  set_num_threads(1);
  return 0;
}
