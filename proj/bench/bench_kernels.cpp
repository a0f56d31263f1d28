// Serial vs OpenMP matrix kernels, plus the cost of one BPALM iteration.
//
//   bench_kernels [size=256] [repeats=5]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

#include "bpalm/linalg.hpp"
#include "bpalm/onmf.hpp"
#include "bpalm/solver.hpp"

namespace {

using bpalm::ConstMatrixView;
using bpalm::Matrix;
using bpalm::MatrixView;
using Clock = std::chrono::steady_clock;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-10s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx   identical %s\n", name,
              1e3 * serial, 1e3 * parallel, serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 256;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  std::printf("threads %d, size %zu, best of %d\n", omp_get_max_threads(), n, repeats);

  std::mt19937_64 rng(7);
  const Matrix a = random_matrix(n, n, rng);
  const Matrix b = random_matrix(n, n, rng);
  Matrix cs(n, n), cp(n, n);

  using Kernel = void (*)(ConstMatrixView, ConstMatrixView, MatrixView);
  const struct {
    const char* name;
    Kernel serial;
    Kernel parallel;
  } gemms[] = {
      {"gemm_nn", bpalm::linalg::serial::gemm_nn, bpalm::linalg::omp::gemm_nn},
      {"gemm_nt", bpalm::linalg::serial::gemm_nt, bpalm::linalg::omp::gemm_nt},
      {"gemm_tn", bpalm::linalg::serial::gemm_tn, bpalm::linalg::omp::gemm_tn},
  };
  for (const auto& g : gemms) {
    const double ts = best_of(repeats, [&] { g.serial(a, b, cs.view()); });
    const double tp = best_of(repeats, [&] { g.parallel(a, b, cp.view()); });
    report(g.name, ts, tp, cs == cp);
  }

  double ds = 0.0, dp = 0.0;
  const double ts = best_of(repeats, [&] { ds = bpalm::linalg::serial::dot(a.values(), b.values()); });
  const double tp = best_of(repeats, [&] { dp = bpalm::linalg::omp::dot(a.values(), b.values()); });
  report("dot", ts, tp, ds == dp);

  // BPALM on the synthetic ONMF instance used by the experiments.
  auto p = std::make_shared<bpalm::onmf::OnmfProblem>();
  p->X = bpalm::onmf::synthetic_onmf(40, 200, 5, 0.05, 1).X;
  p->rank = 5;
  const auto cp_problem = bpalm::onmf::make_composite(p);
  const auto x0 = bpalm::onmf::to_point(bpalm::onmf::nndsvd_init(p->X, 5));
  for (auto alg : {bpalm::onmf::Algorithm::Bpalm, bpalm::onmf::Algorithm::Abpalm1,
                   bpalm::onmf::Algorithm::Abpalm2}) {
    auto cfg = bpalm::onmf::recipe(alg);
    cfg.max_iterations = 200;
    cfg.epsilon = 1e-300;
    const auto t0 = Clock::now();
    const auto res = bpalm::solve(cp_problem, x0, cfg);
    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%-8s 40x200 r=5: %zu iterations, %.3f ms/iteration, phi %.6g\n",
                std::string(bpalm::onmf::to_string(alg)).c_str(), res.iterations(),
                1e3 * sec / static_cast<double>(res.iterations()), res.trace.back().phi);
  }
  return 0;
}
