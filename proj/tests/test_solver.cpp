#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "bpalm/errors.hpp"
#include "bpalm/onmf.hpp"
#include "bpalm/solver.hpp"
#include "oracles.hpp"

using namespace bpalm;

namespace {

class HalfSquaredNorm final : public SmoothTerm {
 public:
  double value(const BlockPoint& x) const override {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return 0.5 * s;
  }
  std::vector<double> block_gradient(const BlockPoint& x, std::size_t i) const override {
    return {x.block(i).begin(), x.block(i).end()};
  }
};

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Config;
}

struct Instance {
  std::shared_ptr<onmf::OnmfProblem> problem;
  CompositeProblem composite;
  BlockPoint x0;
};

Instance synthetic(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed,
                   double lambda = 10.0) {
  Instance in;
  in.problem = std::make_shared<onmf::OnmfProblem>();
  in.problem->X = onmf::synthetic_onmf(m, n, r, 0.05, seed).X;
  in.problem->rank = r;
  in.problem->lambda = lambda;
  in.composite = onmf::make_composite(in.problem);
  in.x0 = onmf::to_point(onmf::nndsvd_init(in.problem->X, r));
  return in;
}

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("default step and rho") {
  for (double l : {2.0, 120.0, 3.0, 1e-3}) {
    const double g = default_step(l);
    CHECK(g * l < 1.0);
    CHECK(g > 0.0);
    CHECK(g >= 1.0 / l - 4e-16 * (1.0 + 1.0 / l));
  }
  const std::vector<double> steps{0.25, 0.5}, consts{2.0, 1.0};
  CHECK(sufficient_decrease_rho(steps, consts) == doctest::Approx(1.0));
}

TEST_CASE("a fixed point terminates at k = 1") {
  CompositeProblem p;
  p.structure = BlockStructure({2, 2});
  p.f = std::make_shared<HalfSquaredNorm>();
  p.g = {std::make_shared<ZeroTerm>(), std::make_shared<ZeroTerm>()};
  p.h = std::make_shared<EnergyKernel>(2);
  p.smoothness = std::vector<double>{1.0, 1.0};
  const auto x0 = BlockPoint::zeros(p.structure);
  for (auto mode : {StepMode::Fixed, StepMode::AdaptiveWarm, StepMode::AdaptiveRestart}) {
    SolverConfig cfg;
    cfg.mode = mode;
    const auto r = solve(p, x0, cfg);
    CHECK(r.iterations() == 1);
    CHECK(r.termination == Termination::Tolerance);
    CHECK(r.trace.back().gap_sum == 0.0);
    REQUIRE(r.subgradient_residual_norm);
    CHECK(*r.subgradient_residual_norm == 0.0);
  }
}

TEST_CASE("configuration errors") {
  auto in = synthetic(6, 10, 2, 1);
  SolverConfig cfg;
  cfg.steps = {0.5, 1.0 / 120.0};  // gamma_1 L_1 = 1
  CHECK(kind_of([&] { solve(in.composite, in.x0, cfg); }) == ErrorKind::Config);
  cfg.steps = {0.1, -1.0};
  CHECK(kind_of([&] { solve(in.composite, in.x0, cfg); }) == ErrorKind::Config);
  cfg = SolverConfig{};
  cfg.epsilon = 0.0;
  CHECK(kind_of([&] { solve(in.composite, in.x0, cfg); }) == ErrorKind::Config);
  cfg = onmf::recipe(onmf::Algorithm::Abpalm1);
  cfg.nu = 1.0;
  CHECK(kind_of([&] { solve(in.composite, in.x0, cfg); }) == ErrorKind::Config);
  auto bad = in.x0;
  bad.values()[0] = -1.0;
  CHECK(kind_of([&] { solve(in.composite, bad, SolverConfig{}); }) == ErrorKind::Domain);
}

TEST_CASE("ONMF runs reach the tolerance with monotone phi") {
  auto in = synthetic(40, 200, 5, 1);
  for (auto alg : {onmf::Algorithm::Bpalm, onmf::Algorithm::Abpalm1, onmf::Algorithm::Abpalm2}) {
    CAPTURE(onmf::to_string(alg));
    SolverConfig cfg = onmf::recipe(alg);
    cfg.max_iterations = 20000;
    const auto r = solve(in.composite, in.x0, cfg);
    CHECK(r.termination == Termination::Tolerance);
    CHECK(r.trace.back().gap_sum <= 1e-9 * 2);
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].phi <= r.trace[k - 1].phi);
    REQUIRE(r.rho);
    CHECK(static_cast<double>(r.iterations()) <=
          1.0 + r.trace.front().phi / (*r.rho * r.epsilon));
    if (alg != onmf::Algorithm::Bpalm) CHECK(r.iterations() <= 5000);
  }
}

TEST_CASE("A-BPALM with exact initial estimates reproduces BPALM") {
  auto in = synthetic(10, 30, 3, 2);
  SolverConfig fixed = onmf::recipe(onmf::Algorithm::Bpalm);
  fixed.max_iterations = 100;
  const auto a = solve(in.composite, in.x0, fixed);
  for (auto mode : {StepMode::AdaptiveWarm, StepMode::AdaptiveRestart}) {
    SolverConfig adaptive;
    adaptive.mode = mode;
    adaptive.initial_estimates = *in.composite.smoothness;
    adaptive.max_iterations = 100;
    const auto b = solve(in.composite, in.x0, adaptive);
    CHECK(a.final_point == b.final_point);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 1; k < b.trace.size(); ++k) {
      CHECK(a.trace[k].phi == b.trace[k].phi);
      for (auto t : b.trace[k].linesearch_trials) CHECK(t == 1);
    }
  }
}

TEST_CASE("line search trials and oracle calls obey the worst-case bounds") {
  auto in = synthetic(40, 200, 5, 3);
  for (auto alg : {onmf::Algorithm::Abpalm1, onmf::Algorithm::Abpalm2}) {
    CAPTURE(onmf::to_string(alg));
    SolverConfig cfg = onmf::recipe(alg);
    cfg.max_iterations = 400;
    const auto r = solve(in.composite, in.x0, cfg);
    const auto& L = *in.composite.smoothness;
    const auto& L0 = r.trace.front().estimates;
    double log_sum = 0.0;
    for (std::size_t i = 0; i < 2; ++i) log_sum += std::log(cfg.nu * L[i] / L0[i]);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      for (std::size_t i = 0; i < 2; ++i) {
        const double cap = std::ceil(std::log(cfg.nu * L[i] / L0[i]) / std::log(cfg.nu) - 1e-12);
        CHECK(static_cast<double>(r.trace[k].linesearch_trials[i]) <= cap);
      }
      CHECK(static_cast<double>(r.trace[k].oracle_calls) <=
            4.0 * (static_cast<double>(k) + 1.0) + 2.0 / std::log(cfg.nu) * log_sum);
    }
  }
  // nu = 2, Lbar^0 = 0.01 L: ceil(log2(200)) = 8.
  CHECK(std::ceil(std::log2(200.0)) == 8.0);
}

TEST_CASE("oracle accounting: two calls per trial per block") {
  auto in = synthetic(10, 30, 3, 4);
  SolverConfig cfg = onmf::recipe(onmf::Algorithm::Abpalm1);
  cfg.max_iterations = 50;
  const auto r = solve(in.composite, in.x0, cfg);
  std::size_t trials = 0;
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    for (auto t : r.trace[k].linesearch_trials) trials += t;
    CHECK(r.trace[k].oracle_calls == 2 * trials);
  }
  SolverConfig fixed = onmf::recipe(onmf::Algorithm::Bpalm);
  fixed.max_iterations = 50;
  const auto b = solve(in.composite, in.x0, fixed);
  CHECK(b.trace.back().oracle_calls == 2 * 2 * 50);
}

TEST_CASE("line search cap raises a divergence error") {
  auto in = synthetic(10, 30, 3, 5);
  SolverConfig cfg = onmf::recipe(onmf::Algorithm::Abpalm2);
  cfg.initial_estimates = {1e-9, 1e-9};
  cfg.max_linesearch_trials = 3;
  CHECK(kind_of([&] { solve(in.composite, in.x0, cfg); }) == ErrorKind::Divergence);
}

TEST_CASE("time budget") {
  auto in = synthetic(40, 200, 5, 6);
  SolverConfig cfg = onmf::recipe(onmf::Algorithm::Bpalm);
  cfg.max_iterations = 100000000;
  cfg.epsilon = 1e-300;
  cfg.max_seconds = 0.05;
  const auto r = solve(in.composite, in.x0, cfg);
  CHECK(r.termination == Termination::TimeBudget);
  CHECK(r.trace.back().wall_time >= 0.05);
}

TEST_CASE("continuation") {
  ContinuationConfig cc;
  cc.lambda0 = 10.0;
  cc.factor = 1.5;
  cc.stage_budget = {Budget::Unit::Seconds, 3.0};
  cc.total_budget = {Budget::Unit::Seconds, 15.0};
  CHECK(continuation_stage_count(cc) == 5);

  auto in = synthetic(10, 30, 3, 7);
  const auto build = [&](double lambda) {
    auto p = std::make_shared<onmf::OnmfProblem>(*in.problem);
    p->lambda = lambda;
    return onmf::make_composite(p);
  };
  SolverConfig cfg = onmf::recipe(onmf::Algorithm::Abpalm1);

  SUBCASE("five stages with geometric lambda") {
    cc.stage_budget = {Budget::Unit::Iterations, 20};
    cc.total_budget = {Budget::Unit::Iterations, 100};
    cfg.epsilon = 1e-300;
    const auto r = continuation_run(build, in.x0, cfg, cc);
    REQUIRE(r.stages.size() == 5);
    const double expect[] = {10.0, 15.0, 22.5, 33.75, 50.625};
    for (std::size_t s = 0; s < 5; ++s) {
      CHECK(r.stages[s].lambda == expect[s]);
      CHECK(r.trace[r.stages[s].first_record].stage == s);
      CHECK(r.stages[s].record_count == 21);
    }
    for (std::size_t k = 1; k < r.trace.size(); ++k)
      CHECK(r.trace[k].oracle_calls >= r.trace[k - 1].oracle_calls);
    // Each stage starts where the previous one stopped.
    for (std::size_t s = 1; s < 5; ++s) {
      auto p = std::make_shared<onmf::OnmfProblem>(*in.problem);
      p->lambda = expect[s];
      CHECK(r.trace[r.stages[s].first_record].phi ==
            doctest::Approx(phi_value(onmf::make_composite(p), r.stages[s - 1].final_point)));
    }
    std::ostringstream csv;
    write_trace_csv(csv, r);
    std::size_t markers = 0;
    std::istringstream lines(csv.str());
    for (std::string line; std::getline(lines, line);)
      if (line.rfind("# stage=", 0) == 0) ++markers;
    CHECK(markers == 5);
  }

  SUBCASE("a single stage equals a plain run") {
    cc.stage_budget = {Budget::Unit::Iterations, 40};
    cc.total_budget = {Budget::Unit::Iterations, 40};
    cfg.max_iterations = 40;
    const auto a = continuation_run(build, in.x0, cfg, cc);
    const auto b = solve(build(10.0), in.x0, cfg);
    REQUIRE(a.stages.size() == 1);
    CHECK(a.final_point == b.final_point);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].phi == b.trace[k].phi);
  }

  SUBCASE("stage errors keep their kind and name the stage") {
    cc.stage_budget = {Budget::Unit::Iterations, 5};
    cc.total_budget = {Budget::Unit::Iterations, 15};
    const auto failing = [&](double lambda) {
      auto cp = build(lambda);
      if (lambda > 20.0) cp.smoothness = std::vector<double>{-1.0, -1.0};
      return cp;
    };
    try {
      continuation_run(failing, in.x0, cfg, cc);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
      CHECK(std::string(e.what()).find("stage 2") != std::string::npos);
    }
  }

  SUBCASE("invalid settings") {
    cc.factor = 1.0;
    CHECK(kind_of([&] { continuation_run(build, in.x0, cfg, cc); }) == ErrorKind::Config);
    cc.factor = 1.5;
    cc.stage_budget = {Budget::Unit::Iterations, 3};
    CHECK(kind_of([&] { continuation_stage_count(cc); }) == ErrorKind::Config);
  }
}

TEST_CASE("subgradient residual") {
  SUBCASE("decreases like sqrt(epsilon)") {
    auto in = synthetic(6, 10, 2, 2);
    double previous = 1e300;
    for (double eps : {1e-8, 1e-10, 1e-12, 1e-14}) {
      SolverConfig cfg = onmf::recipe(onmf::Algorithm::Bpalm);
      cfg.max_iterations = 1000000;
      cfg.epsilon = eps;
      const auto r = solve(in.composite, in.x0, cfg);
      REQUIRE(r.termination == Termination::Tolerance);
      REQUIRE(r.subgradient_residual_norm);
      const double res = *r.subgradient_residual_norm;
      CHECK(res < previous);
      previous = res;
      if (eps == 1e-14) CHECK(res <= 1e-4);
    }
  }

  SUBCASE("bounded by a probed constant times the iterate change") {
    auto in = synthetic(6, 10, 2, 3);
    SolverConfig cfg = onmf::recipe(onmf::Algorithm::Bpalm);
    cfg.max_iterations = 30;
    const auto warm = solve(in.composite, in.x0, cfg);
    const std::vector<double> steps = warm.trace.front().step_sizes;

    std::vector<BlockPoint> cycle{warm.final_point};
    for (std::size_t i = 0; i < 2; ++i)
      cycle.push_back(cycle.back().with_block(i, block_update(in.composite, cycle.back(), i,
                                                              steps[i])));
    const double res = subgradient_residual(in.composite, cycle, steps);

    double change = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      std::vector<double> d(cycle[2].block(i).begin(), cycle[2].block(i).end());
      for (std::size_t j = 0; j < d.size(); ++j) d[j] -= cycle[0].block(i)[j];
      change += norm(d);
    }
    // c = sum_i (Lip(grad_i h) / gamma_i + Lip(grad_i f)), both probed near the cycle.
    std::mt19937_64 rng(1);
    std::normal_distribution<double> dist;
    double c = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      double lh = 0.0, lf = 0.0;
      for (int probe = 0; probe < 200; ++probe) {
        BlockPoint a = cycle[0], b = cycle[0];
        for (double& v : a.values()) v += 2.0 * change * dist(rng);
        for (double& v : b.values()) v += 2.0 * change * dist(rng);
        std::vector<double> dx(a.values().begin(), a.values().end());
        for (std::size_t j = 0; j < dx.size(); ++j) dx[j] -= b.values()[j];
        const double nx = norm(dx);
        auto dh = in.composite.h->block_gradient(a, i);
        auto dh_b = in.composite.h->block_gradient(b, i);
        auto df = in.composite.f->block_gradient(a, i);
        auto df_b = in.composite.f->block_gradient(b, i);
        for (std::size_t j = 0; j < dh.size(); ++j) {
          dh[j] -= dh_b[j];
          df[j] -= df_b[j];
        }
        lh = std::max(lh, norm(dh) / nx);
        lf = std::max(lf, norm(df) / nx);
      }
      c += 2.0 * (lh / steps[i] + lf);
    }
    CHECK(res > 0.0);
    CHECK(res <= c * change);
  }
}

TEST_CASE("results do not depend on the OpenMP thread count") {
  auto in = synthetic(40, 200, 5, 8);
  SolverConfig cfg = onmf::recipe(onmf::Algorithm::Abpalm1);
  cfg.max_iterations = 60;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = solve(in.composite, in.x0, cfg);
  omp_set_num_threads(4);
  const auto b = solve(in.composite, in.x0, cfg);
  omp_set_num_threads(saved);
  CHECK(a.final_point == b.final_point);
  for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].phi == b.trace[k].phi);
}

TEST_CASE("trace CSV layout") {
  auto in = synthetic(6, 10, 2, 9);
  SolverConfig cfg = onmf::recipe(onmf::Algorithm::Bpalm);
  cfg.max_iterations = 3;
  const auto r = solve(in.composite, in.x0, cfg);
  std::ostringstream out;
  write_trace_csv(out, r);
  std::istringstream lines(out.str());
  std::string header, row0;
  std::getline(lines, header);
  std::getline(lines, row0);
  CHECK(header == "k,phi,gap_sum,gap_1,gap_2,step_1,step_2,est_1,est_2,oracle_calls,wall_time_s");
  CHECK(row0.rfind("0,", 0) == 0);
  // phi round-trips through 17 significant digits.
  const std::string phi = row0.substr(2, row0.find(',', 2) - 2);
  CHECK(std::stod(phi) == r.trace.front().phi);
  std::size_t rows = 1;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 4);
}
