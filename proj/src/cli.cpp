#include "bpalm/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "bpalm/errors.hpp"
#include "bpalm/matrix_io.hpp"
#include "bpalm/onmf.hpp"
#include "bpalm/solver.hpp"

namespace bpalm::cli {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kIoError;
    case ErrorKind::Config: return kConfigError;
    default: return kNumericError;
  }
}

struct KernelParams {
  double lambda = 10.0;
  double alpha2 = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;

  void add_to(CLI::App& app, bool with_lambda = true) {
    if (with_lambda) app.add_option("--lambda", lambda, "Orthogonality penalty")->capture_default_str();
    app.add_option("--alpha2", alpha2, "Kernel parameter alpha2")->capture_default_str();
    app.add_option("--beta1", beta1, "Kernel parameter beta1")->capture_default_str();
    app.add_option("--beta2", beta2, "Kernel parameter beta2")->capture_default_str();
  }
};

struct GenerateArgs {
  std::size_t m = 0, n = 0, r = 0;
  double noise = 0.05;
  std::uint64_t seed = 1;
  std::string out_x, out_u, out_v, format = "csv";
};

struct SolveArgs {
  std::string x_path;
  std::string alg = "bpalm";
  std::size_t r = 0;
  KernelParams kp;
  std::optional<double> eps;
  std::optional<std::size_t> max_iters;
  std::optional<double> max_seconds;
  std::uint64_t seed = 1;
  std::string init = "nndsvd";
  bool continuation = false;
  std::optional<double> lambda0;
  double factor = 1.5;
  std::optional<double> stage_seconds;
  std::optional<std::size_t> stage_iters;
  std::string trace_out, result_out;
};

struct CheckArgs {
  std::string x_path;
  std::vector<std::size_t> synthetic;
  std::size_t r = 2;
  KernelParams kp;
  std::size_t samples = 500;
  std::uint64_t seed = 1;
  double sample_scale = 1.0;
  std::optional<double> l1_override, l2_override;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto fmt = io::parse_format(a.format);
  const auto data = onmf::synthetic_onmf(a.m, a.n, a.r, a.noise, a.seed);
  io::write_matrix(a.out_x, data.X, fmt);
  if (!a.out_u.empty()) io::write_matrix(a.out_u, data.truth.U, fmt);
  if (!a.out_v.empty()) io::write_matrix(a.out_v, data.truth.V, fmt);
  out << "generated X " << a.m << "x" << a.n << " rank " << a.r << " noise " << a.noise
      << " seed " << a.seed << '\n';
  return kOk;
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  Matrix X = io::read_matrix(a.x_path);
  const auto algorithm = onmf::parse_algorithm(a.alg);
  require(a.init == "nndsvd" || a.init == "random", ErrorKind::Config,
          "--init must be nndsvd or random");

  auto base = std::make_shared<onmf::OnmfProblem>();
  base->X = std::move(X);
  base->rank = a.r;
  base->lambda = a.continuation ? a.lambda0.value_or(a.kp.lambda) : a.kp.lambda;
  base->alpha2 = a.kp.alpha2;
  base->beta1 = a.kp.beta1;
  base->beta2 = a.kp.beta2;
  base->validate();

  const onmf::Factors init = a.init == "nndsvd"
                                 ? onmf::nndsvd_init(base->X, a.r)
                                 : onmf::random_init(base->m(), base->n(), a.r, a.seed);
  const BlockPoint x0 = onmf::to_point(init);

  SolverConfig cfg = onmf::recipe(algorithm);
  cfg.epsilon = a.eps;
  cfg.max_seconds = a.max_seconds;
  // A time budget alone should not be cut short by the iteration default.
  cfg.max_iterations = a.max_iters.value_or(a.max_seconds ? 100000000 : 10000);

  const auto build = [base](double lambda) {
    auto p = std::make_shared<onmf::OnmfProblem>(*base);
    p->lambda = lambda;
    return onmf::make_composite(p);
  };

  const auto start = std::chrono::steady_clock::now();
  SolveResult result;
  double lambda_final = base->lambda;
  if (a.continuation) {
    require(a.stage_seconds.has_value() != a.stage_iters.has_value(), ErrorKind::Config,
            "--continuation needs exactly one of --stage-seconds or --stage-iters");
    ContinuationConfig cc;
    cc.lambda0 = base->lambda;
    cc.factor = a.factor;
    if (a.stage_seconds) {
      require(a.max_seconds.has_value(), ErrorKind::Config,
              "--stage-seconds needs --max-seconds as the total budget");
      cc.stage_budget = {Budget::Unit::Seconds, *a.stage_seconds};
      cc.total_budget = {Budget::Unit::Seconds, *a.max_seconds};
      cfg.max_seconds.reset();
    } else {
      require(a.max_iters.has_value(), ErrorKind::Config,
              "--stage-iters needs --max-iters as the total budget");
      cc.stage_budget = {Budget::Unit::Iterations, static_cast<double>(*a.stage_iters)};
      cc.total_budget = {Budget::Unit::Iterations, static_cast<double>(*a.max_iters)};
    }
    result = continuation_run(build, x0, cfg, cc);
    lambda_final = result.stages.back().lambda;
  } else {
    result = solve(build(base->lambda), x0, cfg);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  auto final_problem = *base;
  final_problem.lambda = lambda_final;
  const auto fac = onmf::from_point(result.final_point, base->m(), base->n(), a.r);
  const auto met = onmf::metrics(final_problem, fac);
  std::size_t iterations = 0;
  if (result.stages.empty()) {
    iterations = result.iterations();
  } else {
    for (const auto& s : result.stages) iterations += result.trace[s.first_record + s.record_count - 1].k;
  }

  std::ostringstream summary;
  summary << "algorithm=" << onmf::to_string(algorithm) << '\n'
          << "lambda_final=" << num(lambda_final) << '\n'
          << "iterations=" << iterations << '\n'
          << "phi_final=" << num(result.trace.back().phi) << '\n'
          << "f_error=" << num(met.fidelity_error) << '\n'
          << "o_error=" << num(met.orthogonality_error) << '\n'
          << "oracle_calls=" << result.trace.back().oracle_calls << '\n'
          << "wall_time_s=" << num(wall) << '\n';

  if (!a.trace_out.empty()) {
    std::ofstream t(a.trace_out);
    require(static_cast<bool>(t), ErrorKind::Io, "cannot open '" + a.trace_out + "' for writing");
    write_trace_csv(t, result);
    require(static_cast<bool>(t), ErrorKind::Io, "write to '" + a.trace_out + "' failed");
  }
  if (!a.result_out.empty()) {
    std::ofstream r(a.result_out);
    require(static_cast<bool>(r), ErrorKind::Io, "cannot open '" + a.result_out + "' for writing");
    r << summary.str();
    require(static_cast<bool>(r), ErrorKind::Io, "write to '" + a.result_out + "' failed");
  }
  out << summary.str();
  return kOk;
}

int cmd_check(const CheckArgs& a, std::ostream& out) {
  auto p = std::make_shared<onmf::OnmfProblem>();
  if (!a.x_path.empty()) {
    p->X = io::read_matrix(a.x_path);
    p->rank = a.r;
  } else {
    const std::vector<std::size_t> dims = a.synthetic.empty()
                                              ? std::vector<std::size_t>{4, 6, 2}
                                              : a.synthetic;
    p->X = onmf::synthetic_onmf(dims[0], dims[1], dims[2], 0.05, a.seed).X;
    p->rank = dims[2];
  }
  p->lambda = a.kp.lambda;
  p->alpha2 = a.kp.alpha2;
  p->beta1 = a.kp.beta1;
  p->beta2 = a.kp.beta2;

  onmf::CompositeOptions opts;
  opts.sample_scale = a.sample_scale;
  opts.l1_override = a.l1_override;
  opts.l2_override = a.l2_override;
  const CompositeProblem cp = onmf::make_composite(p, opts);
  const auto report = verify_relative_smoothness(cp, a.samples, a.seed);

  out << "L1=" << num((*cp.smoothness)[0]) << '\n'
      << "L2=" << num((*cp.smoothness)[1]) << '\n'
      << "max_violation_U=" << num(report.max_violation[0]) << '\n'
      << "max_violation_V=" << num(report.max_violation[1]) << '\n'
      << "samples=" << report.samples << '\n'
      << "certified=" << (report.certified(1e-8) ? "true" : "false") << '\n';
  return report.certified(1e-8) ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bregman proximal alternating linearized minimization for orthogonal NMF", "bpalm"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads for the matrix kernels (0: runtime default)");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic ONMF instance");
  g->add_option("--m", gen.m, "Rows of X")->required();
  g->add_option("--n", gen.n, "Columns of X")->required();
  g->add_option("--r", gen.r, "Rank")->required();
  g->add_option("--noise", gen.noise, "Relative noise level")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out-x", gen.out_x, "Output path for X")->required();
  g->add_option("--out-u", gen.out_u, "Output path for the ground-truth U");
  g->add_option("--out-v", gen.out_v, "Output path for the ground-truth V");
  g->add_option("--format", gen.format, "csv or bplm")->capture_default_str();

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Factorize a data matrix");
  s->add_option("--x", sol.x_path, "Data matrix (CSV or BPLM)")->required();
  s->add_option("--alg", sol.alg, "bpalm, abpalm1 or abpalm2")->capture_default_str();
  s->add_option("--r", sol.r, "Rank")->required();
  sol.kp.add_to(*s);
  s->add_option("--eps", sol.eps, "Stopping tolerance on the summed Bregman gaps");
  s->add_option("--max-iters", sol.max_iters, "Iteration budget");
  s->add_option("--max-seconds", sol.max_seconds, "Wall-clock budget");
  s->add_option("--seed", sol.seed, "Seed for random initialization")->capture_default_str();
  s->add_option("--init", sol.init, "nndsvd or random")->capture_default_str();
  s->add_flag("--continuation", sol.continuation, "Increase lambda geometrically between stages");
  s->add_option("--lambda0", sol.lambda0, "Initial lambda for continuation (default: --lambda)");
  s->add_option("--factor", sol.factor, "Continuation growth factor")->capture_default_str();
  s->add_option("--stage-seconds", sol.stage_seconds, "Seconds per continuation stage");
  s->add_option("--stage-iters", sol.stage_iters, "Iterations per continuation stage");
  s->add_option("--trace-out", sol.trace_out, "Trace CSV output path");
  s->add_option("--result-out", sol.result_out, "Summary output path");

  CheckArgs chk;
  auto* c = app.add_subcommand("check", "Sample the relative smoothness inequality");
  c->add_option("--x", chk.x_path, "Data matrix (CSV or BPLM)");
  c->add_option("--synthetic", chk.synthetic, "Synthetic instance dimensions M N R")
      ->expected(3)
      ->excludes("--x");
  c->add_option("--r", chk.r, "Rank when --x is given")->capture_default_str();
  chk.kp.add_to(*c);
  c->add_option("--samples", chk.samples, "Samples per block")->capture_default_str();
  c->add_option("--seed", chk.seed, "Random seed")->capture_default_str();
  c->add_option("--sample-scale", chk.sample_scale, "Sample entries uniform on [0, scale]")
      ->capture_default_str();
  c->add_option("--l1-override", chk.l1_override, "Use this L1 instead of the computed one");
  c->add_option("--l2-override", chk.l2_override, "Use this L2 instead of the computed one");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigError;
  }

  if (threads > 0) omp_set_num_threads(threads);
  try {
    if (*g) return cmd_generate(gen, out);
    if (*s) return cmd_solve(sol, out);
    return cmd_check(chk, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  }
}

}  // namespace bpalm::cli
