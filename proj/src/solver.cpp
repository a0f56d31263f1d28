#include "bpalm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "bpalm/errors.hpp"
#include "bpalm/linalg.hpp"

namespace bpalm {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double inner_product(std::span<const double> a, std::span<const double> b,
                     std::span<const double> c) {
  // <a, b - c>
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * (b[j] - c[j]);
  return s;
}

void check_start(const CompositeProblem& p, const BlockPoint& x0, double phi0) {
  require(x0.structure() == p.structure, ErrorKind::Config,
          "starting point does not match the problem's block structure");
  require(x0.all_finite(), ErrorKind::Domain, "starting point has non-finite entries");
  require(std::isfinite(phi0), ErrorKind::Domain, "starting point is outside dom phi");
  require(std::isfinite(p.h->value(x0)), ErrorKind::Domain, "starting point is outside dom h");
}

IterationRecord make_record(std::size_t k, double phi, std::vector<double> gaps,
                            std::vector<double> steps, std::vector<double> estimates,
                            std::vector<std::size_t> trials, std::size_t oracle, double wall) {
  IterationRecord r;
  r.k = k;
  r.phi = phi;
  r.gap_sum = 0.0;
  for (double g : gaps) r.gap_sum += g;
  r.block_gaps = std::move(gaps);
  r.step_sizes = std::move(steps);
  r.estimates = std::move(estimates);
  r.linesearch_trials = std::move(trials);
  r.oracle_calls = oracle;
  r.wall_time = wall;
  return r;
}

void check_descent(double before, double after, double decrease, std::size_t k, std::size_t i) {
  require(std::isfinite(after), ErrorKind::Domain,
          "iteration " + std::to_string(k) + ": block " + std::to_string(i) + " left dom phi");
  if (after > before - decrease + descent_slack(before))
    fail(ErrorKind::Invariant,
         "iteration " + std::to_string(k) + ", block " + std::to_string(i) +
             ": phi increased beyond slack (" + std::to_string(before) + " -> " +
             std::to_string(after) + "); sufficient decrease violated");
}

}  // namespace

double default_step(double l) {
  require(std::isfinite(l) && l > 0.0, ErrorKind::Config,
          "step size 1/L needs L > 0 (got L = " + std::to_string(l) + ")");
  double g = 1.0 / l - std::numeric_limits<double>::epsilon();
  if (!(g > 0.0)) g = 1.0 / l;
  while (g * l >= 1.0) g = std::nextafter(g, 0.0);
  return g;
}

double sufficient_decrease_rho(std::span<const double> steps, std::span<const double> constants) {
  require(steps.size() == constants.size(), ErrorKind::Config, "rho: size mismatch");
  double rho = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < steps.size(); ++i)
    rho = std::min(rho, (1.0 - steps[i] * constants[i]) / steps[i]);
  return rho;
}

SolverConfig resolve_config(const SolverConfig& in, const CompositeProblem& p) {
  p.validate();
  SolverConfig cfg = in;
  const std::size_t n = p.block_count();
  const bool adaptive = cfg.mode != StepMode::Fixed;

  if (adaptive) {
    require(cfg.nu > 1.0 && std::isfinite(cfg.nu), ErrorKind::Config, "nu must exceed 1");
    if (cfg.initial_estimates.empty()) {
      require(p.smoothness.has_value(), ErrorKind::Config,
              "adaptive mode needs initial estimates or declared L_i");
      require(cfg.estimate_fraction > 0.0, ErrorKind::Config, "estimate_fraction must be positive");
      for (double l : *p.smoothness) cfg.initial_estimates.push_back(cfg.estimate_fraction * l);
    }
    require(cfg.initial_estimates.size() == n, ErrorKind::Config,
            "need one initial estimate per block");
    for (double l : cfg.initial_estimates)
      require(std::isfinite(l) && l > 0.0, ErrorKind::Config,
              "initial estimates must be positive (is lambda = 0?)");
    if (cfg.steps.empty())
      for (double l : cfg.initial_estimates) cfg.steps.push_back(default_step(l));
  } else if (cfg.steps.empty()) {
    require(p.smoothness.has_value(), ErrorKind::Config,
            "fixed-step mode needs explicit steps or declared L_i");
    for (double l : *p.smoothness) cfg.steps.push_back(default_step(l));
  }

  require(cfg.steps.size() == n, ErrorKind::Config, "need one step size per block");
  for (std::size_t i = 0; i < n; ++i) {
    const double g = cfg.steps[i];
    require(std::isfinite(g) && g > 0.0, ErrorKind::Config, "step sizes must be positive");
    if (adaptive) {
      require(g * cfg.initial_estimates[i] < 1.0, ErrorKind::Config,
              "gamma_" + std::to_string(i + 1) + "^0 must lie in (0, 1/Lbar_" +
                  std::to_string(i + 1) + "^0)");
    } else if (p.smoothness) {
      require(g * (*p.smoothness)[i] < 1.0, ErrorKind::Config,
              "gamma_" + std::to_string(i + 1) + " must lie in (0, 1/L_" + std::to_string(i + 1) +
                  ")");
    }
  }

  if (!cfg.epsilon) cfg.epsilon = 1e-9 * static_cast<double>(n);
  require(*cfg.epsilon > 0.0, ErrorKind::Config, "epsilon must be positive");
  require(cfg.max_iterations >= 1, ErrorKind::Config, "max_iterations must be at least 1");
  require(cfg.max_linesearch_trials >= 1, ErrorKind::Config, "line search cap must be at least 1");
  if (cfg.max_seconds)
    require(*cfg.max_seconds > 0.0, ErrorKind::Config, "max_seconds must be positive");
  return cfg;
}

SolveResult bpalm_run(const CompositeProblem& p, const BlockPoint& x0, const SolverConfig& in) {
  require(in.mode == StepMode::Fixed, ErrorKind::Config, "bpalm_run needs fixed step mode");
  const SolverConfig cfg = resolve_config(in, p);
  const auto start = Clock::now();
  const std::size_t n = p.block_count();

  double phi = phi_value(p, x0);
  check_start(p, x0, phi);

  SolveResult result;
  result.epsilon = *cfg.epsilon;
  std::vector<double> estimates = p.smoothness ? *p.smoothness : std::vector<double>{};
  if (p.smoothness) result.rho = sufficient_decrease_rho(cfg.steps, *p.smoothness);
  result.trace.push_back(make_record(0, phi, std::vector<double>(n, 0.0), cfg.steps, estimates,
                                     std::vector<std::size_t>(n, 0), 0, 0.0));

  BlockPoint x = x0;
  std::size_t oracle = 0;
  std::vector<BlockPoint> cycle;
  result.termination = Termination::MaxIterations;

  for (std::size_t k = 1; k <= cfg.max_iterations; ++k) {
    if (cfg.compute_residual) cycle.assign(1, x);
    std::vector<double> gaps(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto grad = p.f->block_gradient(x, i);
      const auto z = block_minimizer(p, x, i, grad, cfg.steps[i]);
      const double d = block_bregman_distance(*p.h, x, i, z);
      x.set_block(i, z);
      const double next = phi_value(p, x);
      const double decrease =
          p.smoothness ? (1.0 - cfg.steps[i] * (*p.smoothness)[i]) / cfg.steps[i] * d : 0.0;
      check_descent(phi, next, decrease, k, i);
      phi = next;
      gaps[i] = d;
      oracle += 2;
      if (cfg.compute_residual) cycle.push_back(x);
    }
    result.trace.push_back(make_record(k, phi, std::move(gaps), cfg.steps, estimates,
                                       std::vector<std::size_t>(n, 1), oracle,
                                       seconds_since(start)));
    if (result.trace.back().gap_sum <= *cfg.epsilon) {
      result.termination = Termination::Tolerance;
      break;
    }
    if (cfg.max_seconds && result.trace.back().wall_time >= *cfg.max_seconds) {
      result.termination = Termination::TimeBudget;
      break;
    }
  }

  if (cfg.compute_residual && cycle.size() == n + 1)
    result.subgradient_residual_norm = subgradient_residual(p, cycle, cfg.steps);
  result.final_point = std::move(x);
  return result;
}

SolveResult abpalm_run(const CompositeProblem& p, const BlockPoint& x0, const SolverConfig& in) {
  require(in.mode != StepMode::Fixed, ErrorKind::Config, "abpalm_run needs an adaptive step mode");
  const SolverConfig cfg = resolve_config(in, p);
  const auto start = Clock::now();
  const std::size_t n = p.block_count();
  const bool warm = cfg.mode == StepMode::AdaptiveWarm;

  double phi = phi_value(p, x0);
  check_start(p, x0, phi);

  SolveResult result;
  result.epsilon = *cfg.epsilon;
  result.rho = sufficient_decrease_rho(cfg.steps, cfg.initial_estimates);

  std::vector<double> estimates = cfg.initial_estimates;
  std::vector<double> steps = cfg.steps;
  result.trace.push_back(make_record(0, phi, std::vector<double>(n, 0.0), steps, estimates,
                                     std::vector<std::size_t>(n, 0), 0, 0.0));

  BlockPoint x = x0;
  std::size_t oracle = 0;
  std::vector<BlockPoint> cycle;
  result.termination = Termination::MaxIterations;

  for (std::size_t k = 1; k <= cfg.max_iterations; ++k) {
    if (cfg.compute_residual) cycle.assign(1, x);
    std::vector<double> gaps(n, 0.0);
    std::vector<std::size_t> trials(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto grad = p.f->block_gradient(x, i);
      const double f_prev = p.f->value(x);
      const double base_estimate = warm ? estimates[i] : cfg.initial_estimates[i];
      const double base_step = warm ? steps[i] : cfg.steps[i];
      const double accept_slack = 1e-12 * (1.0 + std::abs(f_prev));

      std::size_t tries = 0;
      for (;;) {
        const double scale = std::pow(cfg.nu, static_cast<double>(tries));
        const double estimate = scale * base_estimate;
        const double step = base_step / scale;
        const auto z = block_minimizer(p, x, i, grad, step);
        const double d = block_bregman_distance(*p.h, x, i, z);
        BlockPoint trial = x.with_block(i, z);
        const double f_trial = p.f->value(trial);
        oracle += 2;
        ++tries;
        const double bound = f_prev + inner_product(grad, z, x.block(i)) + estimate * d;
        if (std::isfinite(f_trial) && f_trial <= bound + accept_slack) {
          estimates[i] = estimate;
          steps[i] = step;
          const double next = phi_value(p, trial);
          check_descent(phi, next, (1.0 - step * estimate) / step * d, k, i);
          phi = next;
          gaps[i] = d;
          x = std::move(trial);
          break;
        }
        if (tries >= cfg.max_linesearch_trials)
          fail(ErrorKind::Divergence,
               "iteration " + std::to_string(k) + ", block " + std::to_string(i) +
                   ": line search exceeded " + std::to_string(cfg.max_linesearch_trials) +
                   " trials (f not smooth relative to h, or a broken oracle)");
      }
      trials[i] = tries;
      if (cfg.compute_residual) cycle.push_back(x);
    }
    result.trace.push_back(make_record(k, phi, std::move(gaps), steps, estimates, std::move(trials),
                                       oracle, seconds_since(start)));
    if (result.trace.back().gap_sum <= *cfg.epsilon) {
      result.termination = Termination::Tolerance;
      break;
    }
    if (cfg.max_seconds && result.trace.back().wall_time >= *cfg.max_seconds) {
      result.termination = Termination::TimeBudget;
      break;
    }
  }

  if (cfg.compute_residual && cycle.size() == n + 1)
    result.subgradient_residual_norm = subgradient_residual(p, cycle, steps);
  result.final_point = std::move(x);
  return result;
}

SolveResult solve(const CompositeProblem& p, const BlockPoint& x0, const SolverConfig& cfg) {
  return cfg.mode == StepMode::Fixed ? bpalm_run(p, x0, cfg) : abpalm_run(p, x0, cfg);
}

std::size_t continuation_stage_count(const ContinuationConfig& cc) {
  require(cc.stage_budget.unit == cc.total_budget.unit, ErrorKind::Config,
          "stage and total budgets must use the same unit");
  require(cc.stage_budget.amount > 0.0 && cc.total_budget.amount >= cc.stage_budget.amount,
          ErrorKind::Config, "need 0 < stage budget <= total budget");
  return static_cast<std::size_t>(
      std::ceil(cc.total_budget.amount / cc.stage_budget.amount - 1e-9));
}

SolveResult continuation_run(const ProblemBuilder& build, const BlockPoint& x0,
                             const SolverConfig& cfg, const ContinuationConfig& cc) {
  require(cc.lambda0 > 0.0 && std::isfinite(cc.lambda0), ErrorKind::Config,
          "lambda0 must be positive");
  require(cc.factor > 1.0 && std::isfinite(cc.factor), ErrorKind::Config,
          "continuation factor must exceed 1");
  const std::size_t stages = continuation_stage_count(cc);
  const bool by_time = cc.stage_budget.unit == Budget::Unit::Seconds;
  const auto start = Clock::now();

  SolveResult out;
  BlockPoint x = x0;
  double lambda = cc.lambda0;
  double used_iterations = 0.0;
  std::size_t oracle_offset = 0;

  for (std::size_t s = 0; s < stages; ++s) {
    SolverConfig stage_cfg = cfg;
    if (by_time) {
      const double remaining = cc.total_budget.amount - seconds_since(start);
      if (remaining <= 0.0) break;
      stage_cfg.max_seconds = std::min(cc.stage_budget.amount, remaining);
    } else {
      const double remaining = cc.total_budget.amount - used_iterations;
      stage_cfg.max_iterations =
          static_cast<std::size_t>(std::min(cc.stage_budget.amount, remaining));
      if (stage_cfg.max_iterations == 0) break;
    }

    const double stage_start = seconds_since(start);
    SolveResult r;
    try {
      r = solve(build(lambda), x, stage_cfg);
    } catch (const Error& e) {
      throw Error(e.kind(), "continuation stage " + std::to_string(s) + " (lambda=" +
                                std::to_string(lambda) + "): " + e.what());
    }
    used_iterations += static_cast<double>(r.iterations());

    StageSummary summary;
    summary.index = s;
    summary.lambda = lambda;
    summary.first_record = out.trace.size();
    summary.record_count = r.trace.size();
    summary.termination = r.termination;
    summary.final_point = r.final_point;
    for (auto rec : r.trace) {
      rec.stage = s;
      rec.oracle_calls += oracle_offset;
      rec.wall_time += stage_start;
      out.trace.push_back(std::move(rec));
    }
    oracle_offset = out.trace.back().oracle_calls;
    out.stages.push_back(std::move(summary));

    // phi is nonincreasing within a stage, so the last point is the best one.
    x = r.final_point;
    out.termination = r.termination;
    out.subgradient_residual_norm = r.subgradient_residual_norm;
    out.rho = r.rho;
    out.epsilon = r.epsilon;
    lambda *= cc.factor;
  }
  require(!out.stages.empty(), ErrorKind::Config, "continuation budget allowed no stage to run");
  out.final_point = std::move(x);
  return out;
}

double subgradient_residual(const CompositeProblem& p, std::span<const BlockPoint> cycle,
                            std::span<const double> steps) {
  const std::size_t n = p.block_count();
  require(cycle.size() == n + 1, ErrorKind::Config,
          "subgradient_residual needs the N + 1 points of one cycle");
  require(steps.size() == n, ErrorKind::Config, "subgradient_residual needs N step sizes");
  const BlockPoint& last = cycle[n];
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto h_prev = p.h->block_gradient(cycle[i], i);
    const auto h_cur = p.h->block_gradient(cycle[i + 1], i);
    const auto f_last = p.f->block_gradient(last, i);
    const auto f_prev = p.f->block_gradient(cycle[i], i);
    for (std::size_t j = 0; j < h_prev.size(); ++j) {
      const double g = (h_prev[j] - h_cur[j]) / steps[i] + f_last[j] - f_prev[j];
      total += g * g;
    }
  }
  require(std::isfinite(total), ErrorKind::Numeric, "subgradient residual is not finite");
  return std::sqrt(total);
}

}  // namespace bpalm
