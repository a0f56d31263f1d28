#pragma once

// BPALM and A-BPALM drivers, penalty continuation and per-iteration traces.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bpalm/blocks.hpp"
#include "bpalm/problem.hpp"

namespace bpalm {

enum class StepMode {
  Fixed,            // BPALM: gamma_i in (0, 1/L_i)
  AdaptiveWarm,     // A-BPALM: backtracking from the last accepted estimate
  AdaptiveRestart,  // A-BPALM variant: backtracking from the initial estimate
};

enum class Termination { Tolerance, MaxIterations, TimeBudget };

struct SolverConfig {
  StepMode mode = StepMode::Fixed;
  /// gamma_i (Fixed) or gamma_i^0 (adaptive). Empty: derived from the problem,
  /// gamma_i = 1/L_i - eps (Fixed) or 1/Lbar_i^0 - eps (adaptive).
  std::vector<double> steps;
  /// Lbar_i^0. Empty: estimate_fraction * L_i.
  std::vector<double> initial_estimates;
  double estimate_fraction = 0.01;
  double nu = 2.0;
  /// Stop when sum_i D(x^{k,i}, x^{k,i-1}) <= epsilon. Unset: 1e-9 * N.
  std::optional<double> epsilon;
  std::size_t max_iterations = 1000;
  std::optional<double> max_seconds;
  std::size_t max_linesearch_trials = 64;
  /// Compute the subgradient residual of the final cycle.
  bool compute_residual = true;
};

/// Resolves defaulted fields of `cfg` against `p` and validates the result.
SolverConfig resolve_config(const SolverConfig& cfg, const CompositeProblem& p);

/// Largest float strictly below 1/l (minus machine epsilon when representable).
double default_step(double l);

struct IterationRecord {
  std::size_t k = 0;
  double phi = 0.0;
  std::vector<double> block_gaps;  // D(x^{k,i}, x^{k,i-1})
  double gap_sum = 0.0;
  std::vector<double> step_sizes;
  std::vector<double> estimates;            // Lbar_i (adaptive modes)
  std::vector<std::size_t> linesearch_trials;  // trials spent per block
  std::size_t oracle_calls = 0;  // cumulative, 2 per trial per block
  double wall_time = 0.0;        // seconds since the start of the run
  std::size_t stage = 0;         // continuation stage (0 for plain runs)
};

struct StageSummary {
  std::size_t index = 0;
  double lambda = 0.0;
  std::size_t first_record = 0;  // index into SolveResult::trace
  std::size_t record_count = 0;
  Termination termination = Termination::MaxIterations;
  BlockPoint final_point;
};

struct SolveResult {
  BlockPoint final_point;
  /// Record 0 is the starting point; record k follows iteration k.
  std::vector<IterationRecord> trace;
  Termination termination = Termination::MaxIterations;
  std::optional<double> subgradient_residual_norm;
  /// rho (Fixed) or rho-bar (adaptive); unset when L_i are not declared.
  std::optional<double> rho;
  double epsilon = 0.0;
  std::vector<StageSummary> stages;  // continuation runs only

  std::size_t iterations() const noexcept { return trace.empty() ? 0 : trace.back().k; }
};

/// min_i (1 - gamma_i L_i) / gamma_i.
double sufficient_decrease_rho(std::span<const double> steps, std::span<const double> constants);

SolveResult bpalm_run(const CompositeProblem& p, const BlockPoint& x0, const SolverConfig& cfg);
SolveResult abpalm_run(const CompositeProblem& p, const BlockPoint& x0, const SolverConfig& cfg);
/// Dispatches on cfg.mode.
SolveResult solve(const CompositeProblem& p, const BlockPoint& x0, const SolverConfig& cfg);

struct Budget {
  enum class Unit { Seconds, Iterations };
  Unit unit = Unit::Iterations;
  double amount = 0.0;
};

struct ContinuationConfig {
  double lambda0 = 10.0;
  double factor = 1.5;
  Budget stage_budget;
  Budget total_budget;
};

using ProblemBuilder = std::function<CompositeProblem(double lambda)>;

/// Number of stages a continuation run performs.
std::size_t continuation_stage_count(const ContinuationConfig& cc);

SolveResult continuation_run(const ProblemBuilder& build, const BlockPoint& x0,
                             const SolverConfig& cfg, const ContinuationConfig& cc);

/// ||(G_1, ..., G_N)|| with
///   G_i = (grad_i h(x^{k,i-1}) - grad_i h(x^{k,i})) / gamma_i + grad_i f(x^{k+1}) - grad_i f(x^{k,i-1}),
/// an element of the limiting subdifferential of phi at x^{k+1}.
/// `cycle` holds x^{k,0}, ..., x^{k,N}.
double subgradient_residual(const CompositeProblem& p, std::span<const BlockPoint> cycle,
                            std::span<const double> steps);

/// CSV header: k,phi,gap_sum,gap_1..gap_N,step_1..step_N,est_1..est_N,oracle_calls,wall_time_s
/// Continuation stages are introduced by "# stage=<s> lambda=<value>" lines.
void write_trace_csv(std::ostream& out, const SolveResult& result);

}  // namespace bpalm
