#pragma once

// Composite objective phi(x) = f(x) + sum_i g_i(x_i) over a block structure,
// the block-linearized Bregman model and its minimizer T_i.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "bpalm/blocks.hpp"
#include "bpalm/kernel.hpp"

namespace bpalm {

/// Smooth part f with block gradients.
class SmoothTerm {
 public:
  virtual ~SmoothTerm() = default;
  virtual double value(const BlockPoint& x) const = 0;
  virtual std::vector<double> block_gradient(const BlockPoint& x, std::size_t i) const = 0;
};

/// Nonsmooth block term g_i with its Bregman proximal map.
class NonsmoothBlockTerm {
 public:
  virtual ~NonsmoothBlockTerm() = default;
  virtual double value(std::span<const double> z) const = 0;
  /// argmin_z g_i(z) + (1/mu) D_{h_i}(z, mirror_point).
  virtual std::vector<double> bregman_prox(const BlockKernelPart& part,
                                           std::span<const double> mirror_point,
                                           double mu) const = 0;
};

class ZeroTerm final : public NonsmoothBlockTerm {
 public:
  double value(std::span<const double>) const override { return 0.0; }
  std::vector<double> bregman_prox(const BlockKernelPart& part, std::span<const double> mirror_point,
                                   double mu) const override;
};

/// Indicator of the nonnegative orthant. The Bregman projection is
/// grad h_i^*(max(grad h_i(y), 0)), valid for radial parts.
class NonnegativeIndicator final : public NonsmoothBlockTerm {
 public:
  double value(std::span<const double> z) const override;
  std::vector<double> bregman_prox(const BlockKernelPart& part, std::span<const double> mirror_point,
                                   double mu) const override;
};

/// Problem-specific minimizer of the block model, bypassing the generic
/// mirror step + prox path. Receives the current point and the step gamma_i.
using ClosedFormUpdate = std::function<std::vector<double>(const BlockPoint& x, double step)>;
using PointSampler = std::function<BlockPoint(std::mt19937_64& rng)>;

struct CompositeProblem {
  BlockStructure structure;
  std::shared_ptr<const SmoothTerm> f;
  std::vector<std::shared_ptr<const NonsmoothBlockTerm>> g;
  std::shared_ptr<const Kernel> h;
  /// L_i such that f is (L_1, ..., L_N)-smooth relative to h, when known.
  std::optional<std::vector<double>> smoothness;
  /// Per-block closed-form updates; an empty function selects the generic path.
  std::vector<ClosedFormUpdate> closed_form;
  /// Sampler for dom phi, used by verify_relative_smoothness.
  PointSampler sampler;
  /// Known lower bound on inf phi.
  std::optional<double> lower_bound;

  std::size_t block_count() const noexcept { return structure.count(); }
  void validate() const;
};

double phi_value(const CompositeProblem& p, const BlockPoint& x);

/// <grad_i f(x), z - x_i> + (1/step) D(x + U_i(z - x_i), x) + g_i(z)
double block_model_value(const CompositeProblem& p, const BlockPoint& x, std::size_t i,
                         std::span<const double> z, double step);

/// Minimizer of the block model, given grad_i f(x). No descent check.
std::vector<double> block_minimizer(const CompositeProblem& p, const BlockPoint& x, std::size_t i,
                                    std::span<const double> grad_i, double step);

/// A selection of T_i(x). When L_i is declared, checks the proximal
/// alternating inequality
///   phi(x') <= phi(x) - ((1 - step L_i)/step) D(x', x) + slack
/// and raises ErrorKind::Invariant if it fails.
std::vector<double> block_update(const CompositeProblem& p, const BlockPoint& x, std::size_t i,
                                 double step);

/// Absolute tolerance used by all descent checks at objective level phi.
double descent_slack(double phi) noexcept;

struct SmoothnessReport {
  /// max over samples of f(x + U_i(y_i - x_i)) - f(x) - <grad_i f(x), y_i - x_i> - L_i D
  std::vector<double> max_violation;
  /// Largest |f| seen, for scaling the tolerance.
  double scale = 0.0;
  std::size_t samples = 0;

  bool certified(double tol = 1e-8) const;
};

SmoothnessReport verify_relative_smoothness(const CompositeProblem& p, std::size_t samples,
                                            std::uint64_t seed);

/// Max relative error between block_gradient and central differences with
/// step 1e-6 (1 + ||x||), measured per block as ||g_fd - g|| / max(1, ||g||).
double gradient_check_error(const SmoothTerm& f, const BlockPoint& x);

}  // namespace bpalm
