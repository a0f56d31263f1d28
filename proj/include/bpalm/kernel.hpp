#pragma once

// Multi-block Bregman kernels.
//
// A kernel h acts on a BlockPoint. Separable kernels are assembled from
// single-block parts h_i:
//   sum separable      h(x) = h_1(x_1) + ... + h_N(x_N)
//   product separable  h(x) = h_1(x_1) * ... * h_N(x_N),  every h_i >= c > 0
// For a product kernel the block gradient is eta_x^i * grad h_i(x_i) with
// eta_x^i = prod_{j != i} h_j(x_j), the block scale.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bpalm/blocks.hpp"

namespace bpalm {

enum class Separability { SumSeparable, ProductSeparable, General };

/// Single-block kernel h_i with an analytic conjugate gradient map.
class BlockKernelPart {
 public:
  virtual ~BlockKernelPart() = default;

  virtual double value(std::span<const double> z) const = 0;
  virtual std::vector<double> gradient(std::span<const double> z) const = 0;
  /// grad h_i^*(y): the unique z with grad h_i(z) = y.
  virtual std::vector<double> conjugate_gradient(std::span<const double> y) const = 0;
  /// D_{h_i}(z, x) evaluated without cancellation.
  virtual double bregman(std::span<const double> z, std::span<const double> x) const = 0;
  /// Global strong convexity modulus (0 if none).
  virtual double strong_convexity() const = 0;
  /// inf_z h_i(z).
  virtual double lower_bound() const = 0;
  /// True when grad h_i(z) = s(||z||) z with s > 0. Such kernels commute with
  /// the nonnegative-orthant projection in the dual, which the Bregman
  /// projection onto z >= 0 relies on.
  virtual bool radial() const = 0;
  virtual std::string name() const = 0;
};

/// 1/2 ||z||^2
class EnergyPart final : public BlockKernelPart {
 public:
  double value(std::span<const double> z) const override;
  std::vector<double> gradient(std::span<const double> z) const override;
  std::vector<double> conjugate_gradient(std::span<const double> y) const override;
  double bregman(std::span<const double> z, std::span<const double> x) const override;
  double strong_convexity() const override { return 1.0; }
  double lower_bound() const override { return 0.0; }
  bool radial() const override { return true; }
  std::string name() const override { return "energy"; }
};

/// beta/2 ||z||^2 + offset
class ScaledEnergyPart final : public BlockKernelPart {
 public:
  ScaledEnergyPart(double beta, double offset);

  double value(std::span<const double> z) const override;
  std::vector<double> gradient(std::span<const double> z) const override;
  std::vector<double> conjugate_gradient(std::span<const double> y) const override;
  double bregman(std::span<const double> z, std::span<const double> x) const override;
  double strong_convexity() const override { return beta_; }
  double lower_bound() const override { return offset_; }
  bool radial() const override { return true; }
  std::string name() const override { return "scaled-energy"; }

  double beta() const noexcept { return beta_; }

 private:
  double beta_;
  double offset_;
};

/// alpha/4 ||z||^4 + beta/2 ||z||^2 + offset
///
/// grad = (alpha ||z||^2 + beta) z. Its inverse maps y to y / t where t is the
/// positive root of t^3 - beta t^2 - alpha ||y||^2 = 0.
class QuarticPart final : public BlockKernelPart {
 public:
  QuarticPart(double alpha, double beta, double offset);

  double value(std::span<const double> z) const override;
  std::vector<double> gradient(std::span<const double> z) const override;
  std::vector<double> conjugate_gradient(std::span<const double> y) const override;
  double bregman(std::span<const double> z, std::span<const double> x) const override;
  double strong_convexity() const override { return beta_; }
  double lower_bound() const override { return offset_; }
  bool radial() const override { return true; }
  std::string name() const override { return "quartic"; }

 private:
  double alpha_;
  double beta_;
  double offset_;
};

using PartPtr = std::shared_ptr<const BlockKernelPart>;

class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual double value(const BlockPoint& x) const = 0;
  virtual std::vector<double> block_gradient(const BlockPoint& x, std::size_t i) const = 0;
  virtual Separability separability() const = 0;
  /// Lower bound on the strong convexity modulus of h restricted to block i.
  virtual double block_strong_convexity(std::size_t /*i*/) const { return 0.0; }
  /// Part h_i for separable kernels, nullptr otherwise.
  virtual const BlockKernelPart* part(std::size_t /*i*/) const { return nullptr; }
  /// eta_x^i for product kernels, 1 for sum-separable ones.
  virtual double block_scale(const BlockPoint& /*x*/, std::size_t /*i*/) const { return 1.0; }

  /// h_x^i(z) - h_x^i(x_i) - <grad_i h(x), z - x_i>. The default evaluates
  /// this definition literally; separable kernels override it with the
  /// cancellation-free part formula.
  virtual double block_distance(const BlockPoint& x, std::size_t i,
                                std::span<const double> z) const;
};

class SumSeparableKernel : public Kernel {
 public:
  explicit SumSeparableKernel(std::vector<PartPtr> parts);

  double value(const BlockPoint& x) const override;
  std::vector<double> block_gradient(const BlockPoint& x, std::size_t i) const override;
  Separability separability() const override { return Separability::SumSeparable; }
  double block_strong_convexity(std::size_t i) const override;
  const BlockKernelPart* part(std::size_t i) const override { return parts_.at(i).get(); }
  double block_distance(const BlockPoint& x, std::size_t i,
                        std::span<const double> z) const override;

 private:
  std::vector<PartPtr> parts_;
};

/// h(x) = 1/2 ||x||^2. With it BPALM reduces to PALM.
class EnergyKernel final : public SumSeparableKernel {
 public:
  explicit EnergyKernel(std::size_t blocks);
};

class ProductSeparableKernel final : public Kernel {
 public:
  explicit ProductSeparableKernel(std::vector<PartPtr> parts);

  double value(const BlockPoint& x) const override;
  std::vector<double> block_gradient(const BlockPoint& x, std::size_t i) const override;
  Separability separability() const override { return Separability::ProductSeparable; }
  double block_strong_convexity(std::size_t i) const override;
  const BlockKernelPart* part(std::size_t i) const override { return parts_.at(i).get(); }
  double block_scale(const BlockPoint& x, std::size_t i) const override;
  double block_distance(const BlockPoint& x, std::size_t i,
                        std::span<const double> z) const override;

 private:
  std::vector<PartPtr> parts_;
};

/// Bregman distance D(x + U_i(z - x_i), x). Validates shapes and domain.
double block_bregman_distance(const Kernel& h, const BlockPoint& x, std::size_t i,
                              std::span<const double> z);

/// grad h_i^*(grad h_i(x_i) - mu grad_i), mu = step for sum-separable kernels
/// and step / eta_x^i for product-separable ones.
std::vector<double> mirror_block_step(const Kernel& h, const BlockPoint& x, std::size_t i,
                                      std::span<const double> grad_i, double step);

/// The effective step mu used by mirror_block_step.
double mirror_step_scale(const Kernel& h, const BlockPoint& x, std::size_t i, double step);

}  // namespace bpalm
