#include "bpalm/kernel.hpp"

#include <cmath>
#include <string>

#include "bpalm/cubic.hpp"
#include "bpalm/errors.hpp"
#include "bpalm/linalg.hpp"

namespace bpalm {
namespace {

std::vector<double> scaled(std::span<const double> z, double s) {
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = s * z[j];
  return out;
}

void check_parts(const std::vector<PartPtr>& parts) {
  require(!parts.empty(), ErrorKind::Config, "kernel needs at least one part");
  for (const auto& p : parts) require(p != nullptr, ErrorKind::Config, "null kernel part");
}

}  // namespace

// ---- parts -----------------------------------------------------------------

double EnergyPart::value(std::span<const double> z) const {
  return 0.5 * linalg::squared_norm(z);
}

std::vector<double> EnergyPart::gradient(std::span<const double> z) const {
  return {z.begin(), z.end()};
}

std::vector<double> EnergyPart::conjugate_gradient(std::span<const double> y) const {
  return {y.begin(), y.end()};
}

double EnergyPart::bregman(std::span<const double> z, std::span<const double> x) const {
  return 0.5 * linalg::squared_distance(z, x);
}

ScaledEnergyPart::ScaledEnergyPart(double beta, double offset) : beta_(beta), offset_(offset) {
  require(beta > 0.0 && std::isfinite(beta), ErrorKind::Config,
          "scaled energy kernel needs beta > 0");
  require(std::isfinite(offset), ErrorKind::Config, "scaled energy offset must be finite");
}

double ScaledEnergyPart::value(std::span<const double> z) const {
  return 0.5 * beta_ * linalg::squared_norm(z) + offset_;
}

std::vector<double> ScaledEnergyPart::gradient(std::span<const double> z) const {
  return scaled(z, beta_);
}

std::vector<double> ScaledEnergyPart::conjugate_gradient(std::span<const double> y) const {
  return scaled(y, 1.0 / beta_);
}

double ScaledEnergyPart::bregman(std::span<const double> z, std::span<const double> x) const {
  return 0.5 * beta_ * linalg::squared_distance(z, x);
}

QuarticPart::QuarticPart(double alpha, double beta, double offset)
    : alpha_(alpha), beta_(beta), offset_(offset) {
  require(alpha > 0.0 && beta > 0.0 && std::isfinite(alpha) && std::isfinite(beta),
          ErrorKind::Config, "quartic kernel needs alpha > 0 and beta > 0");
  require(std::isfinite(offset), ErrorKind::Config, "quartic kernel offset must be finite");
}

double QuarticPart::value(std::span<const double> z) const {
  const double n2 = linalg::squared_norm(z);
  return 0.25 * alpha_ * n2 * n2 + 0.5 * beta_ * n2 + offset_;
}

std::vector<double> QuarticPart::gradient(std::span<const double> z) const {
  return scaled(z, alpha_ * linalg::squared_norm(z) + beta_);
}

std::vector<double> QuarticPart::conjugate_gradient(std::span<const double> y) const {
  const double c = alpha_ * linalg::squared_norm(y);
  if (c == 0.0) return std::vector<double>(y.size(), 0.0);
  return scaled(y, 1.0 / cubic_positive_root(beta_, c));
}

double QuarticPart::bregman(std::span<const double> z, std::span<const double> x) const {
  // With d = z - x, s = <x, d>, q = ||d||^2, a = ||x||^2:
  // ||z||^4 - ||x||^4 - 4 a s = (2s + q)^2 + 2 a q.
  double s = 0.0;
  double q = 0.0;
  double a = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double d = z[j] - x[j];
    s += x[j] * d;
    q += d * d;
    a += x[j] * x[j];
  }
  const double w = 2.0 * s + q;
  return 0.25 * alpha_ * (w * w + 2.0 * a * q) + 0.5 * beta_ * q;
}

// ---- kernels ---------------------------------------------------------------

double Kernel::block_distance(const BlockPoint& x, std::size_t i,
                              std::span<const double> z) const {
  const BlockPoint y = x.with_block(i, z);
  const auto g = block_gradient(x, i);
  const auto xi = x.block(i);
  double inner = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) inner += g[j] * (z[j] - xi[j]);
  return value(y) - value(x) - inner;
}

SumSeparableKernel::SumSeparableKernel(std::vector<PartPtr> parts) : parts_(std::move(parts)) {
  check_parts(parts_);
}

double SumSeparableKernel::value(const BlockPoint& x) const {
  require(x.block_count() == parts_.size(), ErrorKind::Config, "kernel/point block count mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < parts_.size(); ++i) v += parts_[i]->value(x.block(i));
  return v;
}

std::vector<double> SumSeparableKernel::block_gradient(const BlockPoint& x, std::size_t i) const {
  return parts_.at(i)->gradient(x.block(i));
}

double SumSeparableKernel::block_strong_convexity(std::size_t i) const {
  return parts_.at(i)->strong_convexity();
}

double SumSeparableKernel::block_distance(const BlockPoint& x, std::size_t i,
                                          std::span<const double> z) const {
  return parts_.at(i)->bregman(z, x.block(i));
}

EnergyKernel::EnergyKernel(std::size_t blocks)
    : SumSeparableKernel(std::vector<PartPtr>(blocks, std::make_shared<EnergyPart>())) {}

ProductSeparableKernel::ProductSeparableKernel(std::vector<PartPtr> parts)
    : parts_(std::move(parts)) {
  check_parts(parts_);
  for (const auto& p : parts_)
    require(p->lower_bound() > 0.0, ErrorKind::Config,
            "product kernel part '" + p->name() + "' must be bounded below by a positive constant");
}

double ProductSeparableKernel::value(const BlockPoint& x) const {
  require(x.block_count() == parts_.size(), ErrorKind::Config, "kernel/point block count mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < parts_.size(); ++i) v *= parts_[i]->value(x.block(i));
  return v;
}

double ProductSeparableKernel::block_scale(const BlockPoint& x, std::size_t i) const {
  require(x.block_count() == parts_.size(), ErrorKind::Config, "kernel/point block count mismatch");
  double eta = 1.0;
  for (std::size_t j = 0; j < parts_.size(); ++j)
    if (j != i) eta *= parts_[j]->value(x.block(j));
  return eta;
}

std::vector<double> ProductSeparableKernel::block_gradient(const BlockPoint& x,
                                                           std::size_t i) const {
  auto g = parts_.at(i)->gradient(x.block(i));
  const double eta = block_scale(x, i);
  for (double& v : g) v *= eta;
  return g;
}

double ProductSeparableKernel::block_strong_convexity(std::size_t i) const {
  double sigma = parts_.at(i)->strong_convexity();
  for (std::size_t j = 0; j < parts_.size(); ++j)
    if (j != i) sigma *= parts_[j]->lower_bound();
  return sigma;
}

double ProductSeparableKernel::block_distance(const BlockPoint& x, std::size_t i,
                                              std::span<const double> z) const {
  return block_scale(x, i) * parts_.at(i)->bregman(z, x.block(i));
}

// ---- operations ------------------------------------------------------------

double block_bregman_distance(const Kernel& h, const BlockPoint& x, std::size_t i,
                              std::span<const double> z) {
  require(i < x.block_count(), ErrorKind::Config, "block index out of range");
  require(z.size() == x.structure().size(i), ErrorKind::Config,
          "block_bregman_distance: block " + std::to_string(i) + " size mismatch");
  require(std::isfinite(h.value(x)), ErrorKind::Domain,
          "block_bregman_distance: x is outside dom h");
  if (const BlockKernelPart* part = h.part(i)) {
    require(std::isfinite(part->value(z)), ErrorKind::Domain,
            "block_bregman_distance: replaced block is outside dom h");
  } else {
    require(std::isfinite(h.value(x.with_block(i, z))), ErrorKind::Domain,
            "block_bregman_distance: replaced block is outside dom h");
  }
  const double d = h.block_distance(x, i, z);
  require(std::isfinite(d), ErrorKind::Numeric, "block_bregman_distance: non-finite result");
  return d;
}

double mirror_step_scale(const Kernel& h, const BlockPoint& x, std::size_t i, double step) {
  switch (h.separability()) {
    case Separability::SumSeparable:
      return step;
    case Separability::ProductSeparable: {
      const double eta = h.block_scale(x, i);
      require(std::isfinite(eta) && eta > 0.0, ErrorKind::Invariant,
              "product kernel block scale eta_x^" + std::to_string(i) + " is not positive");
      return step / eta;
    }
    case Separability::General:
      break;
  }
  fail(ErrorKind::Capability, "mirror step needs a sum- or product-separable kernel");
}

std::vector<double> mirror_block_step(const Kernel& h, const BlockPoint& x, std::size_t i,
                                      std::span<const double> grad_i, double step) {
  require(step > 0.0, ErrorKind::Config, "mirror step size must be positive");
  const double mu = mirror_step_scale(h, x, i, step);
  const BlockKernelPart* part = h.part(i);
  require(part != nullptr, ErrorKind::Capability, "separable kernel is missing part " + std::to_string(i));
  require(grad_i.size() == x.structure().size(i), ErrorKind::Config,
          "mirror_block_step: gradient size mismatch");
  auto dual = part->gradient(x.block(i));
  for (std::size_t j = 0; j < dual.size(); ++j) dual[j] -= mu * grad_i[j];
  return part->conjugate_gradient(dual);
}

}  // namespace bpalm
