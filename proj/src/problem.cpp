#include "bpalm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bpalm/errors.hpp"
#include "bpalm/linalg.hpp"

namespace bpalm {

std::vector<double> ZeroTerm::bregman_prox(const BlockKernelPart&,
                                           std::span<const double> mirror_point, double) const {
  return {mirror_point.begin(), mirror_point.end()};
}

double NonnegativeIndicator::value(std::span<const double> z) const {
  for (double v : z)
    if (!(v >= 0.0)) return std::numeric_limits<double>::infinity();
  return 0.0;
}

std::vector<double> NonnegativeIndicator::bregman_prox(const BlockKernelPart& part,
                                                       std::span<const double> mirror_point,
                                                       double) const {
  require(part.radial(), ErrorKind::Capability,
          "nonnegative Bregman projection needs a radial kernel part, got '" + part.name() + "'");
  auto dual = part.gradient(mirror_point);
  for (double& v : dual) v = std::max(v, 0.0);
  auto z = part.conjugate_gradient(dual);
  // Exact feasibility: the conjugate map of a radial part preserves signs, but
  // guard against -0.0 and rounding below zero.
  for (double& v : z) v = std::max(v, 0.0);
  return z;
}

void CompositeProblem::validate() const {
  const std::size_t n = structure.count();
  require(n >= 1, ErrorKind::Config, "problem needs at least one block");
  require(f != nullptr && h != nullptr, ErrorKind::Config, "problem needs f and h");
  require(g.size() == n, ErrorKind::Config, "problem needs one nonsmooth term per block");
  for (const auto& gi : g) require(gi != nullptr, ErrorKind::Config, "null nonsmooth term");
  require(closed_form.empty() || closed_form.size() == n, ErrorKind::Config,
          "closed_form must be empty or have one entry per block");
  if (smoothness) {
    require(smoothness->size() == n, ErrorKind::Config, "need one smoothness constant per block");
    for (double l : *smoothness)
      require(std::isfinite(l) && l >= 0.0, ErrorKind::Config,
              "smoothness constants must be finite and nonnegative");
  }
}

double phi_value(const CompositeProblem& p, const BlockPoint& x) {
  require(x.structure() == p.structure, ErrorKind::Config, "point does not match problem blocks");
  double total = 0.0;
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    const double gi = p.g[i]->value(x.block(i));
    if (std::isinf(gi) && gi > 0.0) return std::numeric_limits<double>::infinity();
    total += gi;
  }
  const double fv = p.f->value(x);
  require(std::isfinite(fv), ErrorKind::Numeric, "smooth term returned a non-finite value");
  return fv + total;
}

double block_model_value(const CompositeProblem& p, const BlockPoint& x, std::size_t i,
                         std::span<const double> z, double step) {
  require(step > 0.0, ErrorKind::Config, "block model step must be positive");
  const double gz = p.g.at(i)->value(z);
  if (std::isinf(gz)) return gz;
  const auto grad = p.f->block_gradient(x, i);
  const auto xi = x.block(i);
  double inner = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) inner += grad[j] * (z[j] - xi[j]);
  return inner + block_bregman_distance(*p.h, x, i, z) / step + gz;
}

std::vector<double> block_minimizer(const CompositeProblem& p, const BlockPoint& x, std::size_t i,
                                    std::span<const double> grad_i, double step) {
  require(i < p.block_count(), ErrorKind::Config, "block index out of range");
  require(step > 0.0 && std::isfinite(step), ErrorKind::Config, "block step must be positive");
  if (!p.closed_form.empty() && p.closed_form[i]) {
    auto z = p.closed_form[i](x, step);
    require(z.size() == p.structure.size(i), ErrorKind::Invariant,
            "closed-form update returned the wrong block size");
    return z;
  }
  if (p.h->separability() == Separability::General)
    fail(ErrorKind::Capability, "block " + std::to_string(i) +
                                    ": no closed-form update and the kernel is not separable");
  const auto mirror = mirror_block_step(*p.h, x, i, grad_i, step);
  const double mu = mirror_step_scale(*p.h, x, i, step);
  return p.g[i]->bregman_prox(*p.h->part(i), mirror, mu);
}

double descent_slack(double phi) noexcept { return 1e-9 * std::max(1.0, std::abs(phi)); }

std::vector<double> block_update(const CompositeProblem& p, const BlockPoint& x, std::size_t i,
                                 double step) {
  const auto grad = p.f->block_gradient(x, i);
  auto z = block_minimizer(p, x, i, grad, step);
  for (double v : z)
    require(std::isfinite(v), ErrorKind::Numeric, "block update produced a non-finite entry");

  if (p.smoothness) {
    const double li = (*p.smoothness)[i];
    const double before = phi_value(p, x);
    const double after = phi_value(p, x.with_block(i, z));
    require(std::isfinite(after), ErrorKind::Domain,
            "block update left dom phi in block " + std::to_string(i));
    const double d = block_bregman_distance(*p.h, x, i, z);
    const double decrease = (1.0 - step * li) / step * d;
    if (after > before - decrease + descent_slack(before))
      fail(ErrorKind::Invariant,
           "proximal alternating inequality violated in block " + std::to_string(i) +
               ": phi " + std::to_string(before) + " -> " + std::to_string(after) +
               " (check L_" + std::to_string(i) + " and the prox)");
  }
  return z;
}

bool SmoothnessReport::certified(double tol) const {
  return std::all_of(max_violation.begin(), max_violation.end(),
                     [tol](double v) { return v <= tol; });
}

SmoothnessReport verify_relative_smoothness(const CompositeProblem& p, std::size_t samples,
                                            std::uint64_t seed) {
  p.validate();
  require(p.smoothness.has_value(), ErrorKind::Capability,
          "verify_relative_smoothness needs declared constants L_i");
  require(static_cast<bool>(p.sampler), ErrorKind::Capability,
          "verify_relative_smoothness needs a domain sampler");
  require(samples > 0, ErrorKind::Config, "need at least one sample");

  const std::size_t n = p.block_count();
  // Samples are drawn serially so the set does not depend on thread count.
  std::mt19937_64 rng(seed);
  std::vector<BlockPoint> xs;
  std::vector<BlockPoint> ys;
  xs.reserve(n * samples);
  ys.reserve(n * samples);
  for (std::size_t k = 0; k < n * samples; ++k) {
    xs.push_back(p.sampler(rng));
    ys.push_back(p.sampler(rng));
  }

  std::vector<double> violation(n * samples);
  std::vector<double> scale(n * samples);
  const auto total = static_cast<long>(n * samples);
#pragma omp parallel for schedule(static)
  for (long k = 0; k < total; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const std::size_t i = uk / samples;
    const BlockPoint& x = xs[uk];
    const auto yi = ys[uk].block(i);
    const double fx = p.f->value(x);
    const double fy = p.f->value(x.with_block(i, yi));
    const auto grad = p.f->block_gradient(x, i);
    const auto xi = x.block(i);
    double inner = 0.0;
    for (std::size_t j = 0; j < yi.size(); ++j) inner += grad[j] * (yi[j] - xi[j]);
    const double d = p.h->block_distance(x, i, yi);
    violation[uk] = fy - fx - inner - (*p.smoothness)[i] * d;
    scale[uk] = std::max(std::abs(fx), std::abs(fy));
  }

  SmoothnessReport report;
  report.samples = samples;
  report.max_violation.assign(n, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < n * samples; ++k) {
    const std::size_t i = k / samples;
    report.max_violation[i] = std::max(report.max_violation[i], violation[k]);
    report.scale = std::max(report.scale, scale[k]);
  }
  return report;
}

double gradient_check_error(const SmoothTerm& f, const BlockPoint& x) {
  const double h = 1e-6 * (1.0 + std::sqrt(linalg::squared_norm(x.values())));
  double worst = 0.0;
  BlockPoint probe = x;
  for (std::size_t i = 0; i < x.block_count(); ++i) {
    const auto g = f.block_gradient(x, i);
    auto block = probe.block(i);
    double err2 = 0.0;
    for (std::size_t j = 0; j < block.size(); ++j) {
      const double saved = block[j];
      block[j] = saved + h;
      const double fp = f.value(probe);
      block[j] = saved - h;
      const double fm = f.value(probe);
      block[j] = saved;
      const double fd = (fp - fm) / (2.0 * h);
      err2 += (fd - g[j]) * (fd - g[j]);
    }
    const double gnorm = std::sqrt(linalg::squared_norm(g));
    worst = std::max(worst, std::sqrt(err2) / std::max(1.0, gnorm));
  }
  return worst;
}

}  // namespace bpalm
