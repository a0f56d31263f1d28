#include "bpalm/onmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "bpalm/errors.hpp"

namespace bpalm::onmf {
namespace {

void check_factor_shapes(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V) {
  require(U.rows == p.m() && U.cols == p.rank && V.rows == p.rank && V.cols == p.n(),
          ErrorKind::Config,
          "factor shapes U " + std::to_string(U.rows) + "x" + std::to_string(U.cols) + ", V " +
              std::to_string(V.rows) + "x" + std::to_string(V.cols) + " do not match X " +
              std::to_string(p.m()) + "x" + std::to_string(p.n()) + " at rank " +
              std::to_string(p.rank));
}

double orthogonality_sq(ConstMatrixView V) {
  const Matrix vvt = linalg::multiply_transposed(V, V);
  double s = 0.0;
  for (std::size_t a = 0; a < vvt.rows(); ++a)
    for (std::size_t b = 0; b < vvt.cols(); ++b) {
      const double e = (a == b ? 1.0 : 0.0) - vvt(a, b);
      s += e * e;
    }
  return s;
}

class OnmfSmoothTerm final : public SmoothTerm {
 public:
  explicit OnmfSmoothTerm(std::shared_ptr<const OnmfProblem> p) : p_(std::move(p)) {}

  double value(const BlockPoint& x) const override { return onmf_value(*p_, u(x), v(x)); }

  std::vector<double> block_gradient(const BlockPoint& x, std::size_t i) const override {
    require(i < 2, ErrorKind::Config, "ONMF has two blocks");
    return i == 0 ? grad_U(*p_, u(x), v(x)).storage() : grad_V(*p_, u(x), v(x)).storage();
  }

  ConstMatrixView u(const BlockPoint& x) const { return {x.block(0), p_->m(), p_->rank}; }
  ConstMatrixView v(const BlockPoint& x) const { return {x.block(1), p_->rank, p_->n()}; }

 private:
  std::shared_ptr<const OnmfProblem> p_;
};

}  // namespace

void OnmfProblem::validate() const {
  require(X.rows() > 0 && X.cols() > 0, ErrorKind::Config, "data matrix is empty");
  for (double v : X.values())
    require(std::isfinite(v) && v >= 0.0, ErrorKind::Config,
            "data matrix must be finite and entrywise nonnegative");
  require(rank >= 1 && rank <= std::min(m(), n()), ErrorKind::Config,
          "rank must satisfy 1 <= r <= min(m, n)");
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::Config,
          "lambda must be positive (lambda = 0 gives L2 = 0 and no admissible step)");
  require(alpha2 > 0.0 && beta1 > 0.0 && beta2 > 0.0 && std::isfinite(alpha2) &&
              std::isfinite(beta1) && std::isfinite(beta2),
          ErrorKind::Config, "kernel parameters alpha2, beta1, beta2 must be positive");
}

double onmf_value(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V) {
  check_factor_shapes(p, U, V);
  const Matrix uv = linalg::multiply(U, V);
  return 0.5 * linalg::squared_distance(p.X.values(), uv.values()) +
         0.5 * p.lambda * orthogonality_sq(V);
}

Matrix grad_U(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V) {
  check_factor_shapes(p, U, V);
  const Matrix vvt = linalg::multiply_transposed(V, V);
  Matrix g = linalg::multiply(U, vvt);
  const Matrix xvt = linalg::multiply_transposed(p.X, V);
  auto gv = g.values();
  const auto xv = xvt.values();
  for (std::size_t j = 0; j < gv.size(); ++j) gv[j] -= xv[j];
  return g;
}

Matrix grad_V(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V) {
  check_factor_shapes(p, U, V);
  const Matrix utu = linalg::transposed_multiply(U, U);
  Matrix g = linalg::multiply(utu, V);
  const Matrix utx = linalg::transposed_multiply(U, p.X);
  const Matrix vvt = linalg::multiply_transposed(V, V);
  const Matrix vvtv = linalg::multiply(vvt, V);
  auto gv = g.values();
  const double two_lambda = 2.0 * p.lambda;
  for (std::size_t j = 0; j < gv.size(); ++j)
    gv[j] = gv[j] - utx.values()[j] + two_lambda * (vvtv.values()[j] - V.data[j]);
  return g;
}

SmoothnessConstants smoothness_constants(double lambda, double alpha2, double beta1,
                                         double beta2) {
  const double l1 = 2.0 / (beta1 * beta2);
  const double l2 =
      6.0 * std::max({lambda / alpha2, 2.0 * lambda / (beta1 * beta2), lambda / beta2});
  return {l1, l2};
}

SmoothnessConstants smoothness_constants(const OnmfProblem& p) {
  return smoothness_constants(p.lambda, p.alpha2, p.beta1, p.beta2);
}

Matrix update_U(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V, double gamma1) {
  require(gamma1 > 0.0, ErrorKind::Config, "gamma1 must be positive");
  const double v2 = linalg::squared_norm(V.data);
  const double eta1 = 0.25 * p.alpha2 * v2 * v2 + 0.5 * p.beta2 * v2 + 1.0;
  const double mu1 = gamma1 / (p.beta1 * eta1);
  Matrix out = grad_U(p, U, V);
  auto o = out.values();
  for (std::size_t j = 0; j < o.size(); ++j) o[j] = std::max(U.data[j] - mu1 * o[j], 0.0);
  return out;
}

Matrix update_V(const OnmfProblem& p, ConstMatrixView U_new, ConstMatrixView V, double gamma2) {
  require(gamma2 > 0.0, ErrorKind::Config, "gamma2 must be positive");
  const double eta2 = 0.5 * p.beta1 * linalg::squared_norm(U_new.data) + 1.0;
  const double mu2 = gamma2 / eta2;
  const double s = p.alpha2 * linalg::squared_norm(V.data) + p.beta2;
  Matrix out = grad_V(p, U_new, V);
  auto o = out.values();
  for (std::size_t j = 0; j < o.size(); ++j) o[j] = std::max(s * V.data[j] - mu2 * o[j], 0.0);
  const double c = p.alpha2 * linalg::squared_norm(o);
  const double t = cubic_positive_root(p.beta2, c);
  for (double& v : o) v /= t;
  return out;
}

Factors random_init(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Factors f{Matrix(m, r), Matrix(r, n)};
  for (double& v : f.U.values()) v = unif(rng);
  for (double& v : f.V.values()) v = unif(rng);
  return f;
}

SyntheticData synthetic_onmf(std::size_t m, std::size_t n, std::size_t r, double noise_level,
                             std::uint64_t seed) {
  require(m >= 1 && n >= 1 && r >= 1, ErrorKind::Config, "dimensions must be positive");
  require(r <= n, ErrorKind::Config,
          "rank r must not exceed n: an orthogonal nonnegative V needs r disjoint column sets");
  require(std::isfinite(noise_level) && noise_level >= 0.0, ErrorKind::Config,
          "noise level must be finite and nonnegative");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SyntheticData d;
  d.truth.U = Matrix(m, r);
  for (double& v : d.truth.U.values()) v = unif(rng);

  // Each column belongs to exactly one cluster; every cluster gets at least
  // one column so no row of V is empty.
  std::vector<std::size_t> columns(n);
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  std::shuffle(columns.begin(), columns.end(), rng);
  std::uniform_int_distribution<std::size_t> pick(0, r - 1);
  d.truth.V = Matrix(r, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t row = k < r ? k : pick(rng);
    d.truth.V(row, columns[k]) = 1.0 - unif(rng);  // (0, 1]
  }
  for (std::size_t a = 0; a < r; ++a) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += d.truth.V(a, j) * d.truth.V(a, j);
    const double inv = 1.0 / std::sqrt(s);
    for (std::size_t j = 0; j < n; ++j) d.truth.V(a, j) *= inv;
  }

  d.X = linalg::multiply(d.truth.U, d.truth.V);
  Matrix noise(m, n);
  for (double& v : noise.values()) v = unif(rng);
  if (noise_level > 0.0) {
    const double scale = noise_level * std::sqrt(linalg::squared_norm(d.X.values())) /
                         std::sqrt(linalg::squared_norm(noise.values()));
    auto x = d.X.values();
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += scale * noise.values()[j];
  }
  return d;
}

OnmfMetrics metrics(const OnmfProblem& p, const Factors& fac) {
  check_factor_shapes(p, fac.U, fac.V);
  const double xnorm2 = linalg::squared_norm(p.X.values());
  require(xnorm2 > 0.0, ErrorKind::Numeric, "fidelity error undefined for X = 0");
  const Matrix uv = linalg::multiply(fac.U, fac.V);
  const double resid2 = linalg::squared_distance(p.X.values(), uv.values());
  const double orth2 = orthogonality_sq(fac.V);
  OnmfMetrics out;
  out.fidelity_error = std::sqrt(resid2 / xnorm2);
  out.orthogonality_error = std::sqrt(orth2);
  out.objective = 0.5 * resid2 + 0.5 * p.lambda * orth2;
  return out;
}

BlockStructure block_structure(std::size_t m, std::size_t n, std::size_t r) {
  return BlockStructure({m * r, r * n});
}

BlockPoint to_point(const Factors& fac) {
  std::vector<double> data;
  data.reserve(fac.U.size() + fac.V.size());
  data.insert(data.end(), fac.U.values().begin(), fac.U.values().end());
  data.insert(data.end(), fac.V.values().begin(), fac.V.values().end());
  return BlockPoint(block_structure(fac.U.rows(), fac.V.cols(), fac.U.cols()), std::move(data));
}

Factors from_point(const BlockPoint& x, std::size_t m, std::size_t n, std::size_t r) {
  require(x.structure() == block_structure(m, n, r), ErrorKind::Config,
          "point does not have the ONMF block structure");
  const auto u = x.block(0);
  const auto v = x.block(1);
  return {Matrix(m, r, std::vector<double>(u.begin(), u.end())),
          Matrix(r, n, std::vector<double>(v.begin(), v.end()))};
}

std::shared_ptr<const Kernel> make_kernel(double alpha2, double beta1, double beta2) {
  return std::make_shared<ProductSeparableKernel>(std::vector<PartPtr>{
      std::make_shared<ScaledEnergyPart>(beta1, 1.0),
      std::make_shared<QuarticPart>(alpha2, beta2, 1.0)});
}

CompositeProblem make_composite(std::shared_ptr<const OnmfProblem> p,
                                const CompositeOptions& options) {
  require(p != nullptr, ErrorKind::Config, "null ONMF problem");
  p->validate();
  require(options.sample_scale > 0.0, ErrorKind::Config, "sample scale must be positive");
  const std::size_t m = p->m();
  const std::size_t n = p->n();
  const std::size_t r = p->rank;

  CompositeProblem cp;
  cp.structure = block_structure(m, n, r);
  cp.f = std::make_shared<OnmfSmoothTerm>(p);
  cp.g = {std::make_shared<NonnegativeIndicator>(), std::make_shared<NonnegativeIndicator>()};
  cp.h = make_kernel(p->alpha2, p->beta1, p->beta2);
  const auto lc = smoothness_constants(*p);
  cp.smoothness = std::vector<double>{options.l1_override.value_or(lc.L1),
                                      options.l2_override.value_or(lc.L2)};
  if (options.closed_form) {
    cp.closed_form = {
        [p, m, n, r](const BlockPoint& x, double step) {
          return update_U(*p, {x.block(0), m, r}, {x.block(1), r, n}, step).storage();
        },
        [p, m, n, r](const BlockPoint& x, double step) {
          return update_V(*p, {x.block(0), m, r}, {x.block(1), r, n}, step).storage();
        }};
  }
  const double scale = options.sample_scale;
  const BlockStructure structure = cp.structure;
  cp.sampler = [structure, scale](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, scale);
    BlockPoint x = BlockPoint::zeros(structure);
    for (double& v : x.values()) v = unif(rng);
    return x;
  };
  cp.lower_bound = 0.0;
  return cp;
}

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Bpalm: return "bpalm";
    case Algorithm::Abpalm1: return "abpalm1";
    case Algorithm::Abpalm2: return "abpalm2";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "bpalm") return Algorithm::Bpalm;
  if (name == "abpalm1") return Algorithm::Abpalm1;
  if (name == "abpalm2") return Algorithm::Abpalm2;
  fail(ErrorKind::Config, "unknown algorithm '" + std::string(name) + "'");
}

SolverConfig recipe(Algorithm a) {
  SolverConfig cfg;
  cfg.nu = 2.0;
  switch (a) {
    case Algorithm::Bpalm:
      cfg.mode = StepMode::Fixed;
      break;
    case Algorithm::Abpalm1:
      cfg.mode = StepMode::AdaptiveWarm;
      cfg.estimate_fraction = 0.01;
      break;
    case Algorithm::Abpalm2:
      cfg.mode = StepMode::AdaptiveRestart;
      cfg.estimate_fraction = 0.1;
      break;
  }
  return cfg;
}

}  // namespace bpalm::onmf
