#pragma once

// Penalized orthogonal NMF
//
//   minimize 1/2 ||X - U V||_F^2 + lambda/2 ||I_r - V V^T||_F^2   s.t. U >= 0, V >= 0
//
// solved with BPALM over the product kernel
//   h(U, V) = (beta1/2 ||U||^2 + 1) (alpha2/4 ||V||^4 + beta2/2 ||V||^2 + 1),
// relative to which f is (L1, L2)-smooth with
//   L1 = 2 / (beta1 beta2),  L2 = 6 max{lambda/alpha2, 2 lambda/(beta1 beta2), lambda/beta2}.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>

#include "bpalm/cubic.hpp"
#include "bpalm/kernel.hpp"
#include "bpalm/linalg.hpp"
#include "bpalm/problem.hpp"
#include "bpalm/solver.hpp"

namespace bpalm::onmf {

using bpalm::cubic_positive_root;

struct OnmfProblem {
  Matrix X;  // m x n, entrywise >= 0
  std::size_t rank = 1;
  double lambda = 10.0;
  double alpha2 = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;

  std::size_t m() const noexcept { return X.rows(); }
  std::size_t n() const noexcept { return X.cols(); }
  void validate() const;
};

struct Factors {
  Matrix U;  // m x r
  Matrix V;  // r x n
};

struct OnmfMetrics {
  double fidelity_error = 0.0;       // ||X - UV||_F / ||X||_F
  double orthogonality_error = 0.0;  // ||I_r - V V^T||_F
  double objective = 0.0;
};

struct SmoothnessConstants {
  double L1 = 0.0;
  double L2 = 0.0;
};

double onmf_value(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V);
inline double onmf_value(const OnmfProblem& p, const Factors& fac) {
  return onmf_value(p, fac.U, fac.V);
}

/// U V V^T - X V^T
Matrix grad_U(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V);
/// U^T U V - U^T X + 2 lambda (V V^T V - V)
Matrix grad_V(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V);
inline Matrix grad_U(const OnmfProblem& p, const Factors& fac) { return grad_U(p, fac.U, fac.V); }
inline Matrix grad_V(const OnmfProblem& p, const Factors& fac) { return grad_V(p, fac.U, fac.V); }

SmoothnessConstants smoothness_constants(const OnmfProblem& p);
SmoothnessConstants smoothness_constants(double lambda, double alpha2, double beta1, double beta2);

/// max{U - mu1 grad_U, 0},  mu1 = gamma1 / (beta1 eta1),
/// eta1 = alpha2/4 ||V||^4 + beta2/2 ||V||^2 + 1.
Matrix update_U(const OnmfProblem& p, ConstMatrixView U, ConstMatrixView V, double gamma1);
/// P / t with P = max{(alpha2 ||V||^2 + beta2) V - mu2 grad_V(U_new, V), 0},
/// mu2 = gamma2 / (beta1/2 ||U_new||^2 + 1) and t the positive root of
/// t^3 - beta2 t^2 - alpha2 ||P||^2 = 0.
Matrix update_V(const OnmfProblem& p, ConstMatrixView U_new, ConstMatrixView V, double gamma2);
inline Matrix update_U(const OnmfProblem& p, const Factors& fac, double gamma1) {
  return update_U(p, fac.U, fac.V, gamma1);
}
inline Matrix update_V(const OnmfProblem& p, const Factors& fac_new_u, double gamma2) {
  return update_V(p, fac_new_u.U, fac_new_u.V, gamma2);
}

/// Nonnegative double SVD initialization; zero entries are replaced by 1e-8.
Factors nndsvd_init(const Matrix& X, std::size_t r);
/// Entries uniform on [0, 1].
Factors random_init(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed);

struct SyntheticData {
  Matrix X;
  Factors truth;
};

/// U uniform on [0,1]; V nonnegative with disjoint row supports and unit rows
/// (so V V^T = I_r); X = U V + noise (||UV||_F / ||R||_F) R with R uniform on [0,1].
SyntheticData synthetic_onmf(std::size_t m, std::size_t n, std::size_t r, double noise_level,
                             std::uint64_t seed);

OnmfMetrics metrics(const OnmfProblem& p, const Factors& fac);

// ---- bridge to the generic framework ---------------------------------------

BlockStructure block_structure(std::size_t m, std::size_t n, std::size_t r);
BlockPoint to_point(const Factors& fac);
Factors from_point(const BlockPoint& x, std::size_t m, std::size_t n, std::size_t r);

std::shared_ptr<const Kernel> make_kernel(double alpha2, double beta1, double beta2);

struct CompositeOptions {
  /// Register the closed-form U/V updates. Off: the generic mirror + prox path.
  bool closed_form = true;
  /// Sampler draws factor entries uniform on [0, sample_scale].
  double sample_scale = 1.0;
  /// Override L1 / L2 (e.g. to probe the smoothness certificate).
  std::optional<double> l1_override;
  std::optional<double> l2_override;
};

CompositeProblem make_composite(std::shared_ptr<const OnmfProblem> p,
                                const CompositeOptions& options = {});

enum class Algorithm { Bpalm, Abpalm1, Abpalm2 };

std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view name);

/// Parameter recipe: BPALM gamma_i = 1/L_i - eps; A-BPALM1 warm backtracking
/// from 0.01 L_i; A-BPALM2 restart backtracking from 0.1 L_i; nu = 2.
SolverConfig recipe(Algorithm a);

}  // namespace bpalm::onmf
