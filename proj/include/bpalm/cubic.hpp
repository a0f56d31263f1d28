#pragma once

namespace bpalm {

/// Unique positive root of t^3 - beta2 t^2 - c = 0 for beta2 >= 0, c >= 0
/// (not both zero). For c > 0 the root exceeds beta2.
///
/// Cardano in the cancellation-free form, one Newton polish, and a bisection
/// fallback on [beta2, beta2 + cbrt(c) + 1] if the residual is still above
/// 1e-10 * max(1, c).
double cubic_positive_root(double beta2, double c);

}  // namespace bpalm
