#include "bpalm/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bpalm/errors.hpp"

namespace bpalm {
namespace {

double residual(double t, double beta2, double c) { return t * t * (t - beta2) - c; }

double bisect(double beta2, double c) {
  double lo = beta2;
  double hi = beta2 + std::cbrt(c) + 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (residual(mid, beta2, c) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return std::abs(residual(lo, beta2, c)) <= std::abs(residual(hi, beta2, c)) ? lo : hi;
}

}  // namespace

double cubic_positive_root(double beta2, double c) {
  require(std::isfinite(beta2) && std::isfinite(c), ErrorKind::Numeric,
          "cubic_positive_root: non-finite input");
  require(beta2 >= 0.0 && c >= 0.0 && beta2 + c > 0.0, ErrorKind::Config,
          "cubic_positive_root: need beta2 >= 0, c >= 0, not both zero");

  if (c == 0.0) return beta2;
  if (beta2 == 0.0) return std::cbrt(c);

  // t = s + beta2/3 turns the cubic into s^3 + p s + q = 0 with
  // p = -beta2^2/3, q = -2 beta2^3/27 - c. For c > 0 its discriminant
  // (q/2)^2 + (p/3)^3 = c (beta2^3/27 + c/4) is positive: one real root.
  const double b3 = beta2 * beta2 * beta2 / 27.0;
  const double disc = c * (b3 + 0.25 * c);
  const double a = b3 + 0.5 * c + std::sqrt(disc);
  const double ca = std::cbrt(a);
  // The conjugate radical satisfies cbrt(A) cbrt(B) = beta2^2/9.
  double t = beta2 / 3.0 + ca + beta2 * beta2 / (9.0 * ca);

  const double deriv = t * (3.0 * t - 2.0 * beta2);
  if (deriv > 0.0) {
    const double polished = t - residual(t, beta2, c) / deriv;
    if (std::isfinite(polished) &&
        std::abs(residual(polished, beta2, c)) < std::abs(residual(t, beta2, c)))
      t = polished;
  }

  const double tol = 1e-10 * std::max(1.0, c);
  if (!(std::abs(residual(t, beta2, c)) <= tol)) t = bisect(beta2, c);
  require(std::abs(residual(t, beta2, c)) <= tol, ErrorKind::Numeric,
          "cubic_positive_root: no root within tolerance for beta2=" + std::to_string(beta2) +
              ", c=" + std::to_string(c));
  return t;
}

}  // namespace bpalm
