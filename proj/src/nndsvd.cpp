// Nonnegative double SVD initialization.
#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "bpalm/errors.hpp"
#include "bpalm/onmf.hpp"

namespace bpalm::onmf {
namespace {

constexpr double kZeroFill = 1e-8;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

Factors nndsvd_init(const Matrix& X, std::size_t r) {
  const std::size_t m = X.rows();
  const std::size_t n = X.cols();
  require(m > 0 && n > 0, ErrorKind::Config, "nndsvd: empty matrix");
  require(r >= 1 && r <= std::min(m, n), ErrorKind::Config, "nndsvd: need 1 <= r <= min(m, n)");
  for (double v : X.values())
    require(std::isfinite(v) && v >= 0.0, ErrorKind::Config,
            "nndsvd: matrix must be finite and nonnegative");

  const Eigen::Map<const RowMatrix> A(X.values().data(), static_cast<Eigen::Index>(m),
                                      static_cast<Eigen::Index>(n));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  require(svd.info() == Eigen::Success, ErrorKind::Numeric, "nndsvd: SVD failed");
  const Eigen::MatrixXd& Us = svd.matrixU();
  const Eigen::MatrixXd& Vs = svd.matrixV();
  const Eigen::VectorXd& s = svd.singularValues();

  Factors f{Matrix(m, r), Matrix(r, n)};
  for (std::size_t j = 0; j < r; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const Eigen::VectorXd x = Us.col(jj);
    const Eigen::VectorXd y = Vs.col(jj);
    Eigen::VectorXd u;
    Eigen::VectorXd v;
    double sigma = 0.0;
    if (j == 0) {
      // The leading pair of a nonnegative matrix is sign-consistent.
      u = x.cwiseAbs();
      v = y.cwiseAbs();
      sigma = s(0);
    } else {
      const Eigen::VectorXd xp = x.cwiseMax(0.0);
      const Eigen::VectorXd xn = (-x).cwiseMax(0.0);
      const Eigen::VectorXd yp = y.cwiseMax(0.0);
      const Eigen::VectorXd yn = (-y).cwiseMax(0.0);
      const double mp = xp.norm() * yp.norm();
      const double mn = xn.norm() * yn.norm();
      if (mp >= mn && mp > 0.0) {
        u = xp / xp.norm();
        v = yp / yp.norm();
        sigma = s(jj) * mp;
      } else if (mn > 0.0) {
        u = xn / xn.norm();
        v = yn / yn.norm();
        sigma = s(jj) * mn;
      } else {
        u = Eigen::VectorXd::Zero(x.size());
        v = Eigen::VectorXd::Zero(y.size());
      }
    }
    const double w = std::sqrt(sigma);
    for (std::size_t a = 0; a < m; ++a) f.U(a, j) = w * u(static_cast<Eigen::Index>(a));
    for (std::size_t b = 0; b < n; ++b) f.V(j, b) = w * v(static_cast<Eigen::Index>(b));
  }

  for (Matrix* mat : {&f.U, &f.V})
    for (double& v : mat->values()) {
      require(std::isfinite(v), ErrorKind::Numeric, "nndsvd: non-finite factor entry");
      if (v == 0.0) v = kZeroFill;
    }
  return f;
}

}  // namespace bpalm::onmf
