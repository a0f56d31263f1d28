#pragma once

// Dense row-major matrices and the handful of products the ONMF updates need.
//
// Every kernel exists twice: `serial::` is the plain reference loop, `omp::`
// is the OpenMP version. Both accumulate each output entry in the same order,
// so their results are bitwise identical for any thread count. The unqualified
// `linalg::` entry points forward to the OpenMP versions.

#include <cstddef>
#include <span>
#include <vector>

namespace bpalm {

struct ConstMatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct MatrixView {
  std::span<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  operator ConstMatrixView() const { return {data, rows, cols}; }
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  explicit Matrix(ConstMatrixView view)
      : rows_(view.rows), cols_(view.cols), data_(view.data.begin(), view.data.end()) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  MatrixView view() noexcept { return {data_, rows_, cols_}; }
  ConstMatrixView view() const noexcept { return {data_, rows_, cols_}; }
  operator ConstMatrixView() const noexcept { return view(); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace linalg {

// Reductions sum fixed-size chunks first and then the chunk totals, so the
// rounding pattern does not depend on how chunks are spread over threads.
inline constexpr std::size_t kReductionChunk = 4096;

namespace serial {
void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c);  // c = a * b
void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c);  // c = a * b^T
void gemm_tn(ConstMatrixView a, ConstMatrixView b, MatrixView c);  // c = a^T * b
double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);
}  // namespace serial

namespace omp {
void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c);
void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c);
void gemm_tn(ConstMatrixView a, ConstMatrixView b, MatrixView c);
double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);
}  // namespace omp

inline void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c) { omp::gemm_nn(a, b, c); }
inline void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c) { omp::gemm_nt(a, b, c); }
inline void gemm_tn(ConstMatrixView a, ConstMatrixView b, MatrixView c) { omp::gemm_tn(a, b, c); }
inline double dot(std::span<const double> x, std::span<const double> y) { return omp::dot(x, y); }
inline double squared_norm(std::span<const double> x) { return omp::squared_norm(x); }

Matrix multiply(ConstMatrixView a, ConstMatrixView b);            // a * b
Matrix multiply_transposed(ConstMatrixView a, ConstMatrixView b); // a * b^T
Matrix transposed_multiply(ConstMatrixView a, ConstMatrixView b); // a^T * b

/// ||a - b||_F^2 for equally shaped inputs.
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace linalg
}  // namespace bpalm
