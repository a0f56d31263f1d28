#include "bpalm/linalg.hpp"

#include <algorithm>
#include <string>

#include "bpalm/errors.hpp"

namespace bpalm {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  require(data_.size() == rows * cols, ErrorKind::Config,
          "matrix storage holds " + std::to_string(data_.size()) + " values, expected " +
              std::to_string(rows * cols));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

namespace linalg {
namespace {

// Below this many multiply-adds the parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

void check_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  require(a.cols == b.rows && c.rows == a.rows && c.cols == b.cols, ErrorKind::Config,
          "gemm_nn shape mismatch");
}
void check_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  require(a.cols == b.cols && c.rows == a.rows && c.cols == b.rows, ErrorKind::Config,
          "gemm_nt shape mismatch");
}
void check_tn(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  require(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols, ErrorKind::Config,
          "gemm_tn shape mismatch");
}

// Row i of c = a * b, accumulated over k in ascending order.
inline void nn_row(ConstMatrixView a, ConstMatrixView b, MatrixView c, std::size_t i) {
  double* out = &c.data[i * c.cols];
  std::fill(out, out + c.cols, 0.0);
  for (std::size_t k = 0; k < a.cols; ++k) {
    const double aik = a(i, k);
    const double* brow = &b.data[k * b.cols];
    for (std::size_t j = 0; j < b.cols; ++j) out[j] += aik * brow[j];
  }
}

inline void nt_row(ConstMatrixView a, ConstMatrixView b, MatrixView c, std::size_t i) {
  const double* arow = &a.data[i * a.cols];
  for (std::size_t j = 0; j < b.rows; ++j) {
    const double* brow = &b.data[j * b.cols];
    double s = 0.0;
    for (std::size_t k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
    c(i, j) = s;
  }
}

// Row p of c = a^T * b, accumulated over the shared row index in ascending order.
inline void tn_row(ConstMatrixView a, ConstMatrixView b, MatrixView c, std::size_t p) {
  double* out = &c.data[p * c.cols];
  std::fill(out, out + c.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double aip = a(i, p);
    const double* brow = &b.data[i * b.cols];
    for (std::size_t j = 0; j < b.cols; ++j) out[j] += aip * brow[j];
  }
}

inline double chunk_dot(std::span<const double> x, std::span<const double> y, std::size_t c) {
  const std::size_t lo = c * kReductionChunk;
  const std::size_t hi = std::min(x.size(), lo + kReductionChunk);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
  return s;
}

std::size_t chunk_count(std::size_t n) { return (n + kReductionChunk - 1) / kReductionChunk; }

}  // namespace

namespace serial {

void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check_nn(a, b, c);
  for (std::size_t i = 0; i < a.rows; ++i) nn_row(a, b, c, i);
}

void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check_nt(a, b, c);
  for (std::size_t i = 0; i < a.rows; ++i) nt_row(a, b, c, i);
}

void gemm_tn(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check_tn(a, b, c);
  for (std::size_t p = 0; p < a.cols; ++p) tn_row(a, b, c, p);
}

double dot(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::Config, "dot: length mismatch");
  double total = 0.0;
  for (std::size_t c = 0; c < chunk_count(x.size()); ++c) total += chunk_dot(x, y, c);
  return total;
}

double squared_norm(std::span<const double> x) { return dot(x, x); }

}  // namespace serial

namespace omp {

void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check_nn(a, b, c);
  const auto rows = static_cast<long>(a.rows);
  const bool big = a.rows * a.cols * b.cols >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (long i = 0; i < rows; ++i) nn_row(a, b, c, static_cast<std::size_t>(i));
}

void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check_nt(a, b, c);
  const auto rows = static_cast<long>(a.rows);
  const bool big = a.rows * a.cols * b.rows >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (long i = 0; i < rows; ++i) nt_row(a, b, c, static_cast<std::size_t>(i));
}

void gemm_tn(ConstMatrixView a, ConstMatrixView b, MatrixView c) {
  check_tn(a, b, c);
  const auto rows = static_cast<long>(a.cols);
  const bool big = a.rows * a.cols * b.cols >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (long p = 0; p < rows; ++p) tn_row(a, b, c, static_cast<std::size_t>(p));
}

double dot(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::Config, "dot: length mismatch");
  const std::size_t chunks = chunk_count(x.size());
  if (chunks <= 1) return serial::dot(x, y);
  std::vector<double> partial(chunks);
  const auto n = static_cast<long>(chunks);
#pragma omp parallel for schedule(static) if (x.size() >= kParallelWork)
  for (long c = 0; c < n; ++c) partial[c] = chunk_dot(x, y, static_cast<std::size_t>(c));
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double squared_norm(std::span<const double> x) { return dot(x, x); }

}  // namespace omp

Matrix multiply(ConstMatrixView a, ConstMatrixView b) {
  Matrix c(a.rows, b.cols);
  gemm_nn(a, b, c.view());
  return c;
}

Matrix multiply_transposed(ConstMatrixView a, ConstMatrixView b) {
  Matrix c(a.rows, b.rows);
  gemm_nt(a, b, c.view());
  return c;
}

Matrix transposed_multiply(ConstMatrixView a, ConstMatrixView b) {
  Matrix c(a.cols, b.cols);
  gemm_tn(a, b, c.view());
  return c;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::Config, "squared_distance: length mismatch");
  double total = 0.0;
  for (std::size_t c = 0; c < chunk_count(a.size()); ++c) {
    const std::size_t lo = c * kReductionChunk;
    const std::size_t hi = std::min(a.size(), lo + kReductionChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    total += s;
  }
  return total;
}

}  // namespace linalg
}  // namespace bpalm
