#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bpalm {

/// Partition of R^n into N consecutive blocks of sizes n_1, ..., n_N.
/// Block i is the index range [offset(i), offset(i) + size(i)).
class BlockStructure {
 public:
  BlockStructure() = default;
  explicit BlockStructure(std::vector<std::size_t> sizes);

  std::size_t count() const noexcept { return sizes_.size(); }
  std::size_t size(std::size_t i) const { return sizes_.at(i); }
  std::size_t offset(std::size_t i) const { return offsets_.at(i); }
  std::size_t total() const noexcept { return total_; }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }

  friend bool operator==(const BlockStructure& a, const BlockStructure& b) {
    return a.sizes_ == b.sizes_;
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

/// A point of R^{n_1} x ... x R^{n_N} stored contiguously.
class BlockPoint {
 public:
  BlockPoint() = default;
  BlockPoint(BlockStructure structure, std::vector<double> values);

  static BlockPoint zeros(const BlockStructure& structure);

  const BlockStructure& structure() const noexcept { return structure_; }
  std::size_t block_count() const noexcept { return structure_.count(); }

  std::span<const double> block(std::size_t i) const;
  std::span<double> block(std::size_t i);
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  void set_block(std::size_t i, std::span<const double> z);
  /// x + U_i (z - x_i): this point with block i replaced by z.
  BlockPoint with_block(std::size_t i, std::span<const double> z) const;

  bool all_finite() const noexcept;

  friend bool operator==(const BlockPoint&, const BlockPoint&) = default;

 private:
  BlockStructure structure_;
  std::vector<double> data_;
};

}  // namespace bpalm
