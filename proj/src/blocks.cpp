#include "bpalm/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bpalm/errors.hpp"

namespace bpalm {

BlockStructure::BlockStructure(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  require(!sizes_.empty(), ErrorKind::Config, "block structure needs at least one block");
  offsets_.reserve(sizes_.size());
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    require(sizes_[i] > 0, ErrorKind::Config,
            "block " + std::to_string(i) + " has zero size");
    offsets_.push_back(total_);
    total_ += sizes_[i];
  }
}

BlockPoint::BlockPoint(BlockStructure structure, std::vector<double> values)
    : structure_(std::move(structure)), data_(std::move(values)) {
  require(data_.size() == structure_.total(), ErrorKind::Config,
          "block point has " + std::to_string(data_.size()) + " entries, structure needs " +
              std::to_string(structure_.total()));
}

BlockPoint BlockPoint::zeros(const BlockStructure& structure) {
  return BlockPoint(structure, std::vector<double>(structure.total(), 0.0));
}

std::span<const double> BlockPoint::block(std::size_t i) const {
  return std::span<const double>(data_).subspan(structure_.offset(i), structure_.size(i));
}

std::span<double> BlockPoint::block(std::size_t i) {
  return std::span<double>(data_).subspan(structure_.offset(i), structure_.size(i));
}

void BlockPoint::set_block(std::size_t i, std::span<const double> z) {
  require(z.size() == structure_.size(i), ErrorKind::Config,
          "block " + std::to_string(i) + " expects " + std::to_string(structure_.size(i)) +
              " entries, got " + std::to_string(z.size()));
  std::copy(z.begin(), z.end(), data_.begin() + static_cast<std::ptrdiff_t>(structure_.offset(i)));
}

BlockPoint BlockPoint::with_block(std::size_t i, std::span<const double> z) const {
  BlockPoint out = *this;
  out.set_block(i, z);
  return out;
}

bool BlockPoint::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace bpalm
