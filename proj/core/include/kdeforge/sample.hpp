#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kdeforge/types.hpp"

namespace kdeforge {

/// An i.i.d. sample: n ≥ 1 observations in ℝ^d, all entries finite.
class Sample {
 public:
  explicit Sample(PointMatrix data);

  /// One-dimensional sample from a flat list of values.
  static Sample from_values(std::span<const double> values);

  std::size_t size() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  int dim() const noexcept { return static_cast<int>(data_.cols()); }

  const PointMatrix& data() const noexcept { return data_; }

  Eigen::Map<const Point> row(std::size_t i) const {
    return {data_.data() + i * data_.cols(), data_.cols()};
  }

  double min(int coord) const { return data_.col(coord).minCoeff(); }
  double max(int coord) const { return data_.col(coord).maxCoeff(); }

  /// Values of one coordinate, copied out.
  std::vector<double> column(int coord) const;

 private:
  PointMatrix data_;
};

}  // namespace kdeforge
