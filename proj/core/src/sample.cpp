#include "kdeforge/sample.hpp"

#include <cmath>
#include <string>

#include "kdeforge/error.hpp"

namespace kdeforge {

Sample::Sample(PointMatrix data) : data_(std::move(data)) {
  if (data_.rows() < 1) throw InvalidArgument("sample must contain at least one observation");
  if (data_.cols() < 1) throw InvalidArgument("sample dimension must be at least 1");
  for (Eigen::Index i = 0; i < data_.rows(); ++i) {
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      if (!std::isfinite(data_(i, j)))
        throw InvalidArgument("sample entry (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") is not finite");
    }
  }
}

Sample Sample::from_values(std::span<const double> values) {
  PointMatrix m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return Sample(std::move(m));
}

std::vector<double> Sample::column(int coord) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data_(static_cast<Eigen::Index>(i), coord);
  return out;
}

}  // namespace kdeforge
