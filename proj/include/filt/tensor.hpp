#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace filt {

/// Named trainable array (row-major float64) with a same-shape gradient buffer.
struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;

  ParamTensor() = default;
  ParamTensor(std::string name, std::vector<std::size_t> shape);

  std::size_t size() const { return values.size(); }
  bool allocated() const { return !shape.empty(); }
  /// Length of one row: the product of all dimensions but the first.
  std::size_t row_size() const;
  std::size_t rows() const { return shape.empty() ? 0 : shape.front(); }

  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  void zero_grad();
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace filt
