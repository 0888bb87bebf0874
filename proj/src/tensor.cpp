#include "vcd/tensor.hpp"

#include <sstream>
#include <stdexcept>
#include <utility>

namespace vcd::ad {

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

double Tensor::value() const {
  if (!is_scalar())
    throw std::invalid_argument("Tensor::value: tensor of shape " + shape_str(shape) +
                                " is not a scalar");
  return data[0];
}

int Tensor::rows() const {
  if (shape.size() != 2)
    throw std::invalid_argument("Tensor::rows: shape " + shape_str(shape) + " is not rank 2");
  return shape[0];
}

int Tensor::cols() const {
  if (shape.size() != 2)
    throw std::invalid_argument("Tensor::cols: shape " + shape_str(shape) + " is not rank 2");
  return shape[1];
}

double& Tensor::at(int i, int j) { return data[static_cast<size_t>(i) * cols() + j]; }

double Tensor::at(int i, int j) const { return data[static_cast<size_t>(i) * cols() + j]; }

Tensor Tensor::detached() const {
  Tensor t;
  t.shape = shape;
  t.data = data;
  return t;
}

Tensor zeros(Shape shape) {
  Tensor t;
  t.data.assign(static_cast<size_t>(shape_numel(shape)), 0.0);
  t.shape = std::move(shape);
  return t;
}

Tensor full(Shape shape, double v) {
  Tensor t;
  t.data.assign(static_cast<size_t>(shape_numel(shape)), v);
  t.shape = std::move(shape);
  return t;
}

Tensor scalar(double v) {
  Tensor t;
  t.data = {v};
  return t;
}

Tensor tensor(std::vector<double> data, Shape shape) {
  if (static_cast<int64_t>(data.size()) != shape_numel(shape))
    throw std::invalid_argument("tensor: " + std::to_string(data.size()) +
                                " values do not fill shape " + shape_str(shape));
  Tensor t;
  t.data = std::move(data);
  t.shape = std::move(shape);
  return t;
}

}  // namespace vcd::ad
