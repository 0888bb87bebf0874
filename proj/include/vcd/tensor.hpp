#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vcd::ad {

class Tape;

// Dimension sizes; an empty shape is a scalar.
using Shape = std::vector<int>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense double array, optionally attached to a differentiation tape.
// A Tensor with tape == nullptr is a plain immutable value and may be
// shared freely; a Tensor with a node handle belongs to exactly one tape.
struct Tensor {
  Shape shape;
  std::vector<double> data;
  Tape* tape = nullptr;
  int node = -1;

  int64_t numel() const { return static_cast<int64_t>(data.size()); }
  bool is_scalar() const { return data.size() == 1; }
  double value() const;

  int rows() const;
  int cols() const;
  double& at(int i, int j);
  double at(int i, int j) const;

  // Same value, detached from any tape.
  Tensor detached() const;
};

Tensor zeros(Shape shape);
Tensor full(Shape shape, double v);
Tensor scalar(double v);
Tensor tensor(std::vector<double> data, Shape shape);

// Named parameter collection. std::map keeps iteration order stable, which
// the optimizer and checkpoint format rely on.
using ParamMap = std::map<std::string, Tensor>;

}  // namespace vcd::ad
