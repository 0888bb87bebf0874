#pragma once

#include <vector>

#include "vcd/tape.hpp"
#include "vcd/tensor.hpp"

// Forward op set. Every op is differentiable through Tape::backward except
// stop_gradient, which detaches its input. Ops record themselves on the tape
// of their inputs; ops over plain values stay plain values.
namespace vcd::ad {

// Epsilon added inside the square root of row norms.
inline constexpr double kNormEps = 1e-8;

Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double c);

// [m,k] x [k,n] -> [m,n]
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor relu(const Tensor& x);
Tensor log(const Tensor& x);
Tensor exp(const Tensor& x);

// Rows rescaled to unit norm along the last axis; the norm is
// sqrt(sum(x^2) + kNormEps), so zero rows stay finite.
Tensor l2_normalize(const Tensor& x);

// Row-paired cosine similarity of two equally shaped inputs: [B,D] x [B,D]
// -> [B], or [D] x [D] -> scalar. Uses the epsilon-guarded norms above.
Tensor cosine_similarity(const Tensor& a, const Tensor& b);

// Mean over all elements -> scalar.
Tensor reduce_mean(const Tensor& x);

// Sum along the last axis: [B,D] -> [B], [D] -> scalar.
Tensor reduce_sum_last(const Tensor& x);

// Concatenation along the last axis.
Tensor concat(const Tensor& a, const Tensor& b);

// Row selection: x[idx[0]], x[idx[1]], ... Rows may repeat; gradients
// scatter-add back.
Tensor gather_rows(const Tensor& x, const std::vector<int>& idx);

// Identity forward; no gradient flows through.
Tensor stop_gradient(const Tensor& x);

// Same data, new shape with equal element count.
Tensor reshape(const Tensor& x, Shape shape);

}  // namespace vcd::ad
