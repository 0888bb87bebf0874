#include "vcd/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vcd::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                              " vs " + shape_str(b.shape));
}

Tape* tape_of(const Tensor& a) { return a.tape; }

Tape* tape_of(const Tensor& a, const Tensor& b) {
  if (a.tape && b.tape && a.tape != b.tape)
    throw std::invalid_argument("op inputs belong to different tapes");
  return a.tape ? a.tape : b.tape;
}

void check_finite(const char* op, const Tensor& t) {
  if (!finite_checks()) return;
  for (double v : t.data)
    if (!std::isfinite(v))
      throw std::runtime_error(std::string(op) + ": non-finite value in output of shape " +
                               shape_str(t.shape));
}

Tensor make(Shape shape, std::vector<double> data, Tape* tape, VjpFn vjp, const char* op) {
  Tensor out;
  out.shape = std::move(shape);
  out.data = std::move(data);
  check_finite(op, out);
  if (tape) {
    out.tape = tape;
    out.node = tape->record(out.numel(), std::move(vjp));
  }
  return out;
}

// Row geometry for ops that act along the last axis. Scalars and rank-1
// tensors are one row; higher ranks fold leading axes into rows.
struct RowView {
  int64_t rows;
  int64_t cols;
};

RowView last_axis(const Tensor& t) {
  if (t.shape.empty()) return {1, 1};
  int64_t cols = t.shape.back();
  return {t.numel() / cols, cols};
}

Shape drop_last_axis(const Shape& s) {
  Shape out(s.begin(), s.end() - (s.empty() ? 0 : 1));
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) shape_error("add", a, b);
  std::vector<double> out(a.data);
  for (size_t i = 0; i < out.size(); ++i) out[i] += b.data[i];
  Tape* tp = tape_of(a, b);
  int ia = a.node, ib = b.node;
  int64_t n = a.numel();
  return make(a.shape, std::move(out), tp,
              [ia, ib, n](const std::vector<double>& g, std::vector<std::vector<double>>& acc) {
                if (ia >= 0) {
                  auto& ga = Tape::slot(acc, ia, n);
                  for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                }
                if (ib >= 0) {
                  auto& gb = Tape::slot(acc, ib, n);
                  for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                }
              },
              "add");
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) shape_error("subtract", a, b);
  std::vector<double> out(a.data);
  for (size_t i = 0; i < out.size(); ++i) out[i] -= b.data[i];
  Tape* tp = tape_of(a, b);
  int ia = a.node, ib = b.node;
  int64_t n = a.numel();
  return make(a.shape, std::move(out), tp,
              [ia, ib, n](const std::vector<double>& g, std::vector<std::vector<double>>& acc) {
                if (ia >= 0) {
                  auto& ga = Tape::slot(acc, ia, n);
                  for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                }
                if (ib >= 0) {
                  auto& gb = Tape::slot(acc, ib, n);
                  for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                }
              },
              "subtract");
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) shape_error("multiply", a, b);
  std::vector<double> out(a.data);
  for (size_t i = 0; i < out.size(); ++i) out[i] *= b.data[i];
  Tape* tp = tape_of(a, b);
  int ia = a.node, ib = b.node;
  int64_t n = a.numel();
  std::vector<double> av = (tp && ib >= 0) ? a.data : std::vector<double>{};
  std::vector<double> bv = (tp && ia >= 0) ? b.data : std::vector<double>{};
  return make(a.shape, std::move(out), tp,
              [ia, ib, n, av = std::move(av), bv = std::move(bv)](
                  const std::vector<double>& g, std::vector<std::vector<double>>& acc) {
                if (ia >= 0) {
                  auto& ga = Tape::slot(acc, ia, n);
                  for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
                }
                if (ib >= 0) {
                  auto& gb = Tape::slot(acc, ib, n);
                  for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                }
              },
              "multiply");
}

Tensor scalar_mul(const Tensor& a, double c) {
  std::vector<double> out(a.data);
  for (double& v : out) v *= c;
  int ia = a.node;
  int64_t n = a.numel();
  return make(a.shape, std::move(out), tape_of(a),
              [ia, c, n](const std::vector<double>& g, std::vector<std::vector<double>>& acc) {
                if (ia < 0) return;
                auto& ga = Tape::slot(acc, ia, n);
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
              },
              "scalar_mul");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape.size() != 2 || b.shape.size() != 2 || a.shape[1] != b.shape[0])
    shape_error("matmul", a, b);
  const int64_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
  std::vector<double> out(static_cast<size_t>(m * n), 0.0);
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a.data.data() + i * k;
    double* orow = out.data() + i * n;
    for (int64_t l = 0; l < k; ++l) {
      const double av = arow[l];
      if (av == 0.0) continue;
      const double* brow = b.data.data() + l * n;
      for (int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  Tape* tp = tape_of(a, b);
  int ia = a.node, ib = b.node;
  std::vector<double> av = (tp && ib >= 0) ? a.data : std::vector<double>{};
  std::vector<double> bv = (tp && ia >= 0) ? b.data : std::vector<double>{};
  return make({static_cast<int>(m), static_cast<int>(n)}, std::move(out), tp,
              [ia, ib, m, k, n, av = std::move(av), bv = std::move(bv)](
                  const std::vector<double>& g, std::vector<std::vector<double>>& acc) {
                if (ia >= 0) {
                  // dA = g . B^T
                  auto& ga = Tape::slot(acc, ia, m * k);
                  for (int64_t i = 0; i < m; ++i)
                    for (int64_t l = 0; l < k; ++l) {
                      double s = 0.0;
                      const double* grow = g.data() + i * n;
                      const double* brow = bv.data() + l * n;
                      for (int64_t j = 0; j < n; ++j) s += grow[j] * brow[j];
                      ga[static_cast<size_t>(i * k + l)] += s;
                    }
                }
                if (ib >= 0) {
                  // dB = A^T . g
                  auto& gb = Tape::slot(acc, ib, k * n);
                  for (int64_t i = 0; i < m; ++i) {
                    const double* arow = av.data() + i * k;
                    const double* grow = g.data() + i * n;
                    for (int64_t l = 0; l < k; ++l) {
                      const double a_il = arow[l];
                      if (a_il == 0.0) continue;
                      double* gbrow = gb.data() + l * n;
                      for (int64_t j = 0; j < n; ++j) gbrow[j] += a_il * grow[j];
                    }
                  }
                }
              },
              "matmul");
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.data);
  for (double& v : out)
    if (v < 0.0) v = 0.0;
  int ix = x.node;
  int64_t n = x.numel();
  std::vector<double> xv = (x.tape && ix >= 0) ? x.data : std::vector<double>{};
  return make(x.shape, std::move(out), tape_of(x),
              [ix, n, xv = std::move(xv)](const std::vector<double>& g,
                                          std::vector<std::vector<double>>& acc) {
                if (ix < 0) return;
                auto& gx = Tape::slot(acc, ix, n);
                for (size_t i = 0; i < g.size(); ++i)
                  if (xv[i] > 0.0) gx[i] += g[i];
              },
              "relu");
}

Tensor log(const Tensor& x) {
  std::vector<double> out(x.data);
  for (double& v : out) v = std::log(v);
  int ix = x.node;
  int64_t n = x.numel();
  std::vector<double> xv = (x.tape && ix >= 0) ? x.data : std::vector<double>{};
  return make(x.shape, std::move(out), tape_of(x),
              [ix, n, xv = std::move(xv)](const std::vector<double>& g,
                                          std::vector<std::vector<double>>& acc) {
                if (ix < 0) return;
                auto& gx = Tape::slot(acc, ix, n);
                for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / xv[i];
              },
              "log");
}

Tensor exp(const Tensor& x) {
  std::vector<double> out(x.data);
  for (double& v : out) v = std::exp(v);
  int ix = x.node;
  int64_t n = x.numel();
  std::vector<double> yv = (x.tape && ix >= 0) ? out : std::vector<double>{};
  return make(x.shape, std::move(out), tape_of(x),
              [ix, n, yv = std::move(yv)](const std::vector<double>& g,
                                          std::vector<std::vector<double>>& acc) {
                if (ix < 0) return;
                auto& gx = Tape::slot(acc, ix, n);
                for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i];
              },
              "exp");
}

Tensor l2_normalize(const Tensor& x) {
  const auto [rows, cols] = last_axis(x);
  std::vector<double> out(x.data.size());
  std::vector<double> inv_norm(static_cast<size_t>(rows));
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * cols;
    double ss = 0.0;
    for (int64_t j = 0; j < cols; ++j) ss += xr[j] * xr[j];
    const double inv = 1.0 / std::sqrt(ss + kNormEps);
    inv_norm[static_cast<size_t>(r)] = inv;
    for (int64_t j = 0; j < cols; ++j) out[static_cast<size_t>(r * cols + j)] = xr[j] * inv;
  }
  int ix = x.node;
  int64_t n = x.numel();
  std::vector<double> xv = (x.tape && ix >= 0) ? x.data : std::vector<double>{};
  std::vector<double> inv = (x.tape && ix >= 0) ? inv_norm : std::vector<double>{};
  return make(
      x.shape, std::move(out), tape_of(x),
      [ix, n, rows, cols, xv = std::move(xv), inv = std::move(inv)](
          const std::vector<double>& g, std::vector<std::vector<double>>& acc) {
        if (ix < 0) return;
        auto& gx = Tape::slot(acc, ix, n);
        // y = x / r with r = sqrt(sum x^2 + eps):
        // dx = g / r - x * <g, x> / r^3
        for (int64_t r = 0; r < rows; ++r) {
          const double* xr = xv.data() + r * cols;
          const double* gr = g.data() + r * cols;
          const double ir = inv[static_cast<size_t>(r)];
          double dot = 0.0;
          for (int64_t j = 0; j < cols; ++j) dot += gr[j] * xr[j];
          const double c = dot * ir * ir * ir;
          double* gxr = gx.data() + r * cols;
          for (int64_t j = 0; j < cols; ++j) gxr[j] += gr[j] * ir - xr[j] * c;
        }
      },
      "l2_normalize");
}

Tensor reduce_mean(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data) s += v;
  const double inv = 1.0 / static_cast<double>(x.data.size());
  int ix = x.node;
  int64_t n = x.numel();
  return make({}, {s * inv}, tape_of(x),
              [ix, n, inv](const std::vector<double>& g, std::vector<std::vector<double>>& acc) {
                if (ix < 0) return;
                auto& gx = Tape::slot(acc, ix, n);
                const double gv = g[0] * inv;
                for (auto& v : gx) v += gv;
              },
              "reduce_mean");
}

Tensor reduce_sum_last(const Tensor& x) {
  const auto [rows, cols] = last_axis(x);
  std::vector<double> out(static_cast<size_t>(rows), 0.0);
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * cols;
    double s = 0.0;
    for (int64_t j = 0; j < cols; ++j) s += xr[j];
    out[static_cast<size_t>(r)] = s;
  }
  int ix = x.node;
  int64_t n = x.numel();
  return make(drop_last_axis(x.shape), std::move(out), tape_of(x),
              [ix, n, rows, cols](const std::vector<double>& g,
                                  std::vector<std::vector<double>>& acc) {
                if (ix < 0) return;
                auto& gx = Tape::slot(acc, ix, n);
                for (int64_t r = 0; r < rows; ++r) {
                  const double gv = g[static_cast<size_t>(r)];
                  double* gxr = gx.data() + r * cols;
                  for (int64_t j = 0; j < cols; ++j) gxr[j] += gv;
                }
              },
              "reduce_sum_last");
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape) shape_error("cosine_similarity", a, b);
  return reduce_sum_last(multiply(l2_normalize(a), l2_normalize(b)));
}

Tensor concat(const Tensor& a, const Tensor& b) {
  if (a.shape.empty() || b.shape.empty() || a.shape.size() != b.shape.size())
    shape_error("concat", a, b);
  for (size_t i = 0; i + 1 < a.shape.size(); ++i)
    if (a.shape[i] != b.shape[i]) shape_error("concat", a, b);

  const auto [rows, ca] = last_axis(a);
  const int64_t cb = b.shape.back();
  Shape oshape = a.shape;
  oshape.back() = static_cast<int>(ca + cb);
  std::vector<double> out(static_cast<size_t>(rows * (ca + cb)));
  for (int64_t r = 0; r < rows; ++r) {
    double* orow = out.data() + r * (ca + cb);
    const double* ar = a.data.data() + r * ca;
    const double* br = b.data.data() + r * cb;
    for (int64_t j = 0; j < ca; ++j) orow[j] = ar[j];
    for (int64_t j = 0; j < cb; ++j) orow[ca + j] = br[j];
  }
  Tape* tp = tape_of(a, b);
  int ia = a.node, ib = b.node;
  int64_t na = a.numel(), nb = b.numel();
  return make(std::move(oshape), std::move(out), tp,
              [ia, ib, na, nb, rows, ca, cb](const std::vector<double>& g,
                                             std::vector<std::vector<double>>& acc) {
                if (ia >= 0) {
                  auto& ga = Tape::slot(acc, ia, na);
                  for (int64_t r = 0; r < rows; ++r)
                    for (int64_t j = 0; j < ca; ++j)
                      ga[static_cast<size_t>(r * ca + j)] += g[static_cast<size_t>(r * (ca + cb) + j)];
                }
                if (ib >= 0) {
                  auto& gb = Tape::slot(acc, ib, nb);
                  for (int64_t r = 0; r < rows; ++r)
                    for (int64_t j = 0; j < cb; ++j)
                      gb[static_cast<size_t>(r * cb + j)] +=
                          g[static_cast<size_t>(r * (ca + cb) + ca + j)];
                }
              },
              "concat");
}

Tensor gather_rows(const Tensor& x, const std::vector<int>& idx) {
  if (x.shape.size() != 2)
    throw std::invalid_argument("gather_rows: input of shape " + shape_str(x.shape) +
                                " is not rank 2");
  const int64_t rows = x.shape[0], cols = x.shape[1];
  for (int i : idx)
    if (i < 0 || i >= rows)
      throw std::invalid_argument("gather_rows: index " + std::to_string(i) +
                                  " out of range for " + shape_str(x.shape));
  std::vector<double> out(idx.size() * static_cast<size_t>(cols));
  for (size_t r = 0; r < idx.size(); ++r)
    for (int64_t j = 0; j < cols; ++j)
      out[r * cols + j] = x.data[static_cast<size_t>(idx[r] * cols + j)];
  int ix = x.node;
  int64_t n = x.numel();
  return make({static_cast<int>(idx.size()), static_cast<int>(cols)}, std::move(out), tape_of(x),
              [ix, n, cols, idx](const std::vector<double>& g,
                                 std::vector<std::vector<double>>& acc) {
                if (ix < 0) return;
                auto& gx = Tape::slot(acc, ix, n);
                for (size_t r = 0; r < idx.size(); ++r)
                  for (int64_t j = 0; j < cols; ++j)
                    gx[static_cast<size_t>(idx[r] * cols + j)] += g[r * cols + j];
              },
              "gather_rows");
}

Tensor stop_gradient(const Tensor& x) { return x.detached(); }

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw std::invalid_argument("reshape: cannot view " + shape_str(x.shape) + " as " +
                                shape_str(shape));
  std::vector<double> out(x.data);
  int ix = x.node;
  int64_t n = x.numel();
  return make(std::move(shape), std::move(out), tape_of(x),
              [ix, n](const std::vector<double>& g, std::vector<std::vector<double>>& acc) {
                if (ix < 0) return;
                auto& gx = Tape::slot(acc, ix, n);
                for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
              },
              "reshape");
}

}  // namespace vcd::ad
