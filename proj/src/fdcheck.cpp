#include "vcd/fdcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace vcd::ad {

namespace {

double eval_at(const ScalarGraphFn& f, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Tensor> ps;
  ps.reserve(params.size());
  for (const auto& p : params) {
    Tensor t = p.detached();
    tape.watch(t);
    ps.push_back(std::move(t));
  }
  Tensor out = f(tape, ps);
  if (!out.is_scalar())
    throw std::invalid_argument("finite_diff_check: f produced shape " + shape_str(out.shape) +
                                ", expected a scalar");
  const double v = out.value();
  if (!std::isfinite(v)) throw std::runtime_error("finite_diff_check: f is non-finite");
  return v;
}

}  // namespace

double finite_diff_check(const ScalarGraphFn& f, std::vector<Tensor> params, double step) {
  // Analytic pass.
  Tape tape;
  std::vector<Tensor> ps;
  ps.reserve(params.size());
  for (auto& p : params) {
    Tensor t = p.detached();
    tape.watch(t);
    ps.push_back(std::move(t));
  }
  Tensor out = f(tape, ps);
  if (!out.is_scalar())
    throw std::invalid_argument("finite_diff_check: f produced shape " + shape_str(out.shape) +
                                ", expected a scalar");
  if (!std::isfinite(out.value()))
    throw std::runtime_error("finite_diff_check: f is non-finite");
  Gradients grads = tape.backward(out);

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    const std::vector<double>& analytic = grads.at(ps[pi]);
    for (size_t i = 0; i < params[pi].data.size(); ++i) {
      const double saved = params[pi].data[i];
      params[pi].data[i] = saved + step;
      const double up = eval_at(f, params);
      params[pi].data[i] = saved - step;
      const double dn = eval_at(f, params);
      params[pi].data[i] = saved;
      const double fd = (up - dn) / (2.0 * step);
      const double err = std::fabs(analytic[i] - fd) / std::max(1.0, std::fabs(fd));
      if (err > worst) worst = err;
    }
  }
  return worst;
}

}  // namespace vcd::ad
