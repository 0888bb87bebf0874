#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "vcd/augment.hpp"
#include "vcd/config_io.hpp"
#include "vcd/env.hpp"
#include "vcd/metrics.hpp"
#include "vcd/networks.hpp"
#include "vcd/rl.hpp"
#include "vcd/trainer.hpp"

namespace py = pybind11;
using namespace vcd;

namespace {

py::tuple tensor_shape(const ad::Tensor& t) {
  py::tuple s(t.shape.size());
  for (size_t i = 0; i < t.shape.size(); ++i) s[i] = t.shape[i];
  return s;
}

train::TrainConfig config_from_text(const std::string& text, const std::string& source) {
  train::TrainConfig cfg = cfgio::parse_config_text(text, source);
  cfg.validate();
  return cfg;
}

metrics::Statistic stat_by_name(const std::string& name) {
  if (name == "mean") return metrics::matrix_mean;
  if (name == "median") return metrics::matrix_median;
  if (name == "iqm") return metrics::matrix_iqm;
  throw std::invalid_argument("unknown statistic '" + name + "' (want mean, median, or iqm)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "view-consistent latent dynamics: environment, training, and eval statistics";

  py::class_<env::MDPSpec>(m, "MDPSpec")
      .def(py::init<>())
      .def_readwrite("grid_size", &env::MDPSpec::grid_size)
      .def_readwrite("frame_stack", &env::MDPSpec::frame_stack)
      .def_readwrite("discount", &env::MDPSpec::discount)
      .def_readwrite("max_episode_steps", &env::MDPSpec::max_episode_steps)
      .def_readwrite("render_margin", &env::MDPSpec::render_margin)
      .def("frame_size", &env::MDPSpec::frame_size)
      .def("max_drops", &env::MDPSpec::max_drops)
      .def("validate", &env::MDPSpec::validate);

  py::class_<env::FramePose>(m, "FramePose")
      .def_readonly("paddle_x", &env::FramePose::paddle_x)
      .def_readonly("object_x", &env::FramePose::object_x)
      .def_readonly("object_y", &env::FramePose::object_y)
      .def("__repr__", [](const env::FramePose& p) {
        return "FramePose(paddle_x=" + std::to_string(p.paddle_x) +
               ", object_x=" + std::to_string(p.object_x) +
               ", object_y=" + std::to_string(p.object_y) + ")";
      });

  py::class_<env::TabularState>(m, "TabularState")
      .def_readonly("poses", &env::TabularState::poses)
      .def_readonly("step_count", &env::TabularState::step_count);

  py::class_<env::Observation>(m, "Observation")
      .def_property_readonly(
          "shape", [](const env::Observation& o) { return tensor_shape(o.pixels); })
      .def_property_readonly("data",
                             [](const env::Observation& o) { return o.pixels.data; });

  py::class_<env::StepResult>(m, "StepResult")
      .def_readonly("state", &env::StepResult::state)
      .def_readonly("reward", &env::StepResult::reward)
      .def_readonly("done", &env::StepResult::done);

  py::class_<env::CatcherEnv>(m, "CatcherEnv")
      .def(py::init<env::MDPSpec>(), py::arg("spec"))
      .def("reset", &env::CatcherEnv::reset, py::arg("seed"))
      .def("step",
           [](env::CatcherEnv& e, int action) {
             return e.step(static_cast<env::Action>(action));
           },
           py::arg("action"))
      .def("state", &env::CatcherEnv::state, py::return_value_policy::copy)
      .def("done", &env::CatcherEnv::done);

  m.def("render", &env::render, py::arg("spec"), py::arg("state"));

  py::class_<SplitMix64>(m, "Rng").def(py::init<uint64_t>(), py::arg("seed"));

  py::class_<aug::View>(m, "View")
      .def_property_readonly("shape",
                             [](const aug::View& v) { return tensor_shape(v.pixels); })
      .def_property_readonly("data", [](const aug::View& v) { return v.pixels.data; })
      .def_property_readonly("dx", [](const aug::View& v) { return v.params.dx; })
      .def_property_readonly("dy", [](const aug::View& v) { return v.params.dy; });

  m.def("sample_view", &aug::sample_view, py::arg("obs"), py::arg("rng"), py::arg("pad") = 4);

  m.def("substream_seed", &substream_seed, py::arg("seed"), py::arg("stream"));
  m.def("epsilon_at", &rl::epsilon_at, py::arg("step"), py::arg("total"));

  m.def("iqm", &metrics::iqm, py::arg("scores"));
  m.def("mean_of", &metrics::mean_of, py::arg("scores"));
  m.def("median_of", &metrics::median_of, py::arg("scores"));

  py::class_<metrics::ScoreMatrix>(m, "ScoreMatrix")
      .def(py::init<>())
      .def_readwrite("task_names", &metrics::ScoreMatrix::task_names)
      .def_readwrite("seeds", &metrics::ScoreMatrix::seeds)
      .def_readwrite("scores", &metrics::ScoreMatrix::scores)
      .def_readwrite("lo", &metrics::ScoreMatrix::lo)
      .def_readwrite("hi", &metrics::ScoreMatrix::hi)
      .def("validate", &metrics::ScoreMatrix::validate)
      .def("normalized", &metrics::ScoreMatrix::normalized)
      .def("pooled", &metrics::ScoreMatrix::pooled)
      .def("mean", &metrics::matrix_mean)
      .def("median", &metrics::matrix_median)
      .def("iqm", &metrics::matrix_iqm);

  m.def("parse_scores_csv", &metrics::parse_scores_csv, py::arg("text"));
  m.def("scores_csv", &metrics::scores_csv, py::arg("matrix"));

  m.def(
      "bootstrap_ci",
      [](const metrics::ScoreMatrix& mat, const std::string& stat, int resamples, double alpha,
         uint64_t seed) {
        metrics::Interval ci =
            metrics::stratified_bootstrap_ci(mat, stat_by_name(stat), resamples, alpha, seed);
        return py::make_tuple(ci.lo, ci.hi);
      },
      py::arg("matrix"), py::arg("stat") = "iqm", py::arg("resamples") = 2000,
      py::arg("alpha") = 0.05, py::arg("seed") = 0);

  m.def(
      "report_json",
      [](const metrics::ScoreMatrix& mat, int resamples, double alpha, uint64_t seed) {
        return metrics::report_json(metrics::aggregate_report(mat, resamples, alpha, seed));
      },
      py::arg("matrix"), py::arg("resamples") = 2000, py::arg("alpha") = 0.05,
      py::arg("seed") = 0);

  m.def("default_config_json",
        []() { return cfgio::config_json(train::TrainConfig{}).dump(2) + "\n"; });

  m.def(
      "effective_config_json",
      [](const std::string& text, const std::string& source) {
        return cfgio::config_json(config_from_text(text, source)).dump(2) + "\n";
      },
      py::arg("config_json"), py::arg("source") = "<config>");

  m.def(
      "train_run",
      [](const std::string& config_json, py::object log_line, const std::string& source) {
        train::TrainConfig cfg = config_from_text(config_json, source);
        train::TrainHooks hooks;
        if (!log_line.is_none()) {
          py::function fn = py::cast<py::function>(log_line);
          hooks.log_line = [fn](const std::string& line) { fn(line); };
        }
        train::TrainResult res = train::train(cfg, hooks);
        py::dict out;
        out["final_eval"] = res.final_eval;
        out["evaluated"] = res.evaluated;
        out["updates"] = res.updates;
        out["episodes"] = res.episodes;
        out["checkpoint_json"] = net::checkpoint_json(res.stack);
        return out;
      },
      py::arg("config_json"), py::arg("log_line") = py::none(),
      py::arg("source") = "<config>");

  m.def(
      "evaluate_checkpoint",
      [](const std::string& checkpoint_json, const std::string& config_json, int episodes,
         uint64_t seed, const std::string& source) {
        train::TrainConfig cfg = config_from_text(config_json, source);
        net::NetworkStack stack = net::parse_checkpoint_json(checkpoint_json);
        return train::evaluate(stack, cfg.env, episodes, seed);
      },
      py::arg("checkpoint_json"), py::arg("config_json"), py::arg("episodes") = 10,
      py::arg("seed") = 0, py::arg("source") = "<config>");

  m.def(
      "random_policy_return",
      [](const std::string& config_json, int episodes, uint64_t seed,
         const std::string& source) {
        return train::random_policy_return(config_from_text(config_json, source).env, episodes,
                                           seed);
      },
      py::arg("config_json"), py::arg("episodes") = 10, py::arg("seed") = 0,
      py::arg("source") = "<config>");
}
