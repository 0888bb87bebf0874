#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace vcd::metrics {

// Final scores grouped per configuration ("task"): scores[t][m] is run m of
// task t, seeds[t][m] the seed that produced it. lo/hi are per-task
// normalization bounds; the default [0, 1] leaves scores unchanged.
struct ScoreMatrix {
  std::vector<std::string> task_names;
  std::vector<std::vector<int64_t>> seeds;
  std::vector<std::vector<double>> scores;
  std::vector<double> lo;
  std::vector<double> hi;

  int num_tasks() const { return static_cast<int>(task_names.size()); }
  // Runs per task; throws unless every task has the same count.
  int runs_per_task() const;
  void validate() const;

  // Per-task (s - lo) / (hi - lo).
  ScoreMatrix normalized() const;
  // Every score, task-major.
  std::vector<double> pooled() const;
};

// (agent - random) / (human - random).
double normalize_hns(double agent, double random, double human);

double mean_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

// Mean of the middle half. A non-integer trim count (n/4 per side) puts
// partial weight on the two boundary items.
double iqm(const std::vector<double>& v);

// Pooled-across-tasks aggregates; these are the bootstrap statistics.
double matrix_mean(const ScoreMatrix& m);
double matrix_median(const ScoreMatrix& m);
double matrix_iqm(const ScoreMatrix& m);

using Statistic = std::function<double(const ScoreMatrix&)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap with runs resampled with replacement independently
// within each task. Resample r draws from its own substream of `seed`, so
// results do not depend on evaluation order.
Interval stratified_bootstrap_ci(const ScoreMatrix& m, const Statistic& stat, int resamples,
                                 double alpha, uint64_t seed);

// Fraction of (run, task) scores strictly above each threshold.
std::vector<double> performance_profile(const ScoreMatrix& m, const std::vector<double>& rho_grid);

struct ProfilePoint {
  double rho = 0.0;
  double fraction = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Profile plus pointwise bootstrap bands, same resampling scheme as above.
std::vector<ProfilePoint> profile_with_ci(const ScoreMatrix& m,
                                          const std::vector<double>& rho_grid, int resamples,
                                          double alpha, uint64_t seed);

// Trapezoidal integral of the profile over the grid.
double auc_of_profile(const std::vector<double>& rho_grid, const std::vector<double>& fractions);

struct AggregateEntry {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct AggregateReport {
  AggregateEntry mean;
  AggregateEntry median;
  AggregateEntry iqm;
  int resamples = 0;
  double alpha = 0.0;
  uint64_t seed = 0;
};

AggregateReport aggregate_report(const ScoreMatrix& m, int resamples, double alpha, uint64_t seed);
std::string report_json(const AggregateReport& r);

// CSV with header `config,seed,score` (alias `task,run,score`). Tasks and
// runs keep first-appearance order.
ScoreMatrix parse_scores_csv(const std::string& text);
std::string scores_csv(const ScoreMatrix& m);
std::string profile_csv(const std::vector<ProfilePoint>& points);

}  // namespace vcd::metrics
