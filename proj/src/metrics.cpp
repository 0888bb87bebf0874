#include "vcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "vcd/prng.hpp"

namespace vcd::metrics {

int ScoreMatrix::runs_per_task() const {
  if (task_names.empty()) throw std::invalid_argument("score matrix has no tasks");
  size_t m = scores[0].size();
  for (int t = 0; t < num_tasks(); ++t)
    if (scores[static_cast<size_t>(t)].size() != m)
      throw std::invalid_argument("task '" + task_names[static_cast<size_t>(t)] + "' has " +
                                  std::to_string(scores[static_cast<size_t>(t)].size()) +
                                  " runs where '" + task_names[0] + "' has " + std::to_string(m));
  return static_cast<int>(m);
}

void ScoreMatrix::validate() const {
  size_t n = task_names.size();
  if (seeds.size() != n || scores.size() != n || lo.size() != n || hi.size() != n)
    throw std::invalid_argument("score matrix field lengths disagree");
  for (size_t t = 0; t < n; ++t)
    if (seeds[t].size() != scores[t].size())
      throw std::invalid_argument("score matrix seeds and scores disagree for task '" +
                                  task_names[t] + "'");
  if (runs_per_task() < 1) throw std::invalid_argument("score matrix has no runs");
}

ScoreMatrix ScoreMatrix::normalized() const {
  validate();
  ScoreMatrix out = *this;
  for (int t = 0; t < num_tasks(); ++t) {
    size_t ti = static_cast<size_t>(t);
    double span = hi[ti] - lo[ti];
    if (span == 0.0)
      throw std::invalid_argument("degenerate normalization bounds for task '" + task_names[ti] +
                                  "'");
    for (double& s : out.scores[ti]) s = (s - lo[ti]) / span;
    out.lo[ti] = 0.0;
    out.hi[ti] = 1.0;
  }
  return out;
}

std::vector<double> ScoreMatrix::pooled() const {
  std::vector<double> all;
  for (const auto& row : scores) all.insert(all.end(), row.begin(), row.end());
  return all;
}

double normalize_hns(double agent, double random, double human) {
  if (human == random) throw std::invalid_argument("normalize_hns: human equals random");
  return (agent - random) / (human - random);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of empty list");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty list");
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double iqm(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("iqm of empty list");
  std::vector<double> s(v);
  std::sort(s.begin(), s.end());
  size_t n = s.size();
  double trim = static_cast<double>(n) / 4.0;
  size_t whole = static_cast<size_t>(trim);
  double frac = trim - static_cast<double>(whole);

  double wsum = 0.0, num = 0.0;
  // boundary items keep the untrimmed remainder of their unit weight
  if (frac > 0.0) {
    num += (1.0 - frac) * (s[whole] + s[n - 1 - whole]);
    wsum += 2.0 * (1.0 - frac);
  }
  size_t first = whole + (frac > 0.0 ? 1 : 0);
  for (size_t i = first; i + first < n; ++i) {
    num += s[i];
    wsum += 1.0;
  }
  return num / wsum;
}

double matrix_mean(const ScoreMatrix& m) { return mean_of(m.pooled()); }
double matrix_median(const ScoreMatrix& m) { return median_of(m.pooled()); }
double matrix_iqm(const ScoreMatrix& m) { return iqm(m.pooled()); }

// linear interpolation between order statistics
static double quantile_sorted(const std::vector<double>& sorted, double p) {
  size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = p * static_cast<double>(n - 1);
  size_t i = static_cast<size_t>(h);
  if (i >= n - 1) return sorted[n - 1];
  double f = h - static_cast<double>(i);
  return sorted[i] + (sorted[i + 1] - sorted[i]) * f;
}

static ScoreMatrix resample_matrix(const ScoreMatrix& m, SplitMix64& rng) {
  ScoreMatrix out = m;
  for (size_t t = 0; t < m.scores.size(); ++t) {
    int runs = static_cast<int>(m.scores[t].size());
    for (int j = 0; j < runs; ++j) {
      int pick = rng.next_below(runs);
      out.scores[t][static_cast<size_t>(j)] = m.scores[t][static_cast<size_t>(pick)];
      out.seeds[t][static_cast<size_t>(j)] = m.seeds[t][static_cast<size_t>(pick)];
    }
  }
  return out;
}

static void check_bootstrap_args(const ScoreMatrix& m, int resamples, double alpha) {
  m.validate();
  if (resamples < 100) throw std::invalid_argument("bootstrap needs at least 100 resamples");
  if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("alpha outside (0,1)");
}

Interval stratified_bootstrap_ci(const ScoreMatrix& m, const Statistic& stat, int resamples,
                                 double alpha, uint64_t seed) {
  check_bootstrap_args(m, resamples, alpha);
  std::vector<double> values(static_cast<size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    SplitMix64 rng(substream_seed(seed, static_cast<uint64_t>(r)));
    values[static_cast<size_t>(r)] = stat(resample_matrix(m, rng));
  }
  std::sort(values.begin(), values.end());
  return {quantile_sorted(values, alpha / 2.0), quantile_sorted(values, 1.0 - alpha / 2.0)};
}

std::vector<double> performance_profile(const ScoreMatrix& m,
                                        const std::vector<double>& rho_grid) {
  m.validate();
  for (size_t i = 1; i < rho_grid.size(); ++i)
    if (rho_grid[i] < rho_grid[i - 1])
      throw std::invalid_argument("rho grid must be sorted ascending");
  std::vector<double> all = m.pooled();
  std::vector<double> out(rho_grid.size());
  for (size_t i = 0; i < rho_grid.size(); ++i) {
    int above = 0;
    for (double s : all)
      if (s > rho_grid[i]) ++above;
    out[i] = static_cast<double>(above) / static_cast<double>(all.size());
  }
  return out;
}

std::vector<ProfilePoint> profile_with_ci(const ScoreMatrix& m,
                                          const std::vector<double>& rho_grid, int resamples,
                                          double alpha, uint64_t seed) {
  check_bootstrap_args(m, resamples, alpha);
  std::vector<double> point = performance_profile(m, rho_grid);
  // fractions[g] collects the resampled profile at rho_grid[g]
  std::vector<std::vector<double>> fractions(rho_grid.size(),
                                             std::vector<double>(static_cast<size_t>(resamples)));
  for (int r = 0; r < resamples; ++r) {
    SplitMix64 rng(substream_seed(seed, static_cast<uint64_t>(r)));
    std::vector<double> prof = performance_profile(resample_matrix(m, rng), rho_grid);
    for (size_t g = 0; g < rho_grid.size(); ++g) fractions[g][static_cast<size_t>(r)] = prof[g];
  }
  std::vector<ProfilePoint> out(rho_grid.size());
  for (size_t g = 0; g < rho_grid.size(); ++g) {
    std::sort(fractions[g].begin(), fractions[g].end());
    out[g] = {rho_grid[g], point[g], quantile_sorted(fractions[g], alpha / 2.0),
              quantile_sorted(fractions[g], 1.0 - alpha / 2.0)};
  }
  return out;
}

double auc_of_profile(const std::vector<double>& rho_grid, const std::vector<double>& fractions) {
  if (rho_grid.size() != fractions.size())
    throw std::invalid_argument("auc: grid and fractions lengths differ");
  double area = 0.0;
  for (size_t i = 1; i < rho_grid.size(); ++i) {
    double h = rho_grid[i] - rho_grid[i - 1];
    if (h < 0.0) throw std::invalid_argument("auc: grid must be sorted ascending");
    area += h * 0.5 * (fractions[i] + fractions[i - 1]);
  }
  return area;
}

AggregateReport aggregate_report(const ScoreMatrix& m, int resamples, double alpha,
                                 uint64_t seed) {
  check_bootstrap_args(m, resamples, alpha);
  std::vector<double> means, medians, iqms;
  means.reserve(static_cast<size_t>(resamples));
  medians.reserve(static_cast<size_t>(resamples));
  iqms.reserve(static_cast<size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    SplitMix64 rng(substream_seed(seed, static_cast<uint64_t>(r)));
    ScoreMatrix rs = resample_matrix(m, rng);
    means.push_back(matrix_mean(rs));
    medians.push_back(matrix_median(rs));
    iqms.push_back(matrix_iqm(rs));
  }
  std::sort(means.begin(), means.end());
  std::sort(medians.begin(), medians.end());
  std::sort(iqms.begin(), iqms.end());

  auto entry = [&](double value, const std::vector<double>& dist) {
    return AggregateEntry{value, quantile_sorted(dist, alpha / 2.0),
                          quantile_sorted(dist, 1.0 - alpha / 2.0)};
  };
  AggregateReport rep;
  rep.mean = entry(matrix_mean(m), means);
  rep.median = entry(matrix_median(m), medians);
  rep.iqm = entry(matrix_iqm(m), iqms);
  rep.resamples = resamples;
  rep.alpha = alpha;
  rep.seed = seed;
  return rep;
}

std::string report_json(const AggregateReport& r) {
  nlohmann::ordered_json j;
  auto put = [&](const char* name, const AggregateEntry& e) {
    j["aggregates"][name] = {{"value", e.value}, {"ci_low", e.ci_lo}, {"ci_high", e.ci_hi}};
  };
  put("mean", r.mean);
  put("median", r.median);
  put("iqm", r.iqm);
  j["resamples"] = r.resamples;
  j["alpha"] = r.alpha;
  j["seed"] = r.seed;
  return j.dump(2) + "\n";
}

static std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

ScoreMatrix parse_scores_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  ScoreMatrix m;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (!saw_header) {
      if (t != "config,seed,score" && t != "task,run,score")
        throw std::invalid_argument("scores csv line " + std::to_string(lineno) +
                                    ": expected header config,seed,score");
      saw_header = true;
      continue;
    }
    size_t c1 = t.find(',');
    size_t c2 = t.rfind(',');
    if (c1 == std::string::npos || c2 == c1)
      throw std::invalid_argument("scores csv line " + std::to_string(lineno) +
                                  ": expected 3 comma-separated fields");
    std::string name = trim(t.substr(0, c1));
    std::string seed_s = trim(t.substr(c1 + 1, c2 - c1 - 1));
    std::string score_s = trim(t.substr(c2 + 1));
    if (name.empty() || seed_s.find(',') != std::string::npos)
      throw std::invalid_argument("scores csv line " + std::to_string(lineno) +
                                  ": expected 3 comma-separated fields");
    int64_t seed = 0;
    double score = 0.0;
    try {
      size_t used = 0;
      seed = std::stoll(seed_s, &used);
      if (used != seed_s.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("scores csv line " + std::to_string(lineno) +
                                  ": bad seed '" + seed_s + "'");
    }
    try {
      size_t used = 0;
      score = std::stod(score_s, &used);
      if (used != score_s.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("scores csv line " + std::to_string(lineno) +
                                  ": bad score '" + score_s + "'");
    }

    size_t ti = m.task_names.size();
    for (size_t t2 = 0; t2 < m.task_names.size(); ++t2)
      if (m.task_names[t2] == name) ti = t2;
    if (ti == m.task_names.size()) {
      m.task_names.push_back(name);
      m.seeds.emplace_back();
      m.scores.emplace_back();
      m.lo.push_back(0.0);
      m.hi.push_back(1.0);
    }
    m.seeds[ti].push_back(seed);
    m.scores[ti].push_back(score);
  }
  if (!saw_header) throw std::invalid_argument("scores csv: empty input");
  return m;
}

static std::string num(double v) { return nlohmann::json(v).dump(); }

std::string scores_csv(const ScoreMatrix& m) {
  std::string out = "config,seed,score\n";
  for (size_t t = 0; t < m.task_names.size(); ++t)
    for (size_t j = 0; j < m.scores[t].size(); ++j)
      out += m.task_names[t] + "," + std::to_string(m.seeds[t][j]) + "," + num(m.scores[t][j]) +
             "\n";
  return out;
}

std::string profile_csv(const std::vector<ProfilePoint>& points) {
  std::string out = "rho,fraction,ci_low,ci_high\n";
  for (const auto& p : points)
    out += num(p.rho) + "," + num(p.fraction) + "," + num(p.ci_lo) + "," + num(p.ci_hi) + "\n";
  return out;
}

}  // namespace vcd::metrics
