#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vcd/config_io.hpp"
#include "vcd/metrics.hpp"
#include "vcd/trainer.hpp"

namespace fs = std::filesystem;
using vcd::cfgio::ConfigError;

namespace {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };
LogLevel g_level = LogLevel::Info;
std::mutex g_log_mu;

void note(LogLevel at, const std::string& msg) {
  if (static_cast<int>(g_level) < static_cast<int>(at)) return;
  std::lock_guard<std::mutex> lock(g_log_mu);
  std::cerr << msg << "\n";
}

LogLevel parse_level(const std::string& v) {
  if (v == "error") return LogLevel::Error;
  if (v == "info") return LogLevel::Info;
  if (v == "debug") return LogLevel::Debug;
  throw ConfigError("VCD_LOG_LEVEL: unknown level '" + v + "' (want error, info, or debug)");
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// run directory names must survive shells and filesystems
std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '=' ||
                   c == '-'
               ? c
               : '_';
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("cannot write " + p.string());
}

vcd::train::TrainConfig base_config(const std::string& path) {
  return path.empty() ? vcd::train::TrainConfig{} : vcd::cfgio::load_config_file(path);
}

struct RunOutcome {
  double final_eval = 0.0;
  bool evaluated = false;
  int64_t updates = 0;
  int64_t episodes = 0;
  double wallclock = 0.0;
};

nlohmann::ordered_json meta_json(uint64_t seed, const RunOutcome& o) {
  return nlohmann::ordered_json{{"seed", seed},          {"evaluated", o.evaluated},
                                {"final_eval", o.final_eval}, {"updates", o.updates},
                                {"episodes", o.episodes},     {"wallclock_seconds", o.wallclock}};
}

// One full training run with every artifact under dir: the effective config,
// the event log, a rolling checkpoint, and a completion marker written last.
RunOutcome run_into_dir(const vcd::train::TrainConfig& cfg, const fs::path& dir, bool force) {
  fs::create_directories(dir);
  fs::path log_path = dir / "run.jsonl";
  if (fs::exists(log_path) && !force)
    throw ConfigError("refusing to overwrite " + log_path.string() + " (use --force)");
  write_file(dir / "config.json", vcd::cfgio::config_json(cfg).dump(2) + "\n");

  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  std::string name = dir.filename().string();

  vcd::train::TrainHooks hooks;
  hooks.log_line = [&](const std::string& line) {
    log << line << '\n';
    if (line.find("\"kind\":\"eval\"") != std::string::npos)
      note(LogLevel::Info, "[" + name + "] " + line);
    else
      note(LogLevel::Debug, "[" + name + "] " + line);
  };
  hooks.on_checkpoint = [&](const vcd::net::NetworkStack& stack, int64_t, bool) {
    vcd::net::save_checkpoint(stack, (dir / "checkpoint.json").string());
  };

  auto t0 = std::chrono::steady_clock::now();
  vcd::train::TrainResult res = vcd::train::train(cfg, hooks);
  RunOutcome o;
  o.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.final_eval = res.final_eval;
  o.evaluated = res.evaluated;
  o.updates = res.updates;
  o.episodes = res.episodes;

  log.close();
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  write_file(dir / "run_meta.json", meta_json(cfg.seed, o).dump(2) + "\n");
  return o;
}

struct TrainArgs {
  std::string config;
  std::string out;
  uint64_t seed = 0;
  bool force = false;
};

struct AblateArgs {
  std::string config;
  std::string out;
  std::string axis;
  std::string tag;
  std::vector<std::string> values;
  std::vector<uint64_t> seeds;
  int jobs = 1;
};

struct MetricsArgs {
  std::string scores;
  std::string report;
  std::string profile;
  int resamples = 2000;
  double alpha = 0.05;
  uint64_t seed = 0;
  double norm_lo = 0.0;
  double norm_hi = 1.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  int rho_points = 101;
};

int cmd_train(const TrainArgs& args, bool seed_given) {
  vcd::train::TrainConfig cfg = base_config(args.config);
  if (seed_given) cfg.seed = args.seed;
  cfg.validate();
  RunOutcome o = run_into_dir(cfg, args.out, args.force);
  std::cout << meta_json(cfg.seed, o).dump() << "\n";
  return 0;
}

int cmd_ablate(const AblateArgs& args) {
  vcd::train::TrainConfig base = base_config(args.config);
  vcd::train::AblationSpec spec;
  spec.axis = args.axis;
  spec.values = args.values;
  spec.seeds = args.seeds;
  spec.tag = args.tag;
  fs::path out = args.out;
  fs::create_directories(out);

  vcd::train::RunFn fn = [&](const vcd::train::TrainConfig& cfg, const std::string& label,
                             uint64_t seed) -> double {
    // content address: the config decides the directory, the seed stays out
    // of the hash so one sweep's rows share it per value
    nlohmann::ordered_json cj = vcd::cfgio::config_json(cfg);
    cj["seed"] = 0;
    char hex[13];
    std::snprintf(hex, sizeof hex, "%012llx",
                  static_cast<unsigned long long>(fnv1a(cj.dump()) & 0xffffffffffffULL));
    fs::path dir = out / (sanitize(label) + "__s" + std::to_string(seed) + "__" + hex);

    fs::path meta_path = dir / "run_meta.json";
    if (fs::exists(meta_path)) {
      nlohmann::json meta = nlohmann::json::parse(read_file(meta_path));
      if (meta.value("evaluated", false)) {
        note(LogLevel::Info, "resume: " + dir.filename().string() + " already complete");
        return meta.at("final_eval").get<double>();
      }
    }
    RunOutcome o = run_into_dir(cfg, dir, true);
    if (!o.evaluated) throw std::runtime_error("run produced no evaluation score");
    return o.final_eval;
  };

  vcd::metrics::ScoreMatrix m = vcd::train::ablation_suite(base, spec, fn, args.jobs);
  fs::path csv = out / "scores.csv";
  write_file(csv, vcd::metrics::scores_csv(m));
  std::cout << "scores: " << csv.string() << "\n";
  return 0;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("rho grid needs at least 2 points");
  std::vector<double> g(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  return g;
}

int cmd_metrics(const MetricsArgs& args, bool norm_given, bool rho_given) {
  vcd::metrics::ScoreMatrix m = vcd::metrics::parse_scores_csv(read_file(args.scores));
  if (norm_given) {
    m.lo.assign(static_cast<size_t>(m.num_tasks()), args.norm_lo);
    m.hi.assign(static_cast<size_t>(m.num_tasks()), args.norm_hi);
    m = m.normalized();
  }

  vcd::metrics::AggregateReport rep =
      vcd::metrics::aggregate_report(m, args.resamples, args.alpha, args.seed);
  std::string rep_text = vcd::metrics::report_json(rep);
  std::cout << rep_text;
  if (!args.report.empty()) write_file(args.report, rep_text);

  if (!args.profile.empty()) {
    double lo = args.rho_min, hi = args.rho_max;
    if (!rho_given) {
      std::vector<double> all = m.pooled();
      lo = *std::min_element(all.begin(), all.end());
      hi = *std::max_element(all.begin(), all.end());
    }
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    std::vector<vcd::metrics::ProfilePoint> pts = vcd::metrics::profile_with_ci(
        m, linspace(lo, hi, args.rho_points), args.resamples, args.alpha, args.seed);
    write_file(args.profile, vcd::metrics::profile_csv(pts));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"view-consistent latent dynamics on a pixel catcher"};
  app.require_subcommand(1);

  TrainArgs targs;
  CLI::App* t = app.add_subcommand("train", "run one training job");
  t->add_option("--config", targs.config, "config JSON path (defaults apply when omitted)");
  CLI::Option* seed_opt = t->add_option("--seed", targs.seed, "override the config seed");
  t->add_option("--out", targs.out, "output directory")->required();
  t->add_flag("--force", targs.force, "overwrite an existing run directory");

  AblateArgs aargs;
  CLI::App* a = app.add_subcommand("ablate", "sweep one config axis over seeds");
  a->add_option("--axis", aargs.axis, "lambda, k_steps, mode, predictors, or tau")->required();
  a->add_option("--values", aargs.values, "comma-separated axis values")
      ->required()
      ->delimiter(',');
  a->add_option("--seeds", aargs.seeds, "comma-separated seeds")->required()->delimiter(',');
  a->add_option("--config", aargs.config, "base config JSON path");
  a->add_option("--out", aargs.out, "output directory")->required();
  a->add_option("--jobs", aargs.jobs, "parallel runs")->default_val(1);
  a->add_option("--tag", aargs.tag, "label prefix for this sweep");

  MetricsArgs margs;
  CLI::App* mc = app.add_subcommand("metrics", "aggregate a scores csv");
  mc->add_option("--scores", margs.scores, "scores csv path")->required();
  mc->add_option("--report", margs.report, "write the report JSON here too");
  mc->add_option("--profile", margs.profile, "write a performance profile csv here");
  mc->add_option("--resamples", margs.resamples, "bootstrap resamples")->default_val(2000);
  mc->add_option("--alpha", margs.alpha, "CI significance level")->default_val(0.05);
  mc->add_option("--seed", margs.seed, "bootstrap seed")->default_val(0);
  CLI::Option* nlo = mc->add_option("--norm-lo", margs.norm_lo, "score floor for normalization");
  CLI::Option* nhi = mc->add_option("--norm-hi", margs.norm_hi, "score ceiling for normalization");
  nlo->needs(nhi);
  nhi->needs(nlo);
  CLI::Option* rlo = mc->add_option("--rho-min", margs.rho_min, "profile grid lower edge");
  CLI::Option* rhi = mc->add_option("--rho-max", margs.rho_max, "profile grid upper edge");
  rlo->needs(rhi);
  rhi->needs(rlo);
  mc->add_option("--rho-points", margs.rho_points, "profile grid size")->default_val(101);

  try {
    if (const char* lvl = std::getenv("VCD_LOG_LEVEL")) g_level = parse_level(lvl);
    app.parse(argc, argv);
    if (t->parsed()) return cmd_train(targs, seed_opt->count() > 0);
    if (a->parsed()) return cmd_ablate(aargs);
    return cmd_metrics(margs, nlo->count() > 0, rlo->count() > 0);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
