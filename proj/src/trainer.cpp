#include "vcd/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "vcd/adam.hpp"
#include "vcd/augment.hpp"

namespace vcd::train {

using nlohmann::ordered_json;

void TrainConfig::validate() const {
  env.validate();
  network.validate();
  loss.validate();
  if (total_env_steps < 0) throw std::invalid_argument("total_env_steps must be non-negative");
  if (ema_tau < 0.0 || ema_tau > 1.0) throw std::invalid_argument("ema_tau outside [0,1]");
  if (target_sync_interval < 1)
    throw std::invalid_argument("target_sync_interval must be positive");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be positive");
  if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (warmup_steps < batch_size)
    throw std::invalid_argument("warmup_steps must cover one batch");
  if (warmup_steps < loss.pred_steps)
    throw std::invalid_argument("warmup_steps must cover one prediction window");
  if (replay_capacity < batch_size || replay_capacity < loss.pred_steps)
    throw std::invalid_argument("replay_capacity too small for a batch");
  if (loss.pred_steps > env.max_episode_steps)
    throw std::invalid_argument("pred_steps exceeds the episode length");
  if (aug_pad < 0 || aug_pad >= env.render_margin)
    throw std::invalid_argument("aug_pad must stay below env.render_margin");
}

namespace {

struct FiniteCheckGuard {
  bool prior;
  FiniteCheckGuard() : prior(ad::finite_checks()) { ad::set_finite_checks(true); }
  ~FiniteCheckGuard() { ad::set_finite_checks(prior); }
};

struct UpdateBatch {
  rl::TdBatch td;
  loss::AuxBatch aux;
};

void copy_row(std::vector<double>& flat, int row, const ad::Tensor& pixels) {
  std::copy(pixels.data.begin(), pixels.data.end(),
            flat.begin() + static_cast<int64_t>(row) * pixels.numel());
}

UpdateBatch build_update_batch(const std::vector<std::vector<rl::Transition>>& wins,
                               SplitMix64& aug_rng, int pad, bool clean_target_views) {
  int b = static_cast<int>(wins.size());
  int k = static_cast<int>(wins[0].size());
  int d = static_cast<int>(wins[0][0].obs.pixels.numel());

  std::vector<double> x1(static_cast<size_t>(b) * d), x2(x1.size());
  std::vector<std::vector<double>> xn(static_cast<size_t>(k), std::vector<double>(x1.size()));
  std::vector<double> xq(x1.size());

  UpdateBatch out;
  out.aux.actions.assign(static_cast<size_t>(k), std::vector<int>(static_cast<size_t>(b)));
  for (int i = 0; i < b; ++i) {
    const auto& w = wins[static_cast<size_t>(i)];
    copy_row(x1, i, aug::sample_view(w[0].obs, aug_rng, pad).pixels);
    copy_row(x2, i, aug::sample_view(w[0].obs, aug_rng, pad).pixels);
    for (int s = 0; s < k; ++s) {
      copy_row(xn[static_cast<size_t>(s)], i,
               aug::sample_view(w[static_cast<size_t>(s)].next_obs, aug_rng, pad).pixels);
      out.aux.actions[static_cast<size_t>(s)][static_cast<size_t>(i)] =
          static_cast<int>(w[static_cast<size_t>(s)].action);
    }
    if (clean_target_views) copy_row(xq, i, w[0].next_obs.pixels);
    out.td.rewards.push_back(w[0].reward);
    out.td.dones.push_back(w[0].done ? 1.0 : 0.0);
  }
  out.aux.x1 = ad::tensor(x1, {b, d});
  out.aux.x2 = ad::tensor(std::move(x2), {b, d});
  for (int s = 0; s < k; ++s)
    out.aux.xnext.push_back(ad::tensor(std::move(xn[static_cast<size_t>(s)]), {b, d}));
  out.td.x = out.aux.x1;
  out.td.xnext = clean_target_views ? ad::tensor(std::move(xq), {b, d}) : out.aux.xnext[0];
  out.td.actions = out.aux.actions[0];
  return out;
}

std::pair<double, double> data_range(const std::vector<double>& v) {
  double lo = v.empty() ? 0.0 : v[0], hi = lo;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return {lo, hi};
}

void emit(const TrainHooks& hooks, const ordered_json& j) {
  if (hooks.log_line) hooks.log_line(j.dump());
}

}  // namespace

double evaluate(const net::NetworkStack& stack, const env::MDPSpec& spec, int episodes,
                uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be positive");
  env::CatcherEnv e(spec);
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    e.reset(substream_seed(seed, static_cast<uint64_t>(ep)));
    while (!e.done()) {
      ad::Tensor x = net::flatten_obs(env::render(spec, e.state()).pixels);
      total += e.step(static_cast<env::Action>(net::greedy_actions(stack, x, false)[0])).reward;
    }
  }
  return total / static_cast<double>(episodes);
}

double random_policy_return(const env::MDPSpec& spec, int episodes, uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("episodes must be positive");
  env::CatcherEnv e(spec);
  SplitMix64 act(substream_seed(seed, kStreamAct));
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    e.reset(substream_seed(substream_seed(seed, kStreamEnv), static_cast<uint64_t>(ep)));
    while (!e.done())
      total += e.step(static_cast<env::Action>(act.next_below(env::kNumActions))).reward;
  }
  return total / static_cast<double>(episodes);
}

TrainResult train(const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  FiniteCheckGuard finite_guard;

  uint64_t env_base = substream_seed(cfg.seed, kStreamEnv);
  SplitMix64 aug_rng(substream_seed(cfg.seed, kStreamAugment));
  SplitMix64 init_rng(substream_seed(cfg.seed, kStreamInit));
  SplitMix64 replay_rng(substream_seed(cfg.seed, kStreamReplay));
  SplitMix64 act_rng(substream_seed(cfg.seed, kStreamAct));

  TrainResult res;
  res.stack = net::init_stack(cfg.network, cfg.input_dim(), init_rng);
  rl::ReplayBuffer buffer(cfg.replay_capacity);
  ad::AdamState opt;

  env::CatcherEnv e(cfg.env);
  int64_t episode_idx = 0;
  env::Observation obs = e.reset(env_base).second;
  double episodic_return = 0.0;
  int evals_done = 0;

  if (cfg.total_env_steps > 0)
    emit(hooks, ordered_json{{"kind", "run_start"}, {"seed", cfg.seed}});

  auto run_eval = [&](int64_t step) {
    double score = evaluate(res.stack, cfg.env, cfg.eval_episodes,
                            substream_seed(cfg.seed, kStreamEvalBase +
                                                         static_cast<uint64_t>(evals_done)));
    ++evals_done;
    emit(hooks, ordered_json{{"kind", "eval"}, {"step", step}, {"score", score}});
    if (hooks.on_checkpoint) hooks.on_checkpoint(res.stack, step, false);
    res.final_eval = score;
    res.evaluated = true;
  };

  for (int64_t t = 1; t <= cfg.total_env_steps; ++t) {
    double eps = rl::epsilon_at(t - 1, cfg.total_env_steps);
    env::Action a = rl::act_epsilon_greedy(res.stack, obs, eps, act_rng);
    env::StepResult sr = e.step(a);
    env::Observation next_obs = env::render(cfg.env, e.state());
    buffer.push({obs, a, sr.reward, next_obs, sr.done});
    episodic_return += sr.reward;
    obs = next_obs;

    if (sr.done) {
      emit(hooks, ordered_json{{"kind", "episode"},
                               {"step", t},
                               {"return", episodic_return},
                               {"length", e.state().step_count}});
      ++episode_idx;
      obs = e.reset(substream_seed(env_base, static_cast<uint64_t>(episode_idx))).second;
      episodic_return = 0.0;
      ++res.episodes;
    }

    if (t > cfg.warmup_steps) {
      auto wins = buffer.sample_windows(cfg.batch_size, cfg.loss.pred_steps, replay_rng);
      UpdateBatch batch =
          build_update_batch(wins, aug_rng, cfg.aug_pad, cfg.clean_target_views);

      ad::Tape tape;
      ad::detach_all(res.stack.online);
      ad::watch_all(tape, res.stack.online);
      loss::TotalLoss tl;
      try {
        ad::Tensor l_rl = rl::td_loss(res.stack, batch.td, cfg.env.discount);
        loss::AuxLossResult aux = loss::aux_losses(res.stack, cfg.loss, batch.aux);
        tl = loss::total_loss(l_rl, aux, cfg.loss);
      } catch (const std::runtime_error& err) {
        auto [x1lo, x1hi] = data_range(batch.aux.x1.data);
        auto [xnlo, xnhi] = data_range(batch.aux.xnext[0].data);
        double plo = 0.0, phi = 0.0;
        for (const auto& [name, tns] : res.stack.online) {
          auto [l, h] = data_range(tns.data);
          plo = std::min(plo, l);
          phi = std::max(phi, h);
        }
        emit(hooks, ordered_json{{"kind", "abort"},
                                 {"step", t},
                                 {"error", err.what()},
                                 {"actions", batch.td.actions},
                                 {"rewards", batch.td.rewards},
                                 {"dones", batch.td.dones},
                                 {"x1_range", {x1lo, x1hi}},
                                 {"xnext_range", {xnlo, xnhi}},
                                 {"param_range", {plo, phi}}});
        throw std::runtime_error(std::string(err.what()) + " at step " + std::to_string(t));
      }
      ad::Gradients grads = tape.backward(tl.total);
      ad::adam_step(res.stack.online, grads, opt, cfg.learning_rate);
      // the tape dies with this block; params must not keep handles into it
      ad::detach_all(res.stack.online);
      net::ema_update(res.stack, cfg.ema_tau);
      ++res.updates;
      if (res.updates % cfg.target_sync_interval == 0) net::sync_q_target(res.stack);

      emit(hooks, ordered_json{{"kind", "loss"},
                               {"step", t},
                               {"l_rl", tl.report.l_rl},
                               {"l_pre", tl.report.l_pre},
                               {"l_con", tl.report.l_con},
                               {"l_total", tl.report.l_total},
                               {"lambda", cfg.loss.effective_lambda()},
                               {"mode", loss::mode_to_string(cfg.loss.mode)}});
    }

    if (t % cfg.eval_every == 0) run_eval(t);
  }

  if (cfg.total_env_steps > 0 && cfg.total_env_steps % cfg.eval_every != 0)
    run_eval(cfg.total_env_steps);
  if (hooks.on_checkpoint) hooks.on_checkpoint(res.stack, cfg.total_env_steps, true);
  return res;
}

TrainConfig apply_axis_value(const TrainConfig& base, const std::string& axis,
                             const std::string& value) {
  TrainConfig cfg = base;
  auto as_double = [&]() {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size())
      throw std::invalid_argument("axis " + axis + ": bad value '" + value + "'");
    return v;
  };
  auto as_int = [&]() {
    size_t used = 0;
    long v = 0;
    try {
      v = std::stol(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size())
      throw std::invalid_argument("axis " + axis + ": bad value '" + value + "'");
    return static_cast<int>(v);
  };
  if (axis == "lambda")
    cfg.loss.lambda = as_double();
  else if (axis == "k_steps")
    cfg.loss.pred_steps = as_int();
  else if (axis == "mode")
    cfg.loss.mode = loss::mode_from_string(value);
  else if (axis == "predictors")
    cfg.network.num_predictors = as_int();
  else if (axis == "tau")
    cfg.ema_tau = as_double();
  else
    throw std::invalid_argument("unknown ablation axis '" + axis + "'");
  return cfg;
}

std::string axis_label(const std::string& axis, const std::string& value,
                       const std::string& tag) {
  // canonical value spelling so labels are stable across input formats
  std::string v;
  if (axis == "lambda" || axis == "tau")
    v = nlohmann::json(std::stod(value)).dump();
  else if (axis == "k_steps" || axis == "predictors")
    v = std::to_string(std::stol(value));
  else if (axis == "mode")
    v = loss::mode_to_string(loss::mode_from_string(value));
  else
    throw std::invalid_argument("unknown ablation axis '" + axis + "'");
  std::string label = axis + "=" + v;
  return tag.empty() ? label : tag + ":" + label;
}

metrics::ScoreMatrix ablation_suite(const TrainConfig& base, const AblationSpec& spec,
                                    const RunFn& run, int jobs) {
  if (spec.values.empty()) throw std::invalid_argument("ablation needs at least one value");
  if (spec.seeds.empty()) throw std::invalid_argument("ablation needs at least one seed");
  if (jobs < 1) throw std::invalid_argument("jobs must be positive");

  // reject every illegal combination before any run starts
  std::vector<TrainConfig> configs;
  metrics::ScoreMatrix m;
  for (const auto& v : spec.values) {
    TrainConfig cfg = apply_axis_value(base, spec.axis, v);
    cfg.validate();
    configs.push_back(cfg);
    m.task_names.push_back(axis_label(spec.axis, v, spec.tag));
    m.seeds.push_back(std::vector<int64_t>(spec.seeds.begin(), spec.seeds.end()));
    m.scores.emplace_back(spec.seeds.size(), 0.0);
    m.lo.push_back(0.0);
    m.hi.push_back(1.0);
  }

  struct Job {
    size_t value_idx, seed_idx;
  };
  std::vector<Job> todo;
  for (size_t vi = 0; vi < spec.values.size(); ++vi)
    for (size_t si = 0; si < spec.seeds.size(); ++si) todo.push_back({vi, si});

  std::atomic<size_t> cursor{0};
  std::mutex fail_mu;
  std::exception_ptr failure;
  auto worker = [&]() {
    for (;;) {
      size_t i = cursor.fetch_add(1);
      if (i >= todo.size()) return;
      {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (failure) return;
      }
      const Job& job = todo[i];
      try {
        TrainConfig cfg = configs[job.value_idx];
        cfg.seed = spec.seeds[job.seed_idx];
        m.scores[job.value_idx][job.seed_idx] =
            run(cfg, m.task_names[job.value_idx], spec.seeds[job.seed_idx]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (jobs == 1 || todo.size() < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    int n = std::min<int>(jobs, static_cast<int>(todo.size()));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return m;
}

double run_for_score(const TrainConfig& cfg, uint64_t seed) {
  TrainConfig c = cfg;
  c.seed = seed;
  TrainResult r = train(c);
  if (!r.evaluated) throw std::runtime_error("run produced no evaluation score");
  return r.final_eval;
}

}  // namespace vcd::train
