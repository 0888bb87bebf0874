#include "vcd/config_io.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace vcd::cfgio {

namespace {

using nlohmann::json;

// Tracks which keys of one JSON object were consumed so leftovers can be
// reported by full path.
class Fields {
 public:
  Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j.is_object()) throw ConfigError("config: " + label() + " must be an object");
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const json* get(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ConfigError("config: " + path(key) + " must be a number");
      out = v->get<double>();
    }
  }

  void read(const std::string& key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) throw ConfigError("config: " + path(key) + " must be an integer");
      out = v->get<int>();
    }
  }

  void read(const std::string& key, int64_t& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) throw ConfigError("config: " + path(key) + " must be an integer");
      out = v->get<int64_t>();
    }
  }

  void read(const std::string& key, uint64_t& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<int64_t>() < 0))
        throw ConfigError("config: " + path(key) + " must be a non-negative integer");
      out = v->get<uint64_t>();
    }
  }

  void read(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError("config: " + path(key) + " must be a boolean");
      out = v->get<bool>();
    }
  }

  void read(const std::string& key, std::vector<int>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array()) throw ConfigError("config: " + path(key) + " must be an array of integers");
      std::vector<int> parsed;
      for (const json& e : *v) {
        if (!e.is_number_integer())
          throw ConfigError("config: " + path(key) + " must be an array of integers");
        parsed.push_back(e.get<int>());
      }
      out = std::move(parsed);
    }
  }

  void read_mode(const std::string& key, loss::Mode& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ConfigError("config: " + path(key) + " must be a string");
      try {
        out = loss::mode_from_string(v->get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError("config: " + path(key) + ": " + e.what());
      }
    }
  }

  // leftover keys are typos; name the first one
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("config: unknown key " + path(it.key()));
  }

 private:
  std::string label() const { return prefix_.empty() ? std::string("top level") : prefix_; }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

}  // namespace

nlohmann::ordered_json config_json(const train::TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["total_env_steps"] = cfg.total_env_steps;
  j["seed"] = cfg.seed;
  j["learning_rate"] = cfg.learning_rate;
  j["batch_size"] = cfg.batch_size;
  j["warmup_steps"] = cfg.warmup_steps;
  j["replay_capacity"] = cfg.replay_capacity;
  j["ema_tau"] = cfg.ema_tau;
  j["target_sync_interval"] = cfg.target_sync_interval;
  j["eval_every"] = cfg.eval_every;
  j["eval_episodes"] = cfg.eval_episodes;
  j["aug_pad"] = cfg.aug_pad;
  j["clean_target_views"] = cfg.clean_target_views;
  j["loss"] = {
      {"mode", loss::mode_to_string(cfg.loss.mode)},
      {"lambda", cfg.loss.lambda},
      {"pred_steps", cfg.loss.pred_steps},
      {"infonce_temperature", cfg.loss.infonce_temperature},
      {"symmetrized", cfg.loss.symmetrized},
  };
  j["network"] = {
      {"encoder_widths", cfg.network.encoder_widths},
      {"z_dim", cfg.network.z_dim},
      {"dynamics_widths", cfg.network.dynamics_widths},
      {"projector_widths", cfg.network.projector_widths},
      {"proj_dim", cfg.network.proj_dim},
      {"predictor_widths", cfg.network.predictor_widths},
      {"num_predictors", cfg.network.num_predictors},
      {"q_head_widths", cfg.network.q_head_widths},
  };
  j["env"] = {
      {"grid_size", cfg.env.grid_size},
      {"frame_stack", cfg.env.frame_stack},
      {"discount", cfg.env.discount},
      {"max_episode_steps", cfg.env.max_episode_steps},
      {"render_margin", cfg.env.render_margin},
  };
  return j;
}

train::TrainConfig parse_config_json(const nlohmann::json& j) {
  train::TrainConfig cfg;
  Fields top(j, "");
  top.read("total_env_steps", cfg.total_env_steps);
  top.read("seed", cfg.seed);
  top.read("learning_rate", cfg.learning_rate);
  top.read("batch_size", cfg.batch_size);
  top.read("warmup_steps", cfg.warmup_steps);
  top.read("replay_capacity", cfg.replay_capacity);
  top.read("ema_tau", cfg.ema_tau);
  top.read("target_sync_interval", cfg.target_sync_interval);
  top.read("eval_every", cfg.eval_every);
  top.read("eval_episodes", cfg.eval_episodes);
  top.read("aug_pad", cfg.aug_pad);
  top.read("clean_target_views", cfg.clean_target_views);

  if (const json* l = top.get("loss")) {
    Fields f(*l, "loss");
    f.read_mode("mode", cfg.loss.mode);
    f.read("lambda", cfg.loss.lambda);
    f.read("pred_steps", cfg.loss.pred_steps);
    f.read("infonce_temperature", cfg.loss.infonce_temperature);
    f.read("symmetrized", cfg.loss.symmetrized);
    f.finish();
  }
  if (const json* n = top.get("network")) {
    Fields f(*n, "network");
    f.read("encoder_widths", cfg.network.encoder_widths);
    f.read("z_dim", cfg.network.z_dim);
    f.read("dynamics_widths", cfg.network.dynamics_widths);
    f.read("projector_widths", cfg.network.projector_widths);
    f.read("proj_dim", cfg.network.proj_dim);
    f.read("predictor_widths", cfg.network.predictor_widths);
    f.read("num_predictors", cfg.network.num_predictors);
    f.read("q_head_widths", cfg.network.q_head_widths);
    f.finish();
  }
  if (const json* e = top.get("env")) {
    Fields f(*e, "env");
    f.read("grid_size", cfg.env.grid_size);
    f.read("frame_stack", cfg.env.frame_stack);
    f.read("discount", cfg.env.discount);
    f.read("max_episode_steps", cfg.env.max_episode_steps);
    f.read("render_margin", cfg.env.render_margin);
    f.finish();
  }
  top.finish();
  return cfg;
}

train::TrainConfig parse_config_text(const std::string& text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.what() starts with a "[json.exception...]" tag; keep the readable part
    std::string msg = e.what();
    if (size_t cut = msg.find("] "); cut != std::string::npos) msg = msg.substr(cut + 2);
    throw ConfigError(source + ": " + msg);
  }
  return parse_config_json(j);
}

train::TrainConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace vcd::cfgio
