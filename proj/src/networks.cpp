#include "vcd/networks.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace vcd::net {

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims;
  dims.push_back(in);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

void init_mlp(ad::ParamMap& params, const std::string& role, const std::vector<int>& dims,
              SplitMix64& rng) {
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    const int fan_in = dims[i], fan_out = dims[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    ad::Tensor w = ad::zeros({fan_in, fan_out});
    for (auto& v : w.data) v = (2.0 * rng.next_double() - 1.0) * bound;
    ad::Tensor b = ad::zeros({1, fan_out});
    for (auto& v : b.data) v = (2.0 * rng.next_double() - 1.0) * bound;
    params[role + "/w" + std::to_string(i)] = std::move(w);
    params[role + "/b" + std::to_string(i)] = std::move(b);
  }
}

// x + b, with b [1,out] broadcast over rows via a ones-column matmul
ad::Tensor bias_add(const ad::Tensor& x, const ad::Tensor& b) {
  return ad::add(x, ad::matmul(ad::full({x.shape[0], 1}, 1.0), b));
}

const ad::Tensor& param(const ad::ParamMap& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw std::invalid_argument("missing parameter " + name);
  return it->second;
}

}  // namespace

std::vector<int> NetworkConfig::encoder_dims(int input_dim) const {
  return with_ends(input_dim, encoder_widths, z_dim);
}
std::vector<int> NetworkConfig::dynamics_dims() const {
  return with_ends(z_dim + env::kNumActions, dynamics_widths, z_dim);
}
std::vector<int> NetworkConfig::projector_dims() const {
  return with_ends(z_dim, projector_widths, proj_dim);
}
std::vector<int> NetworkConfig::predictor_dims() const {
  return with_ends(proj_dim, predictor_widths, proj_dim);
}
std::vector<int> NetworkConfig::q_dims() const {
  return with_ends(z_dim, q_head_widths, env::kNumActions);
}

void NetworkConfig::validate() const {
  if (z_dim < 1 || proj_dim < 1) throw std::invalid_argument("latent dims must be positive");
  if (num_predictors < 0 || num_predictors > 2)
    throw std::invalid_argument("num_predictors must be 0, 1 or 2");
  for (const auto* widths :
       {&encoder_widths, &dynamics_widths, &projector_widths, &predictor_widths, &q_head_widths})
    for (int w : *widths)
      if (w < 1) throw std::invalid_argument("layer widths must be positive");
}

NetworkStack init_stack(const NetworkConfig& cfg, int input_dim, SplitMix64& rng) {
  cfg.validate();
  if (input_dim < 1) throw std::invalid_argument("input_dim must be positive");
  NetworkStack stack;
  stack.cfg = cfg;
  stack.input_dim = input_dim;
  init_mlp(stack.online, "encoder", cfg.encoder_dims(input_dim), rng);
  init_mlp(stack.online, "dynamics", cfg.dynamics_dims(), rng);
  init_mlp(stack.online, "projector", cfg.projector_dims(), rng);
  if (cfg.num_predictors == 1) {
    init_mlp(stack.online, "pred", cfg.predictor_dims(), rng);
  } else if (cfg.num_predictors == 2) {
    init_mlp(stack.online, "pred_pre", cfg.predictor_dims(), rng);
    init_mlp(stack.online, "pred_con", cfg.predictor_dims(), rng);
  }
  init_mlp(stack.online, "q_head", cfg.q_dims(), rng);
  sync_ssl_target(stack);
  sync_q_target(stack);
  return stack;
}

ad::Tensor mlp_forward(const ad::ParamMap& params, const std::string& role,
                       const ad::Tensor& x) {
  ad::Tensor h = x;
  for (int i = 0;; ++i) {
    auto wit = params.find(role + "/w" + std::to_string(i));
    if (wit == params.end()) {
      if (i == 0) throw std::invalid_argument("no parameters for role " + role);
      return h;
    }
    const bool last = params.find(role + "/w" + std::to_string(i + 1)) == params.end();
    h = bias_add(ad::matmul(h, wit->second), param(params, role + "/b" + std::to_string(i)));
    if (!last) h = ad::relu(h);
  }
}

ad::Tensor onehot_actions(const std::vector<int>& actions) {
  ad::Tensor out = ad::zeros({static_cast<int>(actions.size()), env::kNumActions});
  for (size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 0 || actions[i] >= env::kNumActions)
      throw std::invalid_argument("action index out of range");
    out.data[i * env::kNumActions + static_cast<size_t>(actions[i])] = 1.0;
  }
  return out;
}

ad::Tensor dynamics_step(const ad::ParamMap& params, const ad::Tensor& z,
                         const std::vector<int>& actions) {
  if (z.shape.size() != 2 || z.shape[0] != static_cast<int>(actions.size()))
    throw std::invalid_argument("dynamics_step: latent batch does not match action count");
  return mlp_forward(params, "dynamics", ad::concat(z, onehot_actions(actions)));
}

std::vector<ad::Tensor> rollout_k(const ad::ParamMap& params, const ad::Tensor& z,
                                  const std::vector<std::vector<int>>& actions) {
  if (actions.empty()) throw std::invalid_argument("rollout_k: empty action sequence");
  std::vector<ad::Tensor> out;
  ad::Tensor cur = z;
  for (const auto& a : actions) {
    cur = dynamics_step(params, cur, a);
    out.push_back(cur);
  }
  return out;
}

ad::Tensor predictor_forward(const NetworkStack& stack, const std::string& branch,
                             const ad::Tensor& y) {
  if (branch != "pre" && branch != "con")
    throw std::invalid_argument("predictor branch must be 'pre' or 'con'");
  switch (stack.cfg.num_predictors) {
    case 0:
      return y;
    case 1:
      return mlp_forward(stack.online, "pred", y);
    default:
      return mlp_forward(stack.online, branch == "pre" ? "pred_pre" : "pred_con", y);
  }
}

LatentPipeline forward_pipeline(const NetworkStack& stack, const ad::Tensor& x1,
                                const ad::Tensor& x2, const std::vector<int>& actions,
                                const ad::Tensor& xnext) {
  if (x1.shape != x2.shape || x1.shape != xnext.shape)
    throw std::invalid_argument("forward_pipeline: view batches must share shape");
  LatentPipeline p;
  p.z1 = mlp_forward(stack.online, "encoder", x1);
  p.zbar2 = ad::stop_gradient(mlp_forward(stack.target, "encoder", x2));
  p.xhat1 = dynamics_step(stack.online, p.z1, actions);
  p.xbar2 = ad::stop_gradient(dynamics_step(stack.target, p.zbar2, actions));
  p.yhat1 = mlp_forward(stack.online, "projector", p.xhat1);
  p.ybar2 = ad::stop_gradient(mlp_forward(stack.target, "projector", p.xbar2));
  p.ytilde = ad::stop_gradient(
      mlp_forward(stack.target, "projector", mlp_forward(stack.target, "encoder", xnext)));
  return p;
}

namespace {

bool ssl_role(const std::string& name) {
  return name.rfind("encoder/", 0) == 0 || name.rfind("dynamics/", 0) == 0 ||
         name.rfind("projector/", 0) == 0;
}

}  // namespace

void ema_update(NetworkStack& stack, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0,1]");
  for (auto& [name, t] : stack.target) {
    if (!ssl_role(name)) continue;
    const ad::Tensor& o = param(stack.online, name);
    for (size_t i = 0; i < t.data.size(); ++i)
      t.data[i] = (1.0 - tau) * t.data[i] + tau * o.data[i];
  }
}

void sync_ssl_target(NetworkStack& stack) {
  for (const auto& [name, o] : stack.online)
    if (ssl_role(name)) stack.target[name] = o.detached();
}

void sync_q_target(NetworkStack& stack) {
  for (const auto& [name, o] : stack.online)
    if (name.rfind("q_head/", 0) == 0) stack.target[name] = o.detached();
}

ad::Tensor q_values(const NetworkStack& stack, const ad::Tensor& x, bool use_target) {
  const ad::ParamMap& line = use_target ? stack.target : stack.online;
  ad::Tensor q = mlp_forward(line, "q_head", mlp_forward(line, "encoder", x));
  return use_target ? ad::stop_gradient(q) : q;
}

std::vector<int> greedy_actions(const NetworkStack& stack, const ad::Tensor& x,
                                bool use_target) {
  ad::Tensor q = q_values(stack, x.detached(), use_target);
  std::vector<int> out;
  for (int r = 0; r < q.shape[0]; ++r) {
    int best = 0;
    for (int a = 1; a < env::kNumActions; ++a)
      if (q.at(r, a) > q.at(r, best)) best = a;  // strict: ties keep lower index
    out.push_back(best);
  }
  return out;
}

ad::Tensor flatten_obs(const ad::Tensor& pixels) {
  ad::Tensor flat = pixels.detached();
  flat.shape = {1, static_cast<int>(flat.numel())};
  return flat;
}

namespace {

nlohmann::ordered_json params_json(const ad::ParamMap& params) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, t] : params)
    j[name] = {{"shape", t.shape}, {"values", t.data}};
  return j;
}

ad::ParamMap params_from_json(const nlohmann::json& j) {
  ad::ParamMap out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    ad::Tensor t;
    t.shape = it.value().at("shape").get<ad::Shape>();
    t.data = it.value().at("values").get<std::vector<double>>();
    if (ad::shape_numel(t.shape) != t.numel())
      throw std::invalid_argument("checkpoint: corrupt tensor " + it.key());
    out[it.key()] = std::move(t);
  }
  return out;
}

}  // namespace

std::string checkpoint_json(const NetworkStack& stack) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["config"] = {{"encoder_widths", stack.cfg.encoder_widths},
                 {"z_dim", stack.cfg.z_dim},
                 {"dynamics_widths", stack.cfg.dynamics_widths},
                 {"projector_widths", stack.cfg.projector_widths},
                 {"proj_dim", stack.cfg.proj_dim},
                 {"predictor_widths", stack.cfg.predictor_widths},
                 {"num_predictors", stack.cfg.num_predictors},
                 {"q_head_widths", stack.cfg.q_head_widths}};
  j["input_dim"] = stack.input_dim;
  j["online"] = params_json(stack.online);
  j["target"] = params_json(stack.target);
  return j.dump();
}

NetworkStack parse_checkpoint_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format_version").get<int>() != 1)
    throw std::invalid_argument("checkpoint: unsupported format_version");
  NetworkStack stack;
  const auto& c = j.at("config");
  stack.cfg.encoder_widths = c.at("encoder_widths").get<std::vector<int>>();
  stack.cfg.z_dim = c.at("z_dim").get<int>();
  stack.cfg.dynamics_widths = c.at("dynamics_widths").get<std::vector<int>>();
  stack.cfg.projector_widths = c.at("projector_widths").get<std::vector<int>>();
  stack.cfg.proj_dim = c.at("proj_dim").get<int>();
  stack.cfg.predictor_widths = c.at("predictor_widths").get<std::vector<int>>();
  stack.cfg.num_predictors = c.at("num_predictors").get<int>();
  stack.cfg.q_head_widths = c.at("q_head_widths").get<std::vector<int>>();
  stack.input_dim = j.at("input_dim").get<int>();
  stack.online = params_from_json(j.at("online"));
  stack.target = params_from_json(j.at("target"));
  stack.cfg.validate();
  return stack;
}

void save_checkpoint(const NetworkStack& stack, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << checkpoint_json(stack) << '\n';
}

NetworkStack load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_checkpoint_json(text);
}

}  // namespace vcd::net
