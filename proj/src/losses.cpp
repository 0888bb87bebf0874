#include "vcd/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace vcd::loss {

Mode mode_from_string(const std::string& s) {
  if (s == "vcd") return Mode::Vcd;
  if (s == "vcd_pne") return Mode::VcdPne;
  if (s == "vcd_cne") return Mode::VcdCne;
  if (s == "base") return Mode::Base;
  if (s == "contrastive") return Mode::Contrastive;
  throw std::invalid_argument("unknown loss mode '" + s + "'");
}

std::string mode_to_string(Mode m) {
  switch (m) {
    case Mode::Vcd: return "vcd";
    case Mode::VcdPne: return "vcd_pne";
    case Mode::VcdCne: return "vcd_cne";
    case Mode::Base: return "base";
    default: return "contrastive";
  }
}

void LossConfig::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  if (pred_steps < 1) throw std::invalid_argument("pred_steps must be at least 1");
  if (infonce_temperature <= 0.0)
    throw std::invalid_argument("infonce_temperature must be positive");
}

ad::Tensor cosine_distance_loss(const ad::Tensor& prediction, const ad::Tensor& target) {
  ad::Tensor cos = ad::cosine_similarity(prediction, target);
  ad::Tensor dist = ad::subtract(ad::full(cos.shape, 2.0), ad::scalar_mul(cos, 2.0));
  return dist.is_scalar() ? dist : ad::reduce_mean(dist);
}

ad::Tensor prediction_loss(const net::LatentPipeline& pipe, const net::NetworkStack& stack) {
  return cosine_distance_loss(net::predictor_forward(stack, "pre", pipe.yhat1), pipe.ytilde);
}

ad::Tensor consistency_loss(const net::LatentPipeline& pipe, const net::NetworkStack& stack) {
  return cosine_distance_loss(net::predictor_forward(stack, "con", pipe.yhat1), pipe.ybar2);
}

ad::Tensor infonce_loss(const ad::Tensor& queries, const ad::Tensor& keys, double temperature) {
  if (temperature <= 0.0) throw std::invalid_argument("infonce_loss: temperature must be positive");
  if (queries.shape != keys.shape || queries.shape.size() != 2)
    throw std::invalid_argument("infonce_loss: queries and keys must be matching [B,P]");
  const int b = queries.shape[0];
  ad::Tensor qn = ad::l2_normalize(queries);
  ad::Tensor kn = ad::l2_normalize(keys.detached());

  ad::Tensor acc;
  for (int i = 0; i < b; ++i) {
    // similarities of query i against every key
    ad::Tensor qi = ad::gather_rows(qn, std::vector<int>(static_cast<size_t>(b), i));
    ad::Tensor scaled = ad::scalar_mul(ad::reduce_sum_last(ad::multiply(qi, kn)),
                                       1.0 / temperature);
    // constant max shift; cancels exactly in value and gradient
    double m = scaled.data[0];
    for (double v : scaled.data) m = std::max(m, v);
    ad::Tensor shifted = ad::subtract(scaled, ad::full({b}, m));
    ad::Tensor lse = ad::add(ad::scalar(m), ad::log(ad::reduce_sum_last(ad::exp(shifted))));
    ad::Tensor pos = ad::reshape(ad::gather_rows(ad::reshape(scaled, {b, 1}), {i}), {});
    ad::Tensor term = ad::subtract(lse, pos);
    acc = (i == 0) ? term : ad::add(acc, term);
  }
  return ad::scalar_mul(acc, 1.0 / b);
}

AuxLossResult aux_losses(const net::NetworkStack& stack, const LossConfig& cfg,
                         const AuxBatch& batch) {
  cfg.validate();
  const int k_steps = cfg.pred_steps;
  if (static_cast<int>(batch.actions.size()) != k_steps ||
      static_cast<int>(batch.xnext.size()) != k_steps)
    throw std::invalid_argument("aux_losses: need exactly pred_steps actions and next views");

  auto one_pass = [&](const ad::Tensor& x1, const ad::Tensor& x2) -> AuxLossResult {
    ad::Tensor z1 = net::mlp_forward(stack.online, "encoder", x1);
    ad::Tensor zbar2 = ad::stop_gradient(net::mlp_forward(stack.target, "encoder", x2));

    // PNE/CNE: that branch's chain starts from a detached view representation
    ad::Tensor pre_z = (cfg.mode == Mode::VcdPne) ? ad::stop_gradient(z1) : z1;
    ad::Tensor con_z = (cfg.mode == Mode::VcdCne) ? ad::stop_gradient(z1) : z1;
    std::vector<ad::Tensor> pre_roll = net::rollout_k(stack.online, pre_z, batch.actions);
    std::vector<ad::Tensor> con_roll =
        (cfg.mode == Mode::VcdPne || cfg.mode == Mode::VcdCne)
            ? net::rollout_k(stack.online, con_z, batch.actions)
            : pre_roll;
    std::vector<ad::Tensor> tgt_roll = net::rollout_k(stack.target, zbar2, batch.actions);

    ad::Tensor pre_acc, con_acc;
    for (int k = 0; k < k_steps; ++k) {
      ad::Tensor ytilde = ad::stop_gradient(net::mlp_forward(
          stack.target, "projector",
          net::mlp_forward(stack.target, "encoder", batch.xnext[static_cast<size_t>(k)])));
      ad::Tensor term_pre;
      if (cfg.mode == Mode::Contrastive) {
        ad::Tensor q = net::predictor_forward(
            stack, "pre",
            net::mlp_forward(stack.online, "projector", pre_roll[static_cast<size_t>(k)]));
        term_pre = infonce_loss(q, ytilde, cfg.infonce_temperature);
      } else {
        ad::Tensor yhat = net::mlp_forward(stack.online, "projector",
                                           pre_roll[static_cast<size_t>(k)]);
        term_pre = cosine_distance_loss(net::predictor_forward(stack, "pre", yhat), ytilde);
      }
      pre_acc = (k == 0) ? term_pre : ad::add(pre_acc, term_pre);

      if (cfg.mode != Mode::Contrastive) {
        ad::Tensor ybar = ad::stop_gradient(net::mlp_forward(
            stack.target, "projector", tgt_roll[static_cast<size_t>(k)]));
        ad::Tensor yhat_c = net::mlp_forward(stack.online, "projector",
                                             con_roll[static_cast<size_t>(k)]);
        ad::Tensor term_con =
            cosine_distance_loss(net::predictor_forward(stack, "con", yhat_c), ybar);
        con_acc = (k == 0) ? term_con : ad::add(con_acc, term_con);
      }
    }
    AuxLossResult r;
    r.l_pre = ad::scalar_mul(pre_acc, 1.0 / k_steps);
    r.l_con = (cfg.mode == Mode::Contrastive) ? ad::scalar(0.0)
                                              : ad::scalar_mul(con_acc, 1.0 / k_steps);
    return r;
  };

  AuxLossResult r = one_pass(batch.x1, batch.x2);
  if (cfg.symmetrized) {
    AuxLossResult s = one_pass(batch.x2, batch.x1);
    r.l_pre = ad::scalar_mul(ad::add(r.l_pre, s.l_pre), 0.5);
    r.l_con = (cfg.mode == Mode::Contrastive)
                  ? ad::scalar(0.0)
                  : ad::scalar_mul(ad::add(r.l_con, s.l_con), 0.5);
  }
  return r;
}

TotalLoss total_loss(const ad::Tensor& l_rl, const AuxLossResult& aux, const LossConfig& cfg) {
  if (!l_rl.is_scalar() || !aux.l_pre.is_scalar() || !aux.l_con.is_scalar())
    throw std::invalid_argument("total_loss: components must be scalars");
  const double lambda = cfg.effective_lambda();

  TotalLoss out;
  out.report.l_rl = l_rl.value();
  out.report.l_pre = aux.l_pre.value();
  out.report.l_con = aux.l_con.value();
  for (auto [v, name] : {std::pair{out.report.l_rl, "l_rl"},
                         std::pair{out.report.l_pre, "l_pre"},
                         std::pair{out.report.l_con, "l_con"}})
    if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite ") + name);

  if (cfg.mode == Mode::Contrastive) {
    out.total = ad::add(l_rl, aux.l_pre);
  } else {
    out.total = ad::add(l_rl, ad::add(aux.l_pre, ad::scalar_mul(aux.l_con, lambda)));
  }
  out.report.l_total = out.total.value();
  return out;
}

GradScopeReport inspect_term_gradients(const net::NetworkStack& stack_in, const LossConfig& cfg,
                                       const AuxBatch& batch) {
  net::NetworkStack stack = stack_in;
  ad::detach_all(stack.online);
  ad::detach_all(stack.target);
  ad::Tape tape;
  ad::watch_all(tape, stack.online);

  AuxLossResult aux = aux_losses(stack, cfg, batch);
  ad::Tensor con_term = ad::scalar_mul(aux.l_con, cfg.effective_lambda());

  auto any_nonzero = [&](ad::Gradients& g, const char* prefix) {
    for (auto& [name, t] : stack.online)
      if (name.rfind(prefix, 0) == 0 && g.nonzero(t)) return true;
    return false;
  };

  GradScopeReport rep;
  ad::Gradients gpre = tape.backward(aux.l_pre);
  rep.pre_encoder = any_nonzero(gpre, "encoder/");
  rep.pre_dynamics = any_nonzero(gpre, "dynamics/");
  if (con_term.tape != nullptr) {
    ad::Gradients gcon = tape.backward(con_term);
    rep.con_encoder = any_nonzero(gcon, "encoder/");
    rep.con_dynamics = any_nonzero(gcon, "dynamics/");
  }
  return rep;
}

}  // namespace vcd::loss
