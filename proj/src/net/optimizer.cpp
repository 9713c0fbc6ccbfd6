// SPDX-License-Identifier: Apache-2.0
#include "mathlm/optimizer.hpp"

#include <cmath>
#include <utility>

#include "mathlm/errors.hpp"

namespace mathlm {

OptimizerConfig OptimizerConfig::fine_tune_preset() {
  OptimizerConfig c;
  c.lr = 1e-5;
  return c;
}

nlohmann::json to_json(const OptimizerConfig& c) {
  return {{"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"weight_decay", c.weight_decay},
          {"clip_norm", c.clip_norm},
          {"warmup_steps", c.warmup_steps}};
}

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
  OptimizerConfig c;
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  return c;
}

double AdamW::current_lr() const noexcept {
  if (config_.warmup_steps > 0 && t_ < config_.warmup_steps)
    return config_.lr * static_cast<double>(t_ + 1) / static_cast<double>(config_.warmup_steps);
  return config_.lr;
}

void AdamW::reset(const Transformer& model) {
  m_.clear();
  v_.clear();
  model.for_each_param(ConstParamVisitor([&](const std::string&, const Param& p) {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }));
  t_ = 0;
}

double AdamW::step(Transformer& model) {
  if (m_.empty()) reset(model);
  double sq = 0.0;
  std::as_const(model).for_each_param(
      ConstParamVisitor([&](const std::string&, const Param& p) { sq += p.grad.squaredNorm(); }));
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NonFiniteLoss("gradient norm is not finite");
  const double clip = (config_.clip_norm > 0.0 && norm > config_.clip_norm) ? config_.clip_norm / norm : 1.0;

  const double lr = current_lr();
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  std::size_t i = 0;
  model.for_each_param(ParamVisitor([&](const std::string& name, Param& p) {
    if (i >= m_.size() || m_[i].rows() != p.value.rows() || m_[i].cols() != p.value.cols())
      throw ShapeMismatch("optimizer state does not match parameter " + name);
    Matrix& m = m_[i];
    Matrix& v = v_[i];
    ++i;
    if (lr == 0.0) return;
    Matrix g = p.grad * clip;
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseAbs2();
    if (p.decay && config_.weight_decay > 0.0) p.value *= 1.0 - lr * config_.weight_decay;
    p.value.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config_.eps);
  }));
  return norm;
}

}  // namespace mathlm
