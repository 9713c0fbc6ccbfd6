// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <vector>

#include "mathlm/transformer.hpp"

namespace mathlm {

struct OptimizerConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double clip_norm = 1.0;  // global gradient norm cap, 0 disables
  int warmup_steps = 0;

  // Learning rate from the original fine-tuning recipe.
  static OptimizerConfig fine_tune_preset();
};

nlohmann::json to_json(const OptimizerConfig& c);
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

// AdamW with decoupled weight decay, applied only to parameters marked `decay`.
class AdamW {
 public:
  explicit AdamW(OptimizerConfig config = {}) : config_(config) {}

  const OptimizerConfig& config() const noexcept { return config_; }
  long step_count() const noexcept { return t_; }
  double current_lr() const noexcept;

  // Applies one update from the accumulated gradients. Returns the gradient
  // norm before clipping.
  double step(Transformer& model);

  std::vector<Matrix>& first_moments() noexcept { return m_; }
  std::vector<Matrix>& second_moments() noexcept { return v_; }
  const std::vector<Matrix>& first_moments() const noexcept { return m_; }
  const std::vector<Matrix>& second_moments() const noexcept { return v_; }
  void set_step_count(long t) noexcept { t_ = t; }
  // Allocates zero moments matching the model's parameters.
  void reset(const Transformer& model);

 private:
  OptimizerConfig config_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

}  // namespace mathlm
