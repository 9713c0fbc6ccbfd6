// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>

namespace mathlm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Rng = std::mt19937_64;

// A trainable tensor with its gradient accumulator. An empty value marks a
// parameter disabled by an ablation flag.
struct Param {
  Matrix value;
  Matrix grad;
  bool decay = true;  // subject to decoupled weight decay

  Param() = default;
  Param(Eigen::Index rows, Eigen::Index cols, bool decay_ = true)
      : value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)), decay(decay_) {}

  bool empty() const noexcept { return value.size() == 0; }
  void zero_grad() { grad.setZero(); }
  void init_normal(Rng& rng, double stddev);
};

using ParamVisitor = std::function<void(const std::string& name, Param& p)>;
using ConstParamVisitor = std::function<void(const std::string& name, const Param& p)>;

}  // namespace mathlm
