// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "mathlm/decoder.hpp"
#include "mathlm/params.hpp"

namespace mathlm {

struct LossResult {
  double sum = 0.0;  // total negative log-likelihood
  int count = 0;     // number of scored rows
  Matrix d_sum;      // gradient of `sum` w.r.t. the logits

  double mean() const noexcept { return count > 0 ? sum / count : 0.0; }
};

// Cross-entropy with the softmax restricted to each row's allowed ids.
// logits.row(i) predicts targets[i] under masks[i]. Throws MaskedTarget when a
// target lies outside its mask and ShapeMismatch on size disagreement.
LossResult masked_loss_with_grad(const Matrix& logits, std::span<const int> targets, std::span<const TokenMask> masks,
                                 bool want_grad = true);

// Mean over rows.
double masked_loss(const Matrix& logits, std::span<const int> targets, std::span<const TokenMask> masks);

// Log-probabilities of one logit row restricted to `mask` (-inf elsewhere).
RowVector masked_log_softmax(const RowVector& logits, const TokenMask& mask);

}  // namespace mathlm
