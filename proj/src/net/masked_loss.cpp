// SPDX-License-Identifier: Apache-2.0
#include "mathlm/masked_loss.hpp"

#include <cmath>
#include <limits>

#include "mathlm/errors.hpp"

namespace mathlm {

RowVector masked_log_softmax(const RowVector& logits, const TokenMask& mask) {
  if (mask.size() != logits.size()) throw ShapeMismatch("mask width differs from logit width");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double mx = kNegInf;
  for (Eigen::Index j = 0; j < logits.size(); ++j)
    if (mask.allowed(static_cast<int>(j))) mx = std::max(mx, logits[j]);
  RowVector out = RowVector::Constant(logits.size(), kNegInf);
  if (mx == kNegInf) return out;
  double total = 0.0;
  for (Eigen::Index j = 0; j < logits.size(); ++j)
    if (mask.allowed(static_cast<int>(j))) total += std::exp(logits[j] - mx);
  const double lse = mx + std::log(total);
  for (Eigen::Index j = 0; j < logits.size(); ++j)
    if (mask.allowed(static_cast<int>(j))) out[j] = logits[j] - lse;
  return out;
}

LossResult masked_loss_with_grad(const Matrix& logits, std::span<const int> targets, std::span<const TokenMask> masks,
                                 bool want_grad) {
  const auto R = logits.rows();
  if (static_cast<std::size_t>(R) != targets.size() || targets.size() != masks.size())
    throw ShapeMismatch("logits, targets and masks disagree in length");
  LossResult r;
  r.count = static_cast<int>(R);
  if (want_grad) r.d_sum = Matrix::Zero(R, logits.cols());
  for (Eigen::Index i = 0; i < R; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const int t = targets[ui];
    if (!masks[ui].allowed(t))
      throw MaskedTarget("target id " + std::to_string(t) + " at row " + std::to_string(i) + " is outside its mask");
    RowVector lp = masked_log_softmax(logits.row(i), masks[ui]);
    r.sum -= lp[t];
    if (want_grad) {
      for (Eigen::Index j = 0; j < lp.size(); ++j)
        if (masks[ui].allowed(static_cast<int>(j))) r.d_sum(i, j) = std::exp(lp[j]);
      r.d_sum(i, t) -= 1.0;
    }
  }
  return r;
}

double masked_loss(const Matrix& logits, std::span<const int> targets, std::span<const TokenMask> masks) {
  return masked_loss_with_grad(logits, targets, masks, false).mean();
}

}  // namespace mathlm
