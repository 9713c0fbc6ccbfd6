// SPDX-License-Identifier: Apache-2.0
// Small models and a central finite-difference gradient check.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>

#include "mathlm/decoder.hpp"
#include "mathlm/masked_loss.hpp"
#include "mathlm/transformer.hpp"

namespace mathlm::testing {

inline ModelConfig tiny_config(int d = 16, int layers = 1, std::uint64_t seed = 1) {
  ModelConfig c;
  c.d_model = d;
  c.n_layers = layers;
  c.n_heads = 2;
  c.d_ff = 2 * d;
  c.max_seq = 64;
  c.seed = seed;
  return c;
}

// Next-token loss (sum) of the whole sequence under the decoder masks.
struct SequenceLoss {
  EncodedSequence input;
  std::vector<int> targets;
  std::vector<TokenMask> masks;

  SequenceLoss(const EncodedSequence& seq, const Vocabulary& vocab) {
    std::vector<TokenMask> all = sequence_masks(seq, vocab);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      input.push(seq.ids[i], seq.types[i], seq.positions[i]);
      targets.push_back(seq.ids[i + 1]);
      masks.push_back(all[i]);
    }
  }

  double value(const Transformer& m) const {
    return masked_loss_with_grad(m.forward(input), targets, masks, false).sum;
  }

  // Fills the model's gradients; returns the loss.
  double gradient(Transformer& m) const {
    m.zero_grad();
    ForwardCache cache;
    Matrix logits = m.forward_train(input, 0, cache, nullptr);
    LossResult r = masked_loss_with_grad(logits, targets, masks);
    m.backward(cache, r.d_sum);
    return r.sum;
  }
};

// Every parameter redrawn from N(0, stddev) so no gradient is vanishingly small.
inline void randomize_params(Transformer& m, std::uint64_t seed, double stddev) {
  Rng rng(seed);
  m.for_each_param(ParamVisitor([&](const std::string&, Param& p) { p.init_normal(rng, stddev); }));
}

// Relative error |a - n| / max(|a|, |n|, floor).
inline double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Largest relative error per parameter tensor over every entry.
inline std::map<std::string, double> gradient_check(Transformer& m, const SequenceLoss& loss, double h, double floor) {
  loss.gradient(m);
  std::map<std::string, Matrix> analytic;
  m.for_each_param(ParamVisitor([&](const std::string& name, Param& p) { analytic[name] = p.grad; }));
  std::map<std::string, double> worst;
  m.for_each_param(ParamVisitor([&](const std::string& name, Param& p) {
    double w = 0.0;
    const Matrix& a = analytic[name];
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      double keep = p.value.data()[k];
      p.value.data()[k] = keep + h;
      double up = loss.value(m);
      p.value.data()[k] = keep - h;
      double down = loss.value(m);
      p.value.data()[k] = keep;
      w = std::max(w, relative_error(a.data()[k], (up - down) / (2 * h), floor));
    }
    worst[name] = w;
  }));
  return worst;
}

}  // namespace mathlm::testing
