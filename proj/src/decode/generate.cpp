// SPDX-License-Identifier: Apache-2.0
#include "mathlm/generate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mathlm/errors.hpp"
#include "mathlm/masked_loss.hpp"

namespace mathlm {

int closing_cost(const DecoderState& s) {
  switch (s.mode) {
    case DecoderMode::Text: return 0;
    case DecoderMode::AwaitFormulaEnd: return 1;
    default: break;
  }
  if (s.stack.empty()) return 2;  // a root leaf, then F^e
  int cost = 1 + static_cast<int>(s.stack.size());
  if (s.stack.back().children == 0) ++cost;
  return cost;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Allowed ids after the length budget is applied. `remaining` counts the
// tokens that may still be appended.
TokenMask budget_mask(const DecoderState& s, const Vocabulary& vocab, int remaining) {
  TokenMask m = allowed_next(s, vocab);
  if (remaining <= 0) return TokenMask(m.size());
  // Tokens of the same kind lead to states with the same closing cost, so one
  // representative per kind suffices.
  std::vector<std::pair<TokenKind, bool>> verdicts;
  for (int id : m.ids()) {
    TokenKind k = token_kind_in(s, id, vocab);
    auto it = std::find_if(verdicts.begin(), verdicts.end(), [&](const auto& v) { return v.first == k; });
    bool ok;
    if (it != verdicts.end()) {
      ok = it->second;
    } else {
      ok = 1 + closing_cost(step(s, id, vocab)) <= remaining;
      verdicts.emplace_back(k, ok);
    }
    if (!ok) m.deny(id);
  }
  return m;
}

struct Hypothesis {
  InferenceSession session;
  DecoderState state;
  EncodedSequence seq;
  double log_prob = 0.0;
  int formulas = 0;
  bool done = false;
  bool hit_max_len = false;
};

void append(Hypothesis& h, int id, const Vocabulary& vocab, const GenerateOptions& opt, int max_len) {
  TokenKind kind = token_kind_in(h.state, id, vocab);
  std::optional<TreePosition> pos = h.state.next_position();
  if (!is_tree_kind(kind)) pos.reset();
  TypeTag type = type_tag_of(kind);
  advance(h.state, id, vocab);
  h.seq.push(id, type, pos);
  if (kind == TokenKind::EndFormula) ++h.formulas;
  if (opt.max_formulas > 0 && h.formulas >= opt.max_formulas) h.done = true;
  if (static_cast<int>(h.seq.size()) >= max_len) {
    h.done = true;
    h.hit_max_len = true;
  }
  if (!h.done) h.session.push(id, type, pos);
}

// Candidate ids of one row sorted by log-probability, ties toward lower ids.
std::vector<std::pair<double, int>> ranked(const RowVector& lp, const TokenMask& mask) {
  std::vector<std::pair<double, int>> out;
  for (int id : mask.ids()) out.emplace_back(lp[id], id);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  return out;
}

int sample(const RowVector& lp, const TokenMask& mask, const GenerateOptions& opt, Rng& rng) {
  auto cands = ranked(lp, mask);
  if (opt.top_k > 0 && static_cast<int>(cands.size()) > opt.top_k) cands.resize(static_cast<std::size_t>(opt.top_k));
  const double t = opt.temperature > 0.0 ? opt.temperature : 1.0;
  std::vector<double> w;
  for (const auto& [l, id] : cands) w.push_back(std::exp((l - cands.front().first) / t));
  double total = 0.0;
  for (double x : w) total += x;
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return cands[i].second;
    u -= w[i];
  }
  return cands.back().second;
}

}  // namespace

Generation generate(const Transformer& model, const EncodedSequence& prompt, const GenerateOptions& opt) {
  const Vocabulary& vocab = model.vocab();
  const int max_len = std::min(opt.max_len, model.config().max_seq);
  if (prompt.size() == 0) throw IllegalToken("empty prompt");
  if (static_cast<int>(prompt.size()) >= max_len)
    throw LengthExceeded("prompt of " + std::to_string(prompt.size()) + " tokens leaves no room below " +
                         std::to_string(max_len));

  Hypothesis root{InferenceSession(model), DecoderState{}, prompt};
  for (std::size_t i = 0; i < prompt.size(); ++i) {
    advance(root.state, prompt.ids[i], vocab);
    root.session.push(prompt.ids[i], prompt.types[i], prompt.positions[i]);
  }
  if (closing_cost(root.state) > max_len - static_cast<int>(prompt.size()))
    throw LengthExceeded("the open formula cannot close within " + std::to_string(max_len) + " tokens");

  const int width = opt.mode == SearchMode::Beam ? std::max(1, opt.beam_width) : 1;
  Rng rng(opt.seed);
  std::vector<Hypothesis> beams;
  beams.push_back(std::move(root));

  while (std::any_of(beams.begin(), beams.end(), [](const Hypothesis& h) { return !h.done; })) {
    struct Cand {
      double score;
      std::size_t beam;
      int id;
    };
    std::vector<Cand> cands;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const Hypothesis& h = beams[b];
      if (h.done) {
        cands.push_back({h.log_prob, b, -1});
        continue;
      }
      TokenMask mask = budget_mask(h.state, vocab, max_len - static_cast<int>(h.seq.size()));
      if (!mask.any()) throw LengthExceeded("no token fits the remaining length budget");
      RowVector lp = masked_log_softmax(h.session.last_logits(), mask);
      if (opt.mode == SearchMode::Sample) {
        int id = sample(lp, mask, opt, rng);
        cands.push_back({h.log_prob + lp[id], b, id});
        continue;
      }
      auto r = ranked(lp, mask);
      for (std::size_t k = 0; k < r.size() && k < static_cast<std::size_t>(width); ++k)
        cands.push_back({h.log_prob + r[k].first, b, r[k].second});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.score > b.score; });
    if (cands.size() > static_cast<std::size_t>(width)) cands.resize(static_cast<std::size_t>(width));

    std::vector<Hypothesis> next;
    next.reserve(cands.size());
    for (const Cand& c : cands) {
      Hypothesis h = beams[c.beam];
      if (c.id >= 0) {
        h.log_prob = c.score;
        append(h, c.id, vocab, opt, max_len);
      }
      next.push_back(std::move(h));
    }
    beams = std::move(next);
  }

  Hypothesis& best = beams.front();
  Generation g;
  g.seq = std::move(best.seq);
  g.prompt_length = prompt.size();
  g.state = std::move(best.state);
  g.log_prob = best.log_prob;
  g.hit_max_len = best.hit_max_len;
  return g;
}

}  // namespace mathlm
