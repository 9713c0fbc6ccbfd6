// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "mathlm/decoder.hpp"
#include "mathlm/errors.hpp"

namespace mathlm {

int TokenMask::count() const { return static_cast<int>(std::count(bits_.begin(), bits_.end(), 1)); }

std::vector<int> TokenMask::ids() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(static_cast<int>(i));
  return out;
}

std::optional<TreePosition> DecoderState::next_position() const {
  if (mode == DecoderMode::Text || mode == DecoderMode::AwaitFormulaEnd) return std::nullopt;
  return current;
}

namespace {

int point_id(const IdLayout& l) { return l.digits.begin + static_cast<int>(kDigitChars.find('.')); }

void allow_leaves(TokenMask& m, const IdLayout& l) {
  m.allow(l.variables);
  m.allow(l.digits);
  m.deny(point_id(l));
  m.allow(l.numbers);
}

void allow_parents(TokenMask& m, const IdLayout& l) {
  m.allow(l.operators);
  m.allow(l.special(Special::NumHead));
  m.allow(l.special(Special::OovHead));
}

}  // namespace

TokenMask allowed_next(const DecoderState& s, const Vocabulary& vocab) {
  const IdLayout& l = vocab.layout();
  TokenMask m(l.total);
  switch (s.mode) {
    case DecoderMode::Text:
      m.allow(l.text);
      if (!s.after_formula_end) m.allow(l.special(Special::StartFormula));
      return m;
    case DecoderMode::AwaitFormulaEnd:
      m.allow(l.special(Special::EndFormula));
      return m;
    default:
      break;
  }

  const bool parents_fit = static_cast<int>(s.current.depth()) < kMaxTreeDepth;
  if (s.stack.empty()) {
    allow_leaves(m, l);
    if (parents_fit) allow_parents(m, l);
    return m;
  }

  const DecoderState::Frame& top = s.stack.back();
  const int end_id = l.special(Special::End);
  if (top.children >= kMaxChildren - 1) {
    m.allow(end_id);
    return m;
  }
  if (top.children >= 1) m.allow(end_id);
  switch (s.mode) {
    case DecoderMode::NumChildren:
      m.allow(l.digits);
      if (top.has_point) m.deny(point_id(l));
      break;
    case DecoderMode::OovChildren:
      m.allow(l.text);
      break;
    default:
      allow_leaves(m, l);
      if (parents_fit) allow_parents(m, l);
      break;
  }
  return m;
}

TreePosition infer_next_position(const TreePosition& current, TokenKind emitted) {
  if (is_parent_kind(emitted)) return current.child(0);
  if (emitted == TokenKind::End) return current.parent().next_sibling();
  return current.next_sibling();
}

TokenKind token_kind_in(const DecoderState& state, int id, const Vocabulary& vocab) {
  TokenKind k = vocab.kind_of(id);
  if (k == TokenKind::Text && state.mode == DecoderMode::OovChildren) return TokenKind::MathText;
  return k;
}

namespace {

DecoderMode mode_for_top(const DecoderState& s) {
  if (s.stack.empty()) return DecoderMode::AwaitFormulaEnd;
  switch (s.stack.back().kind) {
    case TokenKind::NumHead: return DecoderMode::NumChildren;
    case TokenKind::OovHead: return DecoderMode::OovChildren;
    default: return DecoderMode::MathTree;
  }
}

}  // namespace

void advance(DecoderState& s, int id, const Vocabulary& vocab) {
  if (!allowed_next(s, vocab).allowed(id)) {
    std::string where = s.in_formula() ? " at tree position " + s.current.to_string() : std::string(" in text");
    throw IllegalToken("token id " + std::to_string(id) + " (" + display(vocab.token_of(id)) + ") not allowed" + where);
  }
  const TokenKind kind = token_kind_in(s, id, vocab);
  s.last_kind = kind;

  switch (kind) {
    case TokenKind::Text:
      s.after_formula_end = false;
      return;
    case TokenKind::StartFormula:
      s.mode = DecoderMode::MathTree;
      s.stack.clear();
      s.current = TreePosition{};
      return;
    case TokenKind::EndFormula:
      s.mode = DecoderMode::Text;
      s.after_formula_end = true;
      s.current = TreePosition{};
      return;
    default:
      break;
  }

  if (kind == TokenKind::End) {
    s.stack.pop_back();
    s.current = infer_next_position(s.current, kind);
    if (!s.stack.empty()) ++s.stack.back().children;  // the closed sub-tree
    s.mode = mode_for_top(s);
    if (s.stack.empty()) s.current = TreePosition{};
    return;
  }

  if (is_parent_kind(kind)) {
    s.stack.push_back({kind, 0, false});
    s.current = infer_next_position(s.current, kind);
    s.mode = mode_for_top(s);
    return;
  }

  // Leaf.
  if (s.stack.empty()) {
    s.mode = DecoderMode::AwaitFormulaEnd;
    return;
  }
  DecoderState::Frame& top = s.stack.back();
  ++top.children;
  if (kind == TokenKind::Digit && vocab.token_of(id).symbol == ".") top.has_point = true;
  s.current = infer_next_position(s.current, kind);
}

DecoderState step(const DecoderState& state, int id, const Vocabulary& vocab) {
  DecoderState next = state;
  advance(next, id, vocab);
  return next;
}

std::vector<TokenMask> sequence_masks(const EncodedSequence& seq, const Vocabulary& vocab) {
  std::vector<TokenMask> masks;
  masks.reserve(seq.size());
  DecoderState s;
  for (int id : seq.ids) {
    advance(s, id, vocab);
    masks.push_back(allowed_next(s, vocab));
  }
  return masks;
}

DecoderState replay(const EncodedSequence& seq, const Vocabulary& vocab) {
  DecoderState s;
  for (int id : seq.ids) advance(s, id, vocab);
  return s;
}

}  // namespace mathlm
