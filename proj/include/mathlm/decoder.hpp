// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mathlm/segment.hpp"
#include "mathlm/tree.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

// Set of token ids over the unified vocabulary.
class TokenMask {
 public:
  TokenMask() = default;
  explicit TokenMask(int size) : bits_(static_cast<std::size_t>(size), 0) {}

  int size() const noexcept { return static_cast<int>(bits_.size()); }
  bool allowed(int id) const { return id >= 0 && id < size() && bits_[static_cast<std::size_t>(id)] != 0; }
  void allow(int id) { bits_.at(static_cast<std::size_t>(id)) = 1; }
  void deny(int id) { bits_.at(static_cast<std::size_t>(id)) = 0; }
  void allow(const IdRange& r) {
    for (int id = r.begin; id < r.end; ++id) allow(id);
  }
  int count() const;
  std::vector<int> ids() const;
  bool any() const { return count() > 0; }

  friend bool operator==(const TokenMask&, const TokenMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

enum class DecoderMode { Text, MathTree, NumChildren, OovChildren, AwaitFormulaEnd };

// Generation automaton state. Inside a formula, `current` is the tree
// position the next emitted node will occupy and depth() == stack.size().
struct DecoderState {
  struct Frame {
    TokenKind kind;      // Operator, NumHead or OovHead
    int children = 0;    // non-End children emitted so far
    bool has_point = false;  // number sub-trees: '.' already emitted
    friend bool operator==(const Frame&, const Frame&) = default;
  };

  DecoderMode mode = DecoderMode::Text;
  std::vector<Frame> stack;
  TreePosition current;
  bool after_formula_end = false;  // the previous token was F^e
  std::optional<TokenKind> last_kind;

  int depth() const noexcept { return static_cast<int>(stack.size()); }
  bool in_formula() const noexcept { return mode != DecoderMode::Text; }
  // Position of the next token when it is a tree node, else nullopt.
  std::optional<TreePosition> next_position() const;

  friend bool operator==(const DecoderState&, const DecoderState&) = default;
};

// Legal next tokens:
//  1. text is followed by text or F^s (F^s cannot directly follow F^e);
//  2. F^s is followed by an operator, variable or number token, or O^N / O^U;
//  3. F^e is followed by text;
//  4. tree tokens are followed by tree tokens until the tree is complete, then F^e;
//  5. no parent tokens at depth kMaxTreeDepth, and only End as the last allowed child;
//  6. O^U children are text tokens, O^N children are digits; End closes either.
// A parent needs at least one child before End, a number holds at most one
// '.', and '.' is never a standalone leaf.
TokenMask allowed_next(const DecoderState& state, const Vocabulary& vocab);

// Position of the node after one emitted at `current`: first child for parent
// kinds, next sibling for leaves, the parent's next sibling for End.
TreePosition infer_next_position(const TreePosition& current, TokenKind emitted);

// Consumes one token. Throws IllegalToken when `id` is not allowed.
DecoderState step(const DecoderState& state, int id, const Vocabulary& vocab);
void advance(DecoderState& state, int id, const Vocabulary& vocab);

// Kind the automaton assigns to `id` in `state` (text ids under O^U are MathText).
TokenKind token_kind_in(const DecoderState& state, int id, const Vocabulary& vocab);

// Runs the automaton over a whole sequence. masks[i] is the allowed set after
// consuming tokens [0, i]. Throws IllegalToken on the first violation.
std::vector<TokenMask> sequence_masks(const EncodedSequence& seq, const Vocabulary& vocab);
DecoderState replay(const EncodedSequence& seq, const Vocabulary& vocab);

}  // namespace mathlm
