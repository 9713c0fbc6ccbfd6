// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mathlm {

// Maximum tree depth (path length of the deepest node) and per-node child
// count, the End child included.
inline constexpr int kMaxTreeDepth = 32;
inline constexpr int kMaxChildren = 64;

enum class TokenKind : std::uint8_t {
  Text,          // plain text outside any formula
  Operator,
  Variable,
  Number,        // raw multi-character number, or a whole-number token when number sub-trees are off
  Digit,         // one of 0-9 or '.'
  End,
  StartFormula,
  EndFormula,
  NumHead,
  OovHead,
  MathText,      // text token under an OovHead
};

// Symbol type used for the type embedding.
enum class TypeTag : std::uint8_t { Text, Operator, Variable, Number, End, Control };
inline constexpr int kNumTypeTags = 6;

struct Token {
  TokenKind kind = TokenKind::Text;
  std::string symbol;

  friend bool operator==(const Token&, const Token&) = default;
};

inline Token make_token(TokenKind kind, std::string symbol = {}) { return Token{kind, std::move(symbol)}; }

// Kinds that open a child list in an operator tree.
constexpr bool is_parent_kind(TokenKind k) {
  return k == TokenKind::Operator || k == TokenKind::NumHead || k == TokenKind::OovHead;
}

constexpr bool is_leaf_kind(TokenKind k) {
  return k == TokenKind::Variable || k == TokenKind::Number || k == TokenKind::Digit ||
         k == TokenKind::MathText;
}

constexpr bool is_tree_kind(TokenKind k) { return is_parent_kind(k) || is_leaf_kind(k) || k == TokenKind::End; }

constexpr TypeTag type_tag_of(TokenKind k) {
  switch (k) {
    case TokenKind::Text:
    case TokenKind::MathText:
      return TypeTag::Text;
    case TokenKind::Operator:
    case TokenKind::NumHead:
    case TokenKind::OovHead:
      return TypeTag::Operator;
    case TokenKind::Variable:
      return TypeTag::Variable;
    case TokenKind::Number:
    case TokenKind::Digit:
      return TypeTag::Number;
    case TokenKind::End:
      return TypeTag::End;
    case TokenKind::StartFormula:
    case TokenKind::EndFormula:
      return TypeTag::Control;
  }
  return TypeTag::Control;
}

std::string_view kind_name(TokenKind k);
std::string_view type_tag_name(TypeTag t);

// Human-readable rendering, e.g. `+`, `<E>`, `<O^N>`.
std::string display(const Token& t);

}  // namespace mathlm
