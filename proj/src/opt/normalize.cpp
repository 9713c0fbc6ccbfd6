// SPDX-License-Identifier: Apache-2.0
#include "mathlm/normalize.hpp"

#include "mathlm/errors.hpp"

namespace mathlm {

namespace {

class Normalizer {
 public:
  Normalizer(const MathVocab& math, const TextVocab& text, const NormalizeOptions& options)
      : math_(math), text_(text), options_(options) {}

  OptNode visit(const OptNode& node) const {
    const Token& tok = node.token;
    switch (tok.kind) {
      case TokenKind::Operator: {
        if (!math_.has_operator(tok.symbol))
          throw VocabError("operator '" + tok.symbol + "' is not in the math vocabulary");
        OptNode out(tok);
        for (const auto& c : node.children)
          if (c.token.kind != TokenKind::End) out.children.push_back(visit(c));
        out.children.push_back(end_node());
        return out;
      }
      case TokenKind::Variable:
        if (math_.has_variable(tok.symbol)) return OptNode(tok);
        return oov_subtree(tok.symbol);
      case TokenKind::Number:
        return number(tok.symbol);
      case TokenKind::NumHead:
      case TokenKind::OovHead:
      case TokenKind::Digit:
      case TokenKind::MathText:
      case TokenKind::End:
        return node;
      default:
        throw InvalidTraversal("token kind " + std::string(kind_name(tok.kind)) + " inside a formula tree");
    }
  }

 private:
  OptNode number(const std::string& symbol) const {
    if (symbol.size() == 1) return OptNode(make_token(TokenKind::Digit, symbol));
    if (!options_.number_subtrees && math_.has_number(symbol)) return OptNode(make_token(TokenKind::Number, symbol));
    OptNode head(make_token(TokenKind::NumHead));
    for (char c : symbol) head.children.push_back(digit(c));
    head.children.push_back(end_node());
    return head;
  }

  OptNode oov_subtree(const std::string& symbol) const {
    OptNode head(make_token(TokenKind::OovHead));
    for (int id : text_.tokenize(symbol)) head.children.push_back(OptNode(make_token(TokenKind::MathText, text_.token(id))));
    head.children.push_back(end_node());
    return head;
  }

  const MathVocab& math_;
  const TextVocab& text_;
  const NormalizeOptions& options_;
};

}  // namespace

OptNode normalize_tree(const OptNode& raw, const MathVocab& math, const TextVocab& text,
                       const NormalizeOptions& options) {
  OptNode out = Normalizer(math, text, options).visit(raw);
  check_caps(out);
  return out;
}

std::string spelled_symbol(const OptNode& head) {
  std::string s;
  for (const auto& c : head.children)
    if (c.token.kind != TokenKind::End) s += c.token.symbol;
  return s;
}

OptNode collapse_number_subtrees(const OptNode& tree) {
  if (tree.token.kind == TokenKind::NumHead) return OptNode(make_token(TokenKind::Number, spelled_symbol(tree)));
  OptNode out(tree.token);
  out.children.reserve(tree.children.size());
  for (const auto& c : tree.children) out.children.push_back(collapse_number_subtrees(c));
  return out;
}

}  // namespace mathlm
