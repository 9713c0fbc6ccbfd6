// SPDX-License-Identifier: Apache-2.0
#include "mathlm/latex_printer.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "mathlm/errors.hpp"
#include "mathlm/latex_parser.hpp"
#include "mathlm/normalize.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

namespace {

// Binding strength, loosest first; mirrors the parser's grammar levels.
enum Level : int { kRelation = 1, kAdditive, kMultiplicative, kNegation, kImplicit, kPower, kAtom };

struct Printed {
  std::string text;
  int level;
};

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_numeric(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.'; }

// Joins two fragments, inserting a space where the lexer would otherwise fuse
// them (two letter runs, or two numbers).
std::string join(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty()) return a + b;
  char x = a.back(), y = b.front();
  if ((is_letter(x) && is_letter(y)) || (is_numeric(x) && is_numeric(y))) return a + " " + b;
  return a + b;
}

Printed wrap(Printed p, int min_level) {
  if (p.level >= min_level) return p;
  return {"(" + p.text + ")", kAtom};
}

bool valid_number_spelling(const std::string& s) {
  std::size_t i = 0;
  auto digits = [&] {
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    return i > start;
  };
  bool lead = digits();
  if (i < s.size() && s[i] == '.') {
    ++i;
    if (!digits()) return false;
  } else if (!lead) {
    return false;
  }
  return i == s.size();
}

bool valid_identifier(const std::string& s) {
  std::size_t i = 0;
  if (i < s.size() && s[i] == '\\') ++i;
  std::size_t start = i;
  while (i < s.size() && is_letter(s[i])) ++i;
  if (i == start) return false;
  if (i == s.size()) return true;
  if (s[i] != '_') return false;
  ++i;
  if (i + 1 == s.size()) return std::isalnum(static_cast<unsigned char>(s[i])) != 0;
  if (i >= s.size() || s[i] != '{' || s.back() != '}') return false;
  for (std::size_t k = i + 1; k + 1 < s.size(); ++k)
    if (!std::isalnum(static_cast<unsigned char>(s[k]))) return false;
  return s.size() - i > 2;
}

// Multi-letter names are wrapped so that juxtaposition cannot merge them with
// a neighbouring letter.
std::string identifier(const std::string& s) {
  if (s.empty() || s[0] == '\\') return s;
  std::size_t letters = 0;
  while (letters < s.size() && is_letter(s[letters])) ++letters;
  if (letters < 2) return s;
  return "\\operatorname{" + s.substr(0, letters) + "}" + s.substr(letters);
}

class Printer {
 public:
  explicit Printer(const PrintOptions& options) : options_(options) {}

  Printed print(const OptNode& node) const {
    const Token& tok = node.token;
    switch (tok.kind) {
      case TokenKind::Variable:
        if (!node.children.empty()) throw UnprintableNode("variable with children");
        if (!valid_identifier(tok.symbol)) throw UnprintableNode("'" + tok.symbol + "' is not an identifier");
        return {identifier(tok.symbol), kAtom};
      case TokenKind::Number:
      case TokenKind::Digit:
        if (!node.children.empty()) throw UnprintableNode("number with children");
        if (!valid_number_spelling(tok.symbol)) throw UnprintableNode("'" + tok.symbol + "' is not a number");
        return {tok.symbol, kAtom};
      case TokenKind::NumHead: {
        operands_checked(node);
        std::string s = spelled_symbol(node);
        if (!valid_number_spelling(s)) throw UnprintableNode("number sub-tree spells '" + s + "'");
        return {s, kAtom};
      }
      case TokenKind::OovHead: {
        operands_checked(node);
        std::string s = spelled_symbol(node);
        if (!valid_identifier(s)) throw UnprintableNode("'" + s + "' is not an identifier");
        return {identifier(s), kAtom};
      }
      case TokenKind::Operator:
        return operator_node(node);
      default:
        throw UnprintableNode("token kind " + std::string(kind_name(tok.kind)) + " in a tree");
    }
  }

 private:
  // Children without the trailing End; End elsewhere is malformed.
  static std::vector<const OptNode*> operands_checked(const OptNode& node) {
    std::vector<const OptNode*> out;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const OptNode& c = node.children[i];
      if (c.token.kind == TokenKind::End) {
        if (i + 1 != node.children.size()) throw UnprintableNode("End node before the last child");
        continue;
      }
      out.push_back(&c);
    }
    return out;
  }

  Printed operator_node(const OptNode& node) const {
    const std::string& s = node.token.symbol;
    auto args = operands_checked(node);
    auto arity = [&](std::size_t n) {
      if (args.size() != n)
        throw UnprintableNode("operator '" + s + "' with " + std::to_string(args.size()) + " operands");
    };

    if (is_relation_symbol(s)) {
      arity(2);
      Printed l = wrap(print(*args[0]), kRelation), r = wrap(print(*args[1]), kAdditive);
      return {join(join(l.text, s), r.text), kRelation};
    }
    if (s == "-" && args.size() == 1) {
      Printed x = wrap(print(*args[0]), kNegation);
      return {"-" + x.text, kNegation};
    }
    if (s == "+" || s == "-" || s == "\\pm") {
      arity(2);
      Printed l = wrap(print(*args[0]), kAdditive), r = wrap(print(*args[1]), kMultiplicative);
      return {join(join(l.text, s), r.text), kAdditive};
    }
    if (s == "*") {
      arity(2);
      Printed l = print(*args[0]), r = print(*args[1]);
      char first = r.text.empty() ? '\0' : r.text.front();
      bool juxtapose = l.level >= kImplicit && r.level >= kPower && (is_letter(first) || first == '\\' || first == '(');
      if (juxtapose) return {join(l.text, r.text), kImplicit};
      l = wrap(std::move(l), kMultiplicative);
      r = wrap(std::move(r), kNegation);
      return {join(join(l.text, "\\times"), r.text), kMultiplicative};
    }
    if (s == "/") {
      arity(2);
      if (options_.use_frac)
        return {"\\frac{" + print(*args[0]).text + "}{" + print(*args[1]).text + "}", kAtom};
      Printed l = wrap(print(*args[0]), kMultiplicative), r = wrap(print(*args[1]), kNegation);
      return {l.text + "/" + r.text, kMultiplicative};
    }
    if (s == "^") {
      arity(2);
      Printed base = wrap(print(*args[0]), kAtom);
      std::string e = print(*args[1]).text;
      return {base.text + (e.size() == 1 ? "^" + e : "^{" + e + "}"), kPower};
    }
    if (s == "\\sqrt") {
      if (args.size() == 1) return {"\\sqrt{" + print(*args[0]).text + "}", kAtom};
      arity(2);
      return {"\\sqrt[" + print(*args[1]).text + "]{" + print(*args[0]).text + "}", kAtom};
    }
    if (is_function_symbol(s)) {
      arity(1);
      return {s + "(" + print(*args[0]).text + ")", kPower};
    }
    throw UnprintableNode("operator '" + s + "' has no LaTeX form");
  }

  const PrintOptions& options_;
};

}  // namespace

std::string tree_to_latex(const OptNode& tree, const PrintOptions& options) { return Printer(options).print(tree).text; }

}  // namespace mathlm
