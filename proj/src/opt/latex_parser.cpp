// SPDX-License-Identifier: Apache-2.0
#include "mathlm/latex_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "mathlm/errors.hpp"

namespace mathlm {

namespace {

constexpr std::array kFunctions = {"sin",  "cos",    "tan",    "cot",    "sec",  "csc",  "arcsin", "arccos",
                                   "arctan", "sinh", "cosh", "tanh", "log", "ln", "exp"};

constexpr std::array kGreek = {"alpha", "beta",   "gamma", "delta",   "epsilon", "varepsilon", "zeta",
                               "eta",   "theta",  "vartheta", "iota", "kappa",   "lambda",     "mu",
                               "nu",    "xi",     "pi",    "rho",     "sigma",   "tau",        "upsilon",
                               "phi",   "varphi", "chi",   "psi",     "omega",   "Gamma",      "Delta",
                               "Theta", "Lambda", "Xi",    "Pi",      "Sigma",   "Phi",        "Psi",
                               "Omega"};

constexpr std::array kSpacing = {",", ";", "!", ":", " ", "quad", "qquad"};

template <std::size_t N>
bool contains(const std::array<const char*, N>& arr, std::string_view s) {
  return std::find_if(arr.begin(), arr.end(), [&](const char* a) { return s == a; }) != arr.end();
}

enum class Lex { Number, Ident, Command, Sym, Eof };

struct Lexeme {
  Lex kind;
  std::string text;  // for Sym: the canonical symbol, e.g. "*" for \times
  std::size_t offset;
};

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// UTF-8 operator glyphs accepted as aliases.
struct Glyph {
  std::string_view utf8;
  std::string_view symbol;
};
constexpr std::array kGlyphs = {Glyph{"\xE2\x89\xA4", "\\le"}, Glyph{"\xE2\x89\xA5", "\\ge"},
                                Glyph{"\xE2\x89\xA0", "\\ne"}, Glyph{"\xC3\x97", "*"},
                                Glyph{"\xC3\xB7", "/"},        Glyph{"\xE2\x88\x92", "-"}};

std::vector<Lexeme> lex(std::string_view src) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.' && i + 1 < src.size() && is_digit(src[i + 1])) {
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      out.push_back({Lex::Number, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (is_letter(c)) {
      while (i < src.size() && is_letter(src[i])) ++i;
      out.push_back({Lex::Ident, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (c == '\\') {
      ++i;
      if (i < src.size() && is_letter(src[i])) {
        while (i < src.size() && is_letter(src[i])) ++i;
      } else if (i < src.size()) {
        ++i;  // control symbol such as \, or \{
      } else {
        throw SyntaxError("dangling backslash", start);
      }
      std::string name(src.substr(start + 1, i - start - 1));
      if (contains(kSpacing, name)) continue;
      if (name == "times" || name == "cdot") {
        out.push_back({Lex::Sym, "*", start});
      } else if (name == "div") {
        out.push_back({Lex::Sym, "/", start});
      } else if (name == "le" || name == "leq") {
        out.push_back({Lex::Sym, "\\le", start});
      } else if (name == "ge" || name == "geq") {
        out.push_back({Lex::Sym, "\\ge", start});
      } else if (name == "ne" || name == "neq") {
        out.push_back({Lex::Sym, "\\ne", start});
      } else if (name == "approx" || name == "pm") {
        out.push_back({Lex::Sym, "\\" + name, start});
      } else if (name == "{" || name == "}") {
        out.push_back({Lex::Sym, name, start});
      } else {
        out.push_back({Lex::Command, name, start});
      }
      continue;
    }
    bool matched = false;
    for (const auto& g : kGlyphs) {
      if (src.substr(i, g.utf8.size()) == g.utf8) {
        out.push_back({Lex::Sym, std::string(g.symbol), start});
        i += g.utf8.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static constexpr std::string_view kSingles = "+-*/^=<>(){}[]_";
    if (kSingles.find(c) != std::string_view::npos) {
      out.push_back({Lex::Sym, std::string(1, c), start});
      ++i;
      continue;
    }
    throw SyntaxError(std::string("unexpected character '") + c + "'", start);
  }
  out.push_back({Lex::Eof, "", src.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  OptNode parse() {
    OptNode tree = relation();
    if (peek().kind != Lex::Eof) {
      if (is_sym(")") || is_sym("}") || is_sym("]"))
        throw SyntaxError("unbalanced '" + peek().text + "'", peek().offset);
      throw SyntaxError("unexpected '" + peek().text + "'", peek().offset);
    }
    return tree;
  }

 private:
  const Lexeme& peek() const { return toks_[pos_]; }
  const Lexeme& advance() { return toks_[pos_++]; }
  bool is_sym(std::string_view s) const { return peek().kind == Lex::Sym && peek().text == s; }
  bool is_command(std::string_view s) const { return peek().kind == Lex::Command && peek().text == s; }

  bool accept_sym(std::string_view s) {
    if (!is_sym(s)) return false;
    ++pos_;
    return true;
  }

  void expect_closing(std::string_view close, const Lexeme& open) {
    if (accept_sym(close)) return;
    if (peek().kind == Lex::Eof)
      throw SyntaxError("unbalanced '" + open.text + "'", open.offset);
    throw SyntaxError("expected '" + std::string(close) + "'", peek().offset);
  }

  static OptNode binary(std::string symbol, OptNode lhs, OptNode rhs) {
    std::vector<OptNode> kids;
    kids.push_back(std::move(lhs));
    kids.push_back(std::move(rhs));
    return op(std::move(symbol), std::move(kids));
  }

  static OptNode unary_node(std::string symbol, OptNode arg) {
    std::vector<OptNode> kids;
    kids.push_back(std::move(arg));
    return op(std::move(symbol), std::move(kids));
  }

  OptNode relation() {
    OptNode lhs = additive();
    while (peek().kind == Lex::Sym) {
      const std::string& s = peek().text;
      if (s != "=" && s != "<" && s != ">" && s != "\\le" && s != "\\ge" && s != "\\ne" && s != "\\approx") break;
      std::string symbol = advance().text;
      lhs = binary(std::move(symbol), std::move(lhs), additive());
    }
    return lhs;
  }

  OptNode additive() {
    OptNode lhs = multiplicative();
    while (is_sym("+") || is_sym("-") || is_sym("\\pm")) {
      std::string symbol = advance().text;
      lhs = binary(std::move(symbol), std::move(lhs), multiplicative());
    }
    return lhs;
  }

  OptNode multiplicative() {
    OptNode lhs = unary();
    while (is_sym("*") || is_sym("/")) {
      std::string symbol = advance().text;
      lhs = binary(std::move(symbol), std::move(lhs), unary());
    }
    return lhs;
  }

  OptNode unary() {
    if (accept_sym("-")) return unary_node("-", unary());
    if (accept_sym("+")) return unary();
    return implicit();
  }

  OptNode implicit() {
    OptNode lhs = power();
    while (starts_primary()) lhs = binary("*", std::move(lhs), power());
    return lhs;
  }

  OptNode power() {
    OptNode base = primary();
    if (accept_sym("^")) return binary("^", std::move(base), exponent());
    return base;
  }

  OptNode exponent() {
    if (accept_sym("-")) return unary_node("-", exponent());
    if (accept_sym("+")) return exponent();
    OptNode base = primary();
    if (accept_sym("^")) return binary("^", std::move(base), exponent());
    return base;
  }

  bool starts_primary() const {
    const Lexeme& t = peek();
    switch (t.kind) {
      case Lex::Number:
      case Lex::Ident:
        return true;
      case Lex::Command:
        return t.text != "right";
      case Lex::Sym:
        return t.text == "(" || t.text == "{";
      case Lex::Eof:
        return false;
    }
    return false;
  }

  // Letters-only argument of \operatorname{..}, \mathrm{..}, \text{..}.
  std::string braced_name() {
    const Lexeme& open = peek();
    if (!accept_sym("{")) throw SyntaxError("expected '{'", open.offset);
    std::string name;
    while (peek().kind == Lex::Ident) name += advance().text;
    if (name.empty()) throw SyntaxError("expected a name", peek().offset);
    expect_closing("}", open);
    return name;
  }

  OptNode braced_group() {
    const Lexeme& open = peek();
    if (!accept_sym("{")) throw SyntaxError("expected '{'", open.offset);
    OptNode inner = relation();
    expect_closing("}", open);
    return inner;
  }

  // x_1, x_{12}, \alpha_i
  std::string with_subscript(std::string name) {
    if (!is_sym("_")) return name;
    ++pos_;
    const Lexeme& t = peek();
    if (t.kind == Lex::Number || t.kind == Lex::Ident) {
      ++pos_;
      if (t.text.size() == 1) return name + "_" + t.text;
      // LaTeX reads only the first character of an unbraced subscript.
      --pos_;
      throw SyntaxError("multi-character subscript needs braces", t.offset);
    }
    if (t.kind == Lex::Sym && t.text == "{") {
      const Lexeme& open = advance();
      std::string sub;
      while (peek().kind == Lex::Number || peek().kind == Lex::Ident) sub += advance().text;
      if (sub.empty()) throw SyntaxError("empty subscript", peek().offset);
      expect_closing("}", open);
      return sub.size() == 1 ? name + "_" + sub : name + "_{" + sub + "}";
    }
    throw SyntaxError("expected subscript", t.offset);
  }

  OptNode primary() {
    const Lexeme& t = peek();
    switch (t.kind) {
      case Lex::Number:
        ++pos_;
        return num(t.text);
      case Lex::Ident: {
        ++pos_;
        return var(with_subscript(t.text));
      }
      case Lex::Sym: {
        if (t.text == "(") {
          const Lexeme& open = advance();
          OptNode inner = relation();
          expect_closing(")", open);
          return inner;
        }
        if (t.text == "{") return braced_group();
        if (t.kind == Lex::Sym && (t.text == ")" || t.text == "}"))
          throw SyntaxError("unbalanced '" + t.text + "'", t.offset);
        throw SyntaxError("expected an operand, found '" + t.text + "'", t.offset);
      }
      case Lex::Command:
        return command();
      case Lex::Eof:
        throw SyntaxError("unexpected end of expression", t.offset);
    }
    throw SyntaxError("unreachable", t.offset);
  }

  OptNode command() {
    const Lexeme& t = advance();
    const std::string& name = t.text;
    if (name == "frac" || name == "dfrac" || name == "tfrac") {
      OptNode numer = braced_group();
      OptNode denom = braced_group();
      return binary("/", std::move(numer), std::move(denom));
    }
    if (name == "sqrt") {
      std::optional<OptNode> index;
      if (is_sym("[")) {
        const Lexeme& open = advance();
        index = relation();
        expect_closing("]", open);
      }
      OptNode radicand = braced_group();
      if (index) return binary("\\sqrt", std::move(radicand), std::move(*index));
      return unary_node("\\sqrt", std::move(radicand));
    }
    if (contains(kFunctions, name)) {
      if (!starts_primary()) throw SyntaxError("function \\" + name + " needs an argument", peek().offset);
      return unary_node("\\" + name, power());
    }
    if (contains(kGreek, name)) return var(with_subscript("\\" + name));
    if (name == "operatorname" || name == "mathrm" || name == "text" || name == "mathit")
      return var(with_subscript(braced_name()));
    if (name == "left") {
      const Lexeme& open = peek();
      if (!accept_sym("(")) throw SyntaxError("expected '(' after \\left", open.offset);
      OptNode inner = relation();
      if (!is_command("right")) {
        if (peek().kind == Lex::Eof) throw SyntaxError("unbalanced '\\left('", t.offset);
        throw SyntaxError("expected \\right", peek().offset);
      }
      ++pos_;
      expect_closing(")", open);
      return inner;
    }
    throw SyntaxError("unknown command \\" + name, t.offset);
  }

  std::vector<Lexeme> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_function_symbol(std::string_view symbol) {
  if (symbol == "\\sqrt") return true;
  return symbol.size() > 1 && symbol[0] == '\\' && contains(kFunctions, symbol.substr(1));
}

bool is_relation_symbol(std::string_view symbol) {
  return symbol == "=" || symbol == "<" || symbol == ">" || symbol == "\\le" || symbol == "\\ge" ||
         symbol == "\\ne" || symbol == "\\approx";
}

OptNode parse_math(std::string_view expr) { return Parser(expr).parse(); }

}  // namespace mathlm
