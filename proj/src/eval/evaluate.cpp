// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cstdlib>
#include <set>

#include "mathlm/errors.hpp"
#include "mathlm/eval.hpp"
#include "mathlm/normalize.hpp"

namespace mathlm {

namespace {

constexpr int kMaxExponent = 64;

// Children other than End.
std::vector<const OptNode*> operands(const OptNode& n) {
  std::vector<const OptNode*> out;
  for (const OptNode& c : n.children)
    if (c.token.kind != TokenKind::End) out.push_back(&c);
  return out;
}

Rational eval(const OptNode& n, const std::map<std::string, Rational>& env) {
  switch (n.token.kind) {
    case TokenKind::Digit:
    case TokenKind::Number:
      return parse_decimal(n.token.symbol);
    case TokenKind::NumHead:
      return parse_decimal(spelled_symbol(n));
    case TokenKind::Variable:
    case TokenKind::OovHead: {
      std::string name = n.token.kind == TokenKind::OovHead ? spelled_symbol(n) : n.token.symbol;
      auto it = env.find(name);
      if (it == env.end()) throw UnboundVariable("'" + name + "' has no value");
      return it->second;
    }
    case TokenKind::Operator:
      break;
    default:
      throw UnsupportedOperator("cannot evaluate " + display(n.token));
  }

  const std::string& s = n.token.symbol;
  auto args = operands(n);
  auto arg = [&](std::size_t i) { return eval(*args[i], env); };
  if (s == "+" && !args.empty()) {
    Rational r = 0;
    for (std::size_t i = 0; i < args.size(); ++i) r += arg(i);
    return r;
  }
  if (s == "*" && !args.empty()) {
    Rational r = 1;
    for (std::size_t i = 0; i < args.size(); ++i) r *= arg(i);
    return r;
  }
  if (s == "-" && args.size() == 1) return -arg(0);
  if (s == "-" && args.size() == 2) return arg(0) - arg(1);
  if (s == "/" && args.size() == 2) {
    Rational den = arg(1);
    if (den == 0) throw DivisionByZero("division by zero");
    return arg(0) / den;
  }
  if (s == "^" && args.size() == 2) {
    Rational base = arg(0);
    Rational e = arg(1);
    if (boost::multiprecision::denominator(e) != 1) throw UnsupportedOperator("non-integer exponent");
    auto ei = boost::multiprecision::numerator(e);
    if (ei > kMaxExponent || ei < -kMaxExponent) throw UnsupportedOperator("exponent too large");
    int k = ei.convert_to<int>();
    if (k < 0 && base == 0) throw DivisionByZero("zero to a negative power");
    Rational r = 1;
    for (int i = 0; i < std::abs(k); ++i) r *= base;
    return k < 0 ? Rational(1) / r : r;
  }
  throw UnsupportedOperator("operator '" + s + "' with " + std::to_string(args.size()) + " operands");
}

void collect_variables(const OptNode& n, std::set<std::string>& out) {
  if (n.token.kind == TokenKind::Variable) {
    out.insert(n.token.symbol);
    return;
  }
  if (n.token.kind == TokenKind::OovHead) {
    out.insert(spelled_symbol(n));
    return;
  }
  for (const OptNode& c : n.children) collect_variables(c, out);
}

}  // namespace

Rational parse_decimal(std::string_view text) {
  if (!is_number_literal(text)) throw UnsupportedOperator("'" + std::string(text) + "' is not a number");
  std::string digits;
  int scale = 0;
  bool after_point = false;
  for (char c : text) {
    if (c == '.') {
      after_point = true;
      continue;
    }
    digits.push_back(c);
    if (after_point) ++scale;
  }
  // cpp_int reads a leading 0 as an octal prefix.
  std::size_t nz = digits.find_first_not_of('0');
  digits = nz == std::string::npos ? "0" : digits.substr(nz);
  boost::multiprecision::cpp_int num(digits);
  boost::multiprecision::cpp_int den = boost::multiprecision::pow(boost::multiprecision::cpp_int(10), scale);
  return Rational(num, den);
}

Rational evaluate_expression(const OptNode& tree, const std::map<std::string, Rational>& bindings) {
  return eval(tree, bindings);
}

std::vector<std::string> free_variables(const OptNode& tree) {
  std::set<std::string> names;
  collect_variables(tree, names);
  return {names.begin(), names.end()};
}

namespace {

// Polynomials in the unknown, lowest degree first, and ratios of them.
using Poly = std::vector<Rational>;

Poly trimmed(Poly p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
  return p;
}

Poly add(const Poly& a, const Poly& b, int sign = 1) {
  Poly out(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += sign * b[i];
  return trimmed(std::move(out));
}

Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return trimmed(std::move(out));
}

struct Ratio {
  Poly num;
  Poly den{Rational(1)};
};

Ratio constant(const Rational& r) { return {trimmed({r}), {Rational(1)}}; }

Ratio ratio_of(const OptNode& n, const std::string& unknown) {
  switch (n.token.kind) {
    case TokenKind::Digit:
    case TokenKind::Number:
      return constant(parse_decimal(n.token.symbol));
    case TokenKind::NumHead:
      return constant(parse_decimal(spelled_symbol(n)));
    case TokenKind::Variable:
    case TokenKind::OovHead: {
      std::string name = n.token.kind == TokenKind::OovHead ? spelled_symbol(n) : n.token.symbol;
      if (name != unknown) throw UnboundVariable("'" + name + "' has no value");
      return {{Rational(0), Rational(1)}, {Rational(1)}};
    }
    case TokenKind::Operator:
      break;
    default:
      throw UnsupportedOperator("cannot evaluate " + display(n.token));
  }
  const std::string& s = n.token.symbol;
  auto args = operands(n);
  auto arg = [&](std::size_t i) { return ratio_of(*args[i], unknown); };
  auto sum = [](const Ratio& a, const Ratio& b, int sign) {
    return Ratio{add(mul(a.num, b.den), mul(b.num, a.den), sign), mul(a.den, b.den)};
  };
  auto product = [](const Ratio& a, const Ratio& b) { return Ratio{mul(a.num, b.num), mul(a.den, b.den)}; };
  if ((s == "+" || s == "*") && !args.empty()) {
    Ratio r = arg(0);
    for (std::size_t i = 1; i < args.size(); ++i) r = s == "+" ? sum(r, arg(i), 1) : product(r, arg(i));
    return r;
  }
  if (s == "-" && args.size() == 1) return sum(constant(0), arg(0), -1);
  if (s == "-" && args.size() == 2) return sum(arg(0), arg(1), -1);
  if (s == "/" && args.size() == 2) {
    Ratio d = arg(1);
    if (d.num.empty()) throw DivisionByZero("division by zero");
    return product(arg(0), Ratio{d.den, d.num});
  }
  if (s == "^" && args.size() == 2) {
    // Exponents must not involve the unknown.
    Rational e = eval(*args[1], {});
    if (boost::multiprecision::denominator(e) != 1) throw UnsupportedOperator("non-integer exponent");
    auto ei = boost::multiprecision::numerator(e);
    if (ei > kMaxExponent || ei < -kMaxExponent) throw UnsupportedOperator("exponent too large");
    int k = ei.convert_to<int>();
    Ratio base = arg(0);
    if (k < 0) {
      if (base.num.empty()) throw DivisionByZero("zero to a negative power");
      base = Ratio{base.den, base.num};
    }
    Ratio r = constant(1);
    for (int i = 0; i < std::abs(k); ++i) r = product(r, base);
    return r;
  }
  throw UnsupportedOperator("operator '" + s + "' with " + std::to_string(args.size()) + " operands");
}

}  // namespace

Rational solve_value(const OptNode& tree) {
  const bool equation = tree.token.kind == TokenKind::Operator && tree.token.symbol == "=";
  if (!equation) return evaluate_expression(tree);
  auto sides = operands(tree);
  if (sides.size() != 2) throw UnsupportedOperator("chained equation");
  auto names = free_variables(tree);
  if (names.size() > 1) throw UnboundVariable("more than one unknown");
  if (names.empty()) throw UnboundVariable("equation without an unknown");
  const std::string& unknown = names.front();

  // LHS - RHS as a ratio of polynomials; its numerator must be linear.
  Ratio l = ratio_of(*sides[0], unknown), r = ratio_of(*sides[1], unknown);
  Poly num = add(mul(l.num, r.den), mul(r.num, l.den), -1);
  if (num.size() < 2) throw UnsupportedOperator("equation does not determine its unknown");
  if (num.size() > 2) throw UnsupportedOperator("equation is not linear in its unknown");
  Rational x = -num[0] / num[1];
  // Rejects roots where some divisor vanishes.
  std::map<std::string, Rational> env{{unknown, x}};
  if (eval(*sides[0], env) != eval(*sides[1], env)) throw UnsupportedOperator("root does not satisfy the equation");
  return x;
}

bool solve_equal(const OptNode& pred, const OptNode& gold) {
  if (tree_match(pred, gold)) return true;
  try {
    return solve_value(pred) == solve_value(gold);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace mathlm
