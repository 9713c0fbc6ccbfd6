// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <set>

#include "mathlm/errors.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

namespace {
bool in(const std::vector<std::string>& v, std::string_view s) { return std::find(v.begin(), v.end(), s) != v.end(); }
}  // namespace

MathVocab MathVocab::default_vocab() {
  MathVocab v;
  v.operators = {"+",       "-",       "\\pm",    "*",       "/",       "^",      "=",       "<",
                 ">",       "\\le",    "\\ge",    "\\ne",    "\\approx", "\\sqrt", "\\sin",   "\\cos",
                 "\\tan",   "\\cot",   "\\sec",   "\\csc",   "\\arcsin", "\\arccos", "\\arctan", "\\sinh",
                 "\\cosh",  "\\tanh",  "\\log",   "\\ln",    "\\exp",   "\\sum",  "\\prod",  "\\int",
                 "\\lim",   "\\in",    "\\subset", "\\cup",  "\\cap",   "\\to",   "!",       "|"};
  for (char c = 'a'; c <= 'z'; ++c) v.variables.emplace_back(1, c);
  for (char c = 'A'; c <= 'Z'; ++c) v.variables.emplace_back(1, c);
  for (const char* g : {"\\alpha", "\\beta", "\\gamma", "\\delta", "\\epsilon", "\\theta", "\\lambda", "\\mu",
                        "\\pi", "\\rho", "\\sigma", "\\tau", "\\phi", "\\omega", "\\Delta", "\\Sigma"})
    v.variables.emplace_back(g);
  return v;
}

bool MathVocab::has_operator(std::string_view s) const { return in(operators, s); }
bool MathVocab::has_variable(std::string_view s) const { return in(variables, s); }
bool MathVocab::has_number(std::string_view s) const { return in(numbers, s); }

void MathVocab::validate() const {
  std::set<std::string> seen;
  for (const auto* list : {&operators, &variables, &numbers})
    for (const auto& s : *list) {
      if (s.empty()) throw VocabError("empty math symbol");
      if (!seen.insert(s).second) throw VocabError("math symbol '" + s + "' listed twice");
    }
  for (const auto& n : numbers)
    if (!is_number_literal(n)) throw VocabError("'" + n + "' is not a number literal");
}

bool is_number_literal(std::string_view s) {
  if (s.empty()) return false;
  int dots = 0;
  bool digit = false;
  for (char c : s) {
    if (c == '.') {
      ++dots;
    } else if (c >= '0' && c <= '9') {
      digit = true;
    } else {
      return false;
    }
  }
  return digit && dots <= 1;
}

SymbolClass classify_symbol(std::string_view s, const MathVocab& v) {
  if (v.has_operator(s)) return SymbolClass::Operator;
  if (v.has_variable(s)) return SymbolClass::Variable;
  if (is_number_literal(s)) return SymbolClass::Number;
  return SymbolClass::OOV;
}

std::string text_rendering(std::string_view symbol) {
  if (symbol.size() > 1 && symbol[0] == '\\') return std::string(symbol.substr(1));
  return std::string(symbol);
}

IdLayout IdLayout::compute(int text_size, const MathVocab& math) {
  IdLayout l;
  l.text = {0, text_size};
  int next = text_size;
  auto take = [&next](int n) {
    IdRange r{next, next + n};
    next += n;
    return r;
  };
  l.specials = take(kNumSpecials);
  l.operators = take(static_cast<int>(math.operators.size()));
  l.variables = take(static_cast<int>(math.variables.size()));
  l.digits = take(kNumDigits);
  l.numbers = take(static_cast<int>(math.numbers.size()));
  l.math = {text_size, next};
  l.total = next;
  return l;
}

}  // namespace mathlm
