// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mathlm/errors.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

namespace {
std::unordered_map<std::string, int> index_block(const std::vector<std::string>& symbols, int first) {
  std::unordered_map<std::string, int> m;
  for (std::size_t i = 0; i < symbols.size(); ++i) m.emplace(symbols[i], first + static_cast<int>(i));
  return m;
}

int lookup(const std::unordered_map<std::string, int>& m, const std::string& s, std::string_view what) {
  auto it = m.find(s);
  if (it == m.end()) throw VocabError(std::string(what) + " '" + s + "' is not in the vocabulary");
  return it->second;
}
}  // namespace

Vocabulary::Vocabulary(TextVocab text, MathVocab math) : text_(std::move(text)), math_(std::move(math)) {
  math_.validate();
  layout_ = IdLayout::compute(text_.size(), math_);
  operator_ids_ = index_block(math_.operators, layout_.operators.begin);
  variable_ids_ = index_block(math_.variables, layout_.variables.begin);
  number_ids_ = index_block(math_.numbers, layout_.numbers.begin);
}

int Vocabulary::id_of(const Token& token) const {
  switch (token.kind) {
    case TokenKind::Text:
    case TokenKind::MathText: {
      auto id = text_.find(token.symbol);
      if (!id) throw VocabError("'" + token.symbol + "' is not a single text token");
      return *id;
    }
    case TokenKind::Operator: return lookup(operator_ids_, token.symbol, "operator");
    case TokenKind::Variable: return lookup(variable_ids_, token.symbol, "variable");
    case TokenKind::Number: return lookup(number_ids_, token.symbol, "number");
    case TokenKind::Digit: {
      auto pos = token.symbol.size() == 1 ? kDigitChars.find(token.symbol[0]) : std::string_view::npos;
      if (pos == std::string_view::npos) throw VocabError("'" + token.symbol + "' is not a digit");
      return layout_.digits.begin + static_cast<int>(pos);
    }
    case TokenKind::End: return layout_.special(Special::End);
    case TokenKind::StartFormula: return layout_.special(Special::StartFormula);
    case TokenKind::EndFormula: return layout_.special(Special::EndFormula);
    case TokenKind::NumHead: return layout_.special(Special::NumHead);
    case TokenKind::OovHead: return layout_.special(Special::OovHead);
  }
  throw VocabError("unknown token kind");
}

TokenKind Vocabulary::kind_of(int id) const {
  const IdLayout& l = layout_;
  if (l.text.contains(id)) return TokenKind::Text;
  if (l.specials.contains(id)) {
    switch (static_cast<Special>(id - l.specials.begin)) {
      case Special::StartFormula: return TokenKind::StartFormula;
      case Special::EndFormula: return TokenKind::EndFormula;
      case Special::End: return TokenKind::End;
      case Special::NumHead: return TokenKind::NumHead;
      case Special::OovHead: return TokenKind::OovHead;
    }
  }
  if (l.operators.contains(id)) return TokenKind::Operator;
  if (l.variables.contains(id)) return TokenKind::Variable;
  if (l.digits.contains(id)) return TokenKind::Digit;
  if (l.numbers.contains(id)) return TokenKind::Number;
  throw VocabError("id " + std::to_string(id) + " out of range");
}

Token Vocabulary::token_of(int id) const {
  TokenKind kind = kind_of(id);
  const IdLayout& l = layout_;
  switch (kind) {
    case TokenKind::Text: return make_token(kind, text_.token(id));
    case TokenKind::Operator:
      return make_token(kind, math_.operators[static_cast<std::size_t>(id - l.operators.begin)]);
    case TokenKind::Variable:
      return make_token(kind, math_.variables[static_cast<std::size_t>(id - l.variables.begin)]);
    case TokenKind::Digit:
      return make_token(kind, std::string(1, kDigitChars[static_cast<std::size_t>(id - l.digits.begin)]));
    case TokenKind::Number:
      return make_token(kind, math_.numbers[static_cast<std::size_t>(id - l.numbers.begin)]);
    default: return make_token(kind);
  }
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json j;
  j["operators"] = math_.operators;
  j["variables"] = math_.variables;
  j["numbers"] = math_.numbers;
  j["text_tokens"] = text_.words();
  return j.dump(1);
}

Vocabulary Vocabulary::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("vocabulary JSON: ") + e.what());
  }
  auto strings = [&](const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array()) throw FormatError(std::string("vocabulary field '") + key + "' must be an array");
    for (const auto& s : j[key]) {
      if (!s.is_string()) throw FormatError(std::string("vocabulary field '") + key + "' must hold strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  };
  // Absent math lists fall back to the defaults.
  MathVocab math = MathVocab::default_vocab();
  if (j.contains("operators")) math.operators = strings("operators");
  if (j.contains("variables")) math.variables = strings("variables");
  if (j.contains("numbers")) math.numbers = strings("numbers");
  return Vocabulary(TextVocab(strings("text_tokens")), std::move(math));
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocabulary file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write vocabulary file " + path);
  out << to_json() << "\n";
}

}  // namespace mathlm
