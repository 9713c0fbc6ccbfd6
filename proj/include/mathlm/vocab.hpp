// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mathlm/token.hpp"

namespace mathlm {

// Word-level text tokenizer with byte fallback.
//
// Ids [0, 256) are the raw bytes, so every string tokenizes and
// detokenize(tokenize(s)) == s. Learned word tokens follow in frequency order.
// Input is first split into chunks: an optional single space followed by a run
// of letters, a single digit, or any other single byte. Each chunk is covered by
// greedy longest match over the word list, falling back to bytes.
class TextVocab {
 public:
  static constexpr int kByteTokens = 256;

  TextVocab() : TextVocab(std::vector<std::string>{}) {}
  explicit TextVocab(std::vector<std::string> words);

  // Keeps the `max_words` most frequent multi-byte chunks seen at least
  // `min_count` times.
  static TextVocab train(std::span<const std::string> texts, std::size_t max_words, std::size_t min_count = 2);

  std::vector<int> tokenize(std::string_view s) const;
  std::string detokenize(std::span<const int> ids) const;

  int size() const noexcept { return static_cast<int>(kByteTokens + words_.size()); }
  const std::string& token(int id) const;
  std::optional<int> find(std::string_view token) const;
  const std::vector<std::string>& words() const noexcept { return words_; }

  static std::vector<std::string> pretokenize(std::string_view s);

 private:
  std::vector<std::string> words_;
  std::vector<std::string> byte_strings_;
  std::unordered_map<std::string, int> index_;
  std::size_t max_word_len_ = 1;
};

enum class SymbolClass { Operator, Variable, Number, OOV };

// Fixed math vocabulary. The special tokens (F^s, F^e, E, O^N, O^U) and the 11
// digit characters are implicit.
struct MathVocab {
  std::vector<std::string> operators;
  std::vector<std::string> variables;
  // Whole-number tokens, used only when number sub-trees are disabled.
  std::vector<std::string> numbers;

  static MathVocab default_vocab();

  bool has_operator(std::string_view s) const;
  bool has_variable(std::string_view s) const;
  bool has_number(std::string_view s) const;

  // Throws VocabError if the sets overlap or contain duplicates.
  void validate() const;
};

inline constexpr std::string_view kDigitChars = "0123456789.";
inline constexpr int kNumDigits = 11;
inline constexpr int kNumSpecials = 5;

enum class Special { StartFormula = 0, EndFormula = 1, End = 2, NumHead = 3, OovHead = 4 };

bool is_number_literal(std::string_view s);
SymbolClass classify_symbol(std::string_view s, const MathVocab& v);

// The name a math symbol is read as in text: "\alpha" -> "alpha", "+" -> "+".
std::string text_rendering(std::string_view symbol);

struct IdRange {
  int begin = 0;
  int end = 0;
  int size() const noexcept { return end - begin; }
  bool contains(int id) const noexcept { return id >= begin && id < end; }
  friend bool operator==(const IdRange&, const IdRange&) = default;
};

// Unified id space: text ids [0, T) then math ids [T, T+M).
struct IdLayout {
  IdRange text;
  IdRange math;
  IdRange specials;
  IdRange operators;
  IdRange variables;
  IdRange digits;
  IdRange numbers;
  int total = 0;

  static IdLayout compute(int text_size, const MathVocab& math);
  int special(Special s) const noexcept { return specials.begin + static_cast<int>(s); }
};

inline IdLayout id_layout(const TextVocab& text, const MathVocab& math) {
  return IdLayout::compute(text.size(), math);
}

// Text and math vocabularies joined into one id space. Immutable after
// construction.
class Vocabulary {
 public:
  Vocabulary(TextVocab text, MathVocab math);

  const TextVocab& text() const noexcept { return text_; }
  const MathVocab& math() const noexcept { return math_; }
  const IdLayout& layout() const noexcept { return layout_; }
  int size() const noexcept { return layout_.total; }

  // Id of a single token. Text and MathText tokens must be exactly one text
  // token. Throws VocabError for symbols outside the vocabulary.
  int id_of(const Token& token) const;
  Token token_of(int id) const;
  TokenKind kind_of(int id) const;

  std::string to_json() const;
  static Vocabulary from_json(std::string_view json);
  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

 private:
  TextVocab text_;
  MathVocab math_;
  IdLayout layout_;
  std::unordered_map<std::string, int> operator_ids_, variable_ids_, number_ids_;
};

}  // namespace mathlm
