// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <map>

#include "mathlm/errors.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

namespace {
bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
}  // namespace

TextVocab::TextVocab(std::vector<std::string> words) : words_(std::move(words)) {
  byte_strings_.reserve(kByteTokens);
  for (int b = 0; b < kByteTokens; ++b) byte_strings_.emplace_back(1, static_cast<char>(b));
  for (std::size_t i = 0; i < words_.size(); ++i) {
    const std::string& w = words_[i];
    if (w.size() < 2) throw VocabError("text token '" + w + "' is shorter than two bytes; bytes are implicit");
    if (!index_.emplace(w, kByteTokens + static_cast<int>(i)).second)
      throw VocabError("duplicate text token '" + w + "'");
    max_word_len_ = std::max(max_word_len_, w.size());
  }
}

std::vector<std::string> TextVocab::pretokenize(std::string_view s) {
  std::vector<std::string> chunks;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t start = i;
    if (s[i] == ' ' && i + 1 < s.size() && is_letter(s[i + 1])) ++i;
    if (is_letter(s[i])) {
      while (i < s.size() && is_letter(s[i])) ++i;
    } else {
      ++i;
    }
    chunks.emplace_back(s.substr(start, i - start));
  }
  return chunks;
}

TextVocab TextVocab::train(std::span<const std::string> texts, std::size_t max_words, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts)
    for (auto& chunk : pretokenize(t))
      if (chunk.size() >= 2) ++counts[chunk];
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [w, c] : counts)
    if (c >= min_count) ranked.emplace_back(w, c);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_words) ranked.resize(max_words);
  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (auto& [w, c] : ranked) words.push_back(w);
  return TextVocab(std::move(words));
}

std::vector<int> TextVocab::tokenize(std::string_view s) const {
  std::vector<int> ids;
  for (const auto& chunk : pretokenize(s)) {
    std::size_t i = 0;
    while (i < chunk.size()) {
      std::size_t len = std::min(max_word_len_, chunk.size() - i);
      int found = -1;
      for (; len >= 2; --len) {
        auto it = index_.find(chunk.substr(i, len));
        if (it != index_.end()) {
          found = it->second;
          break;
        }
      }
      if (found >= 0) {
        ids.push_back(found);
        i += len;
      } else {
        ids.push_back(static_cast<unsigned char>(chunk[i]));
        ++i;
      }
    }
  }
  return ids;
}

std::string TextVocab::detokenize(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) out += token(id);
  return out;
}

const std::string& TextVocab::token(int id) const {
  if (id < 0 || id >= size()) throw VocabError("text id " + std::to_string(id) + " out of range");
  if (id < kByteTokens) return byte_strings_[static_cast<std::size_t>(id)];
  return words_[static_cast<std::size_t>(id - kByteTokens)];
}

std::optional<int> TextVocab::find(std::string_view token) const {
  if (token.size() == 1) return static_cast<unsigned char>(token[0]);
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace mathlm
