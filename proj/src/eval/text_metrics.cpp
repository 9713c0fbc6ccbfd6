// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "mathlm/errors.hpp"
#include "mathlm/eval.hpp"

namespace mathlm {

std::vector<std::string> metric_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (c == '\\' && j < s.size() && alpha(s[j])) {
      while (j < s.size() && alpha(s[j])) ++j;
    } else if (digit(c)) {
      while (j < s.size() && digit(s[j])) ++j;
      if (j + 1 < s.size() && s[j] == '.' && digit(s[j + 1])) {
        ++j;
        while (j < s.size() && digit(s[j])) ++j;
      }
    } else if (alpha(c)) {
      while (j < s.size() && alpha(s[j])) ++j;
    }
    out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts ngrams(const std::vector<std::string>& toks, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++out[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

double bleu4(const std::vector<std::vector<std::string>>& candidates,
             const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size()) throw Misaligned("BLEU inputs differ in length");
  constexpr int kOrder = 4;
  constexpr double kFloor = 0.1;
  long matches[kOrder] = {0, 0, 0, 0};
  long totals[kOrder] = {0, 0, 0, 0};
  long cand_len = 0;
  long ref_len = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    cand_len += static_cast<long>(candidates[k].size());
    ref_len += static_cast<long>(references[k].size());
    for (int n = 1; n <= kOrder; ++n) {
      NgramCounts c = ngrams(candidates[k], static_cast<std::size_t>(n));
      NgramCounts r = ngrams(references[k], static_cast<std::size_t>(n));
      for (const auto& [g, cnt] : c) {
        totals[n - 1] += cnt;
        auto it = r.find(g);
        if (it != r.end()) matches[n - 1] += std::min(cnt, it->second);
      }
    }
  }
  if (cand_len == 0 || matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  int used = 0;
  for (int n = 0; n < kOrder; ++n) {
    if (totals[n] == 0) continue;
    double p = matches[n] > 0 ? static_cast<double>(matches[n]) / totals[n] : kFloor / totals[n];
    log_sum += std::log(p);
    ++used;
  }
  double bp = cand_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / cand_len) : 1.0;
  return 100.0 * bp * std::exp(log_sum / used);
}

double bleu4(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  return bleu4(std::vector<std::vector<std::string>>{candidate}, std::vector<std::vector<std::string>>{reference});
}

double rouge_l(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  std::vector<int> prev(ref.size() + 1, 0), cur(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= cand.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j)
      cur[j] = cand[i - 1] == ref[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  const double lcs = prev[ref.size()];
  if (lcs == 0) return 0.0;
  const double p = lcs / static_cast<double>(cand.size());
  const double r = lcs / static_cast<double>(ref.size());
  constexpr double beta2 = 1.2 * 1.2;
  return 100.0 * (1.0 + beta2) * p * r / (r + beta2 * p);
}

}  // namespace mathlm
