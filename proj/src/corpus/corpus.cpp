// SPDX-License-Identifier: Apache-2.0
#include "mathlm/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>
#include <set>

#include "mathlm/errors.hpp"
#include "mathlm/eval.hpp"
#include "mathlm/latex_parser.hpp"
#include "mathlm/params.hpp"
#include "mathlm/segment.hpp"

namespace mathlm {

std::vector<ProblemTemplate> default_templates() {
  return {
      {"A store sold {a} apples in the morning and {b} apples in the afternoon. How many apples did it sell in all?",
       "{v}={a}+{b}",
       {{"a", 10, 99}, {"b", 10, 99}}},
      {"Tom had {a} marbles and gave {b} of them to a friend. How many marbles does Tom have left?",
       "{v}={a}-{b}",
       {{"a", 50, 99}, {"b", 2, 49}}},
      {"A box holds {a} pencils. How many pencils are in {b} boxes?", "{v}={a}*{b}", {{"a", 6, 24}, {"b", 2, 12}}},
      {"{a} cookies are shared equally among {b} children. How many cookies does each child get?",
       "{v}=\\frac{{a}}{{b}}",
       {{"a", 20, 96}, {"b", 2, 8}}},
      {"A car travels at {a} miles per hour for {b} hours and then drives {c} more miles. How far does it go?",
       "{v}={a}*{b}+{c}",
       {{"a", 30, 70}, {"b", 2, 6}, {"c", 5, 40}}},
      {"A shirt costs {a} dollars. With a coupon each shirt is {b} dollars cheaper. How much do {c} shirts cost?",
       "{v}=({a}-{b})*{c}",
       {{"a", 15, 40}, {"b", 2, 9}, {"c", 2, 6}}},
      {"Twice a number plus {a} equals {b}. What is the number?", "2{v}+{a}={b}", {{"a", 2, 30}, {"b", 31, 90}}},
      {"A number divided by {a} is {b}. What is the number?", "\\frac{{v}}{{a}}={b}", {{"a", 2, 9}, {"b", 3, 25}}},
      {"A tank holds {d} liters of water. {a} liters leak out each hour for {b} hours. How much water is left?",
       "{v}={d}-{a}*{b}",
       {{"d", 60, 99, 1}, {"a", 2, 6}, {"b", 2, 8}}},
      {"A recipe uses {p}/{q} of a cup of sugar per batch. How much sugar is needed for {a} batches?",
       "{v}=\\frac{{p}}{{q}}*{a}",
       {{"p", 1, 3}, {"q", 4, 8}, {"a", 2, 12}}},
      {"The price of {a} notebooks is {b} dollars. What is the price of one notebook?",
       "{a}{v}={b}",
       {{"a", 2, 9}, {"b", 10, 60}}},
      {"A rectangle is {a} meters long and {b} meters wide. What is its perimeter?",
       "{v}=2({a}+{b})",
       {{"a", 5, 40}, {"b", 3, 30}}},
      {"Anna saves {a} dollars each week. After {b} weeks she spends {c} dollars. How much money does she have now?",
       "{v}={a}*{b}-{c}",
       {{"a", 5, 20}, {"b", 3, 10}, {"c", 1, 14}}},
      {"A train covers {d} kilometers in {a} hours. What is its average speed?",
       "{v}=\\frac{{d}}{{a}}",
       {{"d", 100, 400, 1}, {"a", 2, 5}}},
      {"A class has {a} students and {b} are absent. Each student present gets {c} sheets. How many sheets are given out?",
       "{v}=({a}-{b})*{c}",
       {{"a", 20, 35}, {"b", 1, 6}, {"c", 2, 5}}},
      {"Three more than a number is {a}. What is the number?", "{v}+3={a}", {{"a", 4, 99}}},
  };
}

namespace {

const std::vector<std::string> kOtherLetters = {"n", "y", "t", "m", "k"};
const std::vector<std::string> kOovNames = {"total", "cost", "left", "speed", "amount", "answer"};

std::string fill(std::string s, const std::vector<std::pair<std::string, std::string>>& values) {
  for (const auto& [name, value] : values) {
    const std::string key = "{" + name + "}";
    for (std::size_t at = s.find(key); at != std::string::npos; at = s.find(key, at + value.size()))
      s.replace(at, key.size(), value);
  }
  return s;
}

std::string draw(const SlotRange& r, Rng& rng) {
  std::uniform_int_distribution<int> whole(r.lo, r.hi);
  std::string out = std::to_string(whole(rng));
  if (r.decimals > 0) {
    out += '.';
    std::uniform_int_distribution<int> digit(1, 9);
    for (int i = 0; i < r.decimals; ++i) out += static_cast<char>('0' + digit(rng));
  }
  return out;
}

bool usable(const std::string& equation) {
  try {
    OptNode raw = parse_math(equation);
    solve_value(raw);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::vector<CorpusExample> generate_corpus(int n, std::uint64_t seed, const std::vector<ProblemTemplate>& templates,
                                           const CorpusOptions& options) {
  if (n <= 0) throw Error(ErrorCategory::User, "corpus size must be positive");
  if (templates.empty()) throw Error(ErrorCategory::User, "no templates");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_template(0, templates.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<CorpusExample> out;
  out.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(out.size()) < n) {
    const ProblemTemplate& t = templates[pick_template(rng)];
    std::vector<std::pair<std::string, std::string>> values;
    for (const SlotRange& s : t.slots) values.emplace_back(s.name, draw(s, rng));
    std::string var = "x";
    double u = unit(rng);
    if (u < options.oov_name_rate) {
      var = kOovNames[std::uniform_int_distribution<std::size_t>(0, kOovNames.size() - 1)(rng)];
    } else if (u < options.oov_name_rate + options.other_letter_rate) {
      var = kOtherLetters[std::uniform_int_distribution<std::size_t>(0, kOtherLetters.size() - 1)(rng)];
    }
    values.emplace_back("v", var);
    CorpusExample ex;
    ex.problem = fill(t.text, values);
    if (var != "x") ex.problem += " Use " + var + " for the unknown.";
    ex.equation = fill(t.equation, values);
    if (!usable(ex.equation)) continue;
    out.push_back(std::move(ex));
  }
  return out;
}

CorpusSplits split_corpus(const std::vector<CorpusExample>& examples) {
  const std::size_t n = examples.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  CorpusSplits s;
  s.train.assign(examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(examples.begin() + static_cast<std::ptrdiff_t>(n_train),
               examples.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(examples.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), examples.end());
  return s;
}

std::vector<int> cv_fold_assignment(std::size_t n, int k, std::uint64_t seed) {
  if (k <= 0) throw Error(ErrorCategory::User, "fold count must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return fold;
}

void write_jsonl(const std::string& path, const std::vector<CorpusExample>& examples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCategory::User, "cannot write " + path);
  for (const CorpusExample& e : examples)
    out << nlohmann::json{{"problem", e.problem}, {"equation", e.equation}}.dump() << '\n';
}

std::vector<CorpusExample> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::User, "cannot open " + path);
  std::vector<CorpusExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back({j.at("problem").get<std::string>(), j.at("equation").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

CorpusSplits write_corpus(const std::string& dir, int n, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  CorpusSplits s = split_corpus(generate_corpus(n, seed));
  write_jsonl(dir + "/train.jsonl", s.train);
  write_jsonl(dir + "/val.jsonl", s.val);
  write_jsonl(dir + "/test.jsonl", s.test);
  return s;
}

Vocabulary corpus_vocabulary(const std::vector<CorpusExample>& examples, std::size_t max_words, bool number_tokens) {
  std::vector<std::string> texts;
  texts.reserve(examples.size());
  for (const CorpusExample& e : examples) texts.push_back(e.problem);
  MathVocab math = MathVocab::default_vocab();
  if (number_tokens) {
    std::set<std::string> numbers;
    for (const CorpusExample& e : examples) {
      std::vector<const OptNode*> stack;
      OptNode raw = parse_math(e.equation);
      stack.push_back(&raw);
      while (!stack.empty()) {
        const OptNode* n = stack.back();
        stack.pop_back();
        if (n->token.kind == TokenKind::Number && n->token.symbol.size() > 1) numbers.insert(n->token.symbol);
        for (const OptNode& c : n->children) stack.push_back(&c);
      }
    }
    math.numbers.assign(numbers.begin(), numbers.end());
  }
  return Vocabulary(TextVocab::train(texts, max_words), std::move(math));
}

}  // namespace mathlm
