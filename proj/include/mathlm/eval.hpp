// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mathlm/tree.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

using Rational = boost::multiprecision::cpp_rational;

// Ordered-tree edit distance (Zhang-Shasha) with unit insert, delete and
// relabel costs. Labels compare kind and symbol.
int tree_edit_distance(const OptNode& a, const OptNode& b);

// Structural identity.
bool tree_match(const OptNode& a, const OptNode& b);

// Exact value of a decimal literal such as "9.8".
Rational parse_decimal(std::string_view text);

// Evaluates an expression tree (normalized or raw) in exact arithmetic.
// Supports + and * of any arity, binary - and /, unary -, ^ with an integer
// exponent, and the number forms. Equations of the form "x = RHS" are handled
// by solve_value. Throws DivisionByZero, UnboundVariable, UnsupportedOperator.
Rational evaluate_expression(const OptNode& tree, const std::map<std::string, Rational>& bindings = {});

// Value the equation assigns to its single unknown, or the value of a plain
// expression. LHS - RHS must reduce to a ratio of polynomials whose numerator
// is linear, e.g. "12/x = 4".
Rational solve_value(const OptNode& tree);

// Variable names in the tree, OOV sub-trees spelled out.
std::vector<std::string> free_variables(const OptNode& tree);

// True when the trees match or both solve to the same value.
bool solve_equal(const OptNode& pred, const OptNode& gold);

// Tokens used by the n-gram metrics: whitespace-separated words for text,
// commands, numbers and single characters for LaTeX.
std::vector<std::string> metric_tokens(std::string_view latex);

// Corpus-level BLEU-4 in [0, 100]. Orders with no candidate n-grams are
// skipped; an order with zero matches uses 0.1 / (candidate n-grams).
double bleu4(const std::vector<std::vector<std::string>>& candidates,
             const std::vector<std::vector<std::string>>& references);
double bleu4(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

// LCS-based F-measure with beta = 1.2, in [0, 100].
double rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

struct EvalCounts {
  int lines = 0;
  int formulas = 0;        // scored formula pairs
  int tree_matches = 0;
  int solved = 0;
  int parse_failures = 0;  // predicted formulas that did not parse
};

struct EvalReport {
  double tree_match_rate = 0.0;
  double solve_rate = 0.0;
  double mean_ted = 0.0;
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  EvalCounts counts;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

struct ScoreOptions {
  bool collapse_numbers = false;  // TED with numbers as single nodes
};

// One record per line: a document with $-delimited math, or a JSON object
// whose "prediction", "equation" or "text" field holds it ("equation" is
// wrapped in $...$). A "trees" array of 3-tuple trees (null for failures)
// overrides the formulas parsed from the text. Formulas pair up by index
// within a line.
EvalReport score_lines(const std::vector<std::string>& predictions, const std::vector<std::string>& gold,
                       const Vocabulary& vocab, const ScoreOptions& options = {});
// Throws Misaligned when the files differ in line count.
EvalReport score_predictions(const std::string& pred_path, const std::string& gold_path, const Vocabulary& vocab,
                             const ScoreOptions& options = {});

// Mean and sample standard deviation of each metric across runs.
nlohmann::json aggregate_reports(const std::vector<EvalReport>& runs);

}  // namespace mathlm
