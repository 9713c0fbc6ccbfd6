// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "mathlm/errors.hpp"
#include "mathlm/eval.hpp"
#include "mathlm/latex_parser.hpp"
#include "mathlm/normalize.hpp"
#include "mathlm/segment.hpp"
#include "test_support.hpp"

using namespace mathlm;

namespace {

OptNode tree(const std::string& latex) { return formula_tree(latex, testing::fixture_vocab()); }

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = s.find(' ', i);
    if (j == std::string::npos) j = s.size();
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("tree edit distance examples") {
  OptNode t = tree("x=3+4");
  CHECK(tree_edit_distance(t, t) == 0);
  CHECK(tree_edit_distance(tree("a+b"), tree("a+c")) == 1);
  CHECK(tree_edit_distance(op("+", {var("a"), var("b")}), op("+", {var("a")})) == 1);
  CHECK(tree_edit_distance(tree("x=12/4"), tree("x=3")) == 7);
  CHECK(tree_edit_distance(tree("x=5.0"), tree("x=5")) == 4);
  CHECK(tree_edit_distance(collapse_number_subtrees(tree("x=5.0")), collapse_number_subtrees(tree("x=5"))) == 1);
}

TEST_CASE("tree edit distance equals the exhaustive oracle") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(1, 6);
  for (int i = 0; i < 200; ++i) {
    OptNode a = testing::random_small_tree(rng, size(rng));
    OptNode b = testing::random_small_tree(rng, size(rng));
    CHECK(tree_edit_distance(a, b) == testing::ted_oracle(a, b));
  }
}

TEST_CASE("tree edit distance is a metric") {
  std::mt19937_64 rng(5);
  Vocabulary v = testing::fixture_vocab();
  testing::RandomTreeGen gen(v, 3, 4);
  for (int i = 0; i < 100; ++i) {
    OptNode a = gen(rng), b = gen(rng), c = gen(rng);
    int ab = tree_edit_distance(a, b), bc = tree_edit_distance(b, c), ac = tree_edit_distance(a, c);
    CHECK(ab == tree_edit_distance(b, a));
    CHECK(ac <= ab + bc);
    CHECK((ab == 0) == (a == b));
  }
}

TEST_CASE("tree match") {
  CHECK(tree_match(tree("1+2"), tree("1+2")));
  CHECK_FALSE(tree_match(tree("1+2"), tree("2+1")));
  // End placement is fixed by normalization, so equal raw trees give equal normalized trees.
  CHECK(satisfies_end_law(tree("x=280/(1-(2/5)-(1/3))")));
}

TEST_CASE("exact evaluation") {
  CHECK(evaluate_expression(tree("1+2")) == 3);
  CHECK(evaluate_expression(tree("280/(1-(2/5)-(1/3))")) == 1050);
  CHECK(evaluate_expression(tree("9.8*10")) == 98);
  CHECK(evaluate_expression(tree("2^{-2}")) == Rational(1, 4));
  CHECK(evaluate_expression(tree("-3+x"), {{"x", Rational(5)}}) == 2);
  CHECK(evaluate_expression(tree("speed*2"), {{"speed", Rational(7)}}) == 14);
  CHECK(parse_decimal("0.125") == Rational(1, 8));
  CHECK(parse_decimal("010") == 10);
  CHECK(parse_decimal("0") == 0);

  CHECK(solve_value(tree("x=280/(1-(2/5)-(1/3))")) == 1050);
  CHECK(solve_value(tree("12/x=4")) == 3);
  CHECK(solve_value(tree("2(x-1)+x=10")) == 4);
  CHECK(solve_value(tree("total-3.5=1.5")) == 5);
  CHECK(solve_value(tree("7")) == 7);
  CHECK(solve_value(tree("3/(x+1)=1/2")) == 5);
  CHECK(solve_value(tree("x/4+x/4=3")) == 6);
  CHECK_THROWS_AS(solve_value(tree("x/x=1")), Error);
  CHECK_THROWS_AS(solve_value(tree("x+1=x")), Error);

  CHECK_THROWS_AS(evaluate_expression(tree("1/(2-2)")), DivisionByZero);
  CHECK_THROWS_AS(evaluate_expression(tree("x+1")), UnboundVariable);
  CHECK_THROWS_AS(evaluate_expression(tree("\\sin x"), {{"x", Rational(0)}}), UnsupportedOperator);
  CHECK_THROWS_AS(solve_value(tree("x^2=4")), Error);
  CHECK(free_variables(tree("newvelocity=9.8t")) == std::vector<std::string>{"newvelocity", "t"});

  CHECK(solve_equal(tree("x=1+2"), tree("x=2+1")));
  CHECK_FALSE(tree_match(tree("x=1+2"), tree("x=2+1")));
  CHECK_FALSE(solve_equal(tree("x=8"), tree("x=7")));
  CHECK(solve_equal(tree("x^2=4"), tree("x^2=4")));
}

TEST_CASE("metric tokens") {
  CHECK(metric_tokens("\\frac{12}{x}+9.8t") ==
        std::vector<std::string>{"\\frac", "{", "12", "}", "{", "x", "}", "+", "9.8", "t"});
  CHECK(metric_tokens("How many apples?") == std::vector<std::string>{"How", "many", "apples", "?"});
}

TEST_CASE("BLEU-4 and ROUGE-L") {
  auto a = words("the cat sat on the mat");
  CHECK(bleu4(a, a) == doctest::Approx(100.0));
  CHECK(rouge_l(a, a) == doctest::Approx(100.0));
  CHECK(bleu4(a, words("dog runs fast")) == 0.0);
  CHECK(rouge_l(a, words("dog runs fast")) == 0.0);

  // Reference values from sacrebleu (floor smoothing 0.1, effective order) on
  // the same token lists.
  CHECK(bleu4(a, words("the cat is on the mat")) == doctest::Approx(25.40663740773073).epsilon(1e-9));
  CHECK(bleu4(words("a b c"), words("a b c d e")) == doctest::Approx(51.341711903259224).epsilon(1e-9));
  CHECK(bleu4({words("x = 3 + 4"), words("a b")}, {words("x = 4 + 3"), words("a b c")}) ==
        doctest::Approx(13.929486808286972).epsilon(1e-9));
  CHECK_THROWS_AS(bleu4(std::vector<std::vector<std::string>>{a}, std::vector<std::vector<std::string>>{}), Misaligned);

  // LCS 3 of 3 and 5 tokens: P = 1, R = 0.6, F = 2.44 * 0.6 / (0.6 + 1.44).
  CHECK(rouge_l(words("a b c"), words("a b c d e")) == doctest::Approx(100.0 * 1.464 / 2.04).epsilon(1e-12));
  CHECK(rouge_l(a, words("the cat is on the mat")) == doctest::Approx(100.0 * 5.0 / 6.0));
}

TEST_CASE("scoring prediction files") {
  Vocabulary v = testing::fixture_vocab();
  std::vector<std::string> gold = {"$x=3+4$", "$x=3+4$", "$x=7$", "$x=3$", "$x=2$",
                                   "$x=5$",   "$x=6$",   "$x=5$", "$x=5$", "$x=2+1$"};
  SUBCASE("gold against itself") {
    EvalReport r = score_lines(gold, gold, v);
    CHECK(r.tree_match_rate == 1.0);
    CHECK(r.solve_rate == 1.0);
    CHECK(r.mean_ted == 0.0);
    CHECK(r.bleu4 == doctest::Approx(100.0));
    CHECK(r.rouge_l == doctest::Approx(100.0));
    CHECK(r.counts.formulas == 10);
  }
  SUBCASE("empty input") {
    EvalReport r = score_lines({}, {}, v);
    CHECK(r.counts.lines == 0);
    CHECK(r.counts.formulas == 0);
    CHECK(r.tree_match_rate == 0.0);
    CHECK(r.solve_rate == 0.0);
    CHECK(r.bleu4 == 0.0);
  }
  SUBCASE("misaligned input") { CHECK_THROWS_AS(score_lines({"$x$"}, {}, v), Misaligned); }
  SUBCASE("ten hand-tallied pairs") {
    std::vector<std::string> pred = {"$x=3+4$", "$x=4+3$",  "$x=8$",   "$x=12/4$", "$x=($",
                                     "no answer", "$y=6$",  "$2x=10$", "$x=5.0$",  "$x=1+2$"};
    EvalReport r = score_lines(pred, gold, v);
    CHECK(r.counts.lines == 10);
    CHECK(r.counts.formulas == 10);
    CHECK(r.counts.tree_matches == 1);
    CHECK(r.counts.solved == 7);
    CHECK(r.counts.parse_failures == 1);
    CHECK(r.mean_ted == doctest::Approx(3.2));
    CHECK(r.tree_match_rate <= r.solve_rate);
    auto j = r.to_json();
    CHECK(j["counts"]["solved"] == 7);
    CHECK(r.to_table().find("solve rate") != std::string::npos);
  }
  SUBCASE("JSON records with trees") {
    std::vector<std::string> pred = {
        R"({"prediction": "$x=7$", "trees": [["O","=",[["V","x",null],["N","7",null],["E","",null]]]]})",
        R"({"prediction": "$?$", "trees": [null]})"};
    std::vector<std::string> g = {R"({"problem": "p", "equation": "x=7"})", R"({"equation": "x=1"})"};
    EvalReport r = score_lines(pred, g, v);
    CHECK(r.counts.tree_matches == 1);
    CHECK(r.counts.parse_failures == 1);
  }
}

TEST_CASE("aggregating runs") {
  EvalReport a, b;
  a.tree_match_rate = 0.5;
  b.tree_match_rate = 0.7;
  auto j = aggregate_reports({a, b});
  CHECK(j["tree_match_rate"]["mean"].get<double>() == doctest::Approx(0.6));
  CHECK(j["tree_match_rate"]["std"].get<double>() == doctest::Approx(0.1414213562).epsilon(1e-8));
}
