// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "mathlm/errors.hpp"
#include "mathlm/tree.hpp"
#include "test_support.hpp"

using namespace mathlm;

namespace {

OptNode plus_a_2() { return op("+", {var("a"), digit('2'), end_node()}); }

std::vector<TreePosition> positions_of(const std::vector<MathItem>& items) {
  std::vector<TreePosition> out;
  for (const auto& it : items) out.push_back(it.position);
  return out;
}

}  // namespace

TEST_CASE("tree positions follow sibling indices") {
  auto single = compute_positions(var("x"));
  REQUIRE(single.size() == 1);
  CHECK(single[0].position == TreePosition{});

  auto pos = compute_positions(plus_a_2());
  REQUIRE(pos.size() == 4);
  CHECK(pos[0].position == TreePosition{});
  CHECK(pos[1].position == TreePosition{0});
  CHECK(pos[2].position == TreePosition{1});
  CHECK(pos[3].position == TreePosition{2});

  OptNode number(make_token(TokenKind::NumHead), {digit('9'), digit('.'), digit('8'), end_node()});
  OptNode t = op("*", {var("t"), number, end_node()});
  auto p = compute_positions(t);
  CHECK(p[2].node->token.kind == TokenKind::NumHead);
  CHECK(p[3].position == TreePosition{1, 0});
  CHECK(p[4].position == TreePosition{1, 1});
  CHECK(p[5].position == TreePosition{1, 2});
  CHECK(p[6].position == TreePosition{1, 3});
}

TEST_CASE("tree position helpers") {
  TreePosition p{0, 1};
  CHECK(p.child(0) == TreePosition{0, 1, 0});
  CHECK(p.next_sibling() == TreePosition{0, 2});
  CHECK(p.parent() == TreePosition{0});
  CHECK(p.to_string() == "[0,1]");
  CHECK(TreePosition{}.to_string() == "[]");
}

TEST_CASE("linearize lists nodes depth first") {
  auto items = linearize(plus_a_2());
  REQUIRE(items.size() == 4);
  CHECK(items[0].token.symbol == "+");
  CHECK(items[1].token.symbol == "a");
  CHECK(items[2].token.symbol == "2");
  CHECK(items[3].token.kind == TokenKind::End);
  CHECK(positions_of(items) == std::vector<TreePosition>{{}, {0}, {1}, {2}});

  auto leaf = linearize(var("x"));
  REQUIRE(leaf.size() == 1);
  CHECK(leaf[0].position == TreePosition{});

  OptNode eq = op("=", {var("x"), op("+", {digit('1'), digit('2'), end_node()}), end_node()});
  auto e = linearize(eq);
  std::vector<std::string> shown;
  for (const auto& it : e) shown.push_back(display(it.token));
  CHECK(shown == std::vector<std::string>{"=", "x", "+", "1", "2", "<E>", "<E>"});
  CHECK(delinearize(e) == eq);
}

TEST_CASE("delinearize rejects inconsistent traversals") {
  CHECK(delinearize(linearize(plus_a_2())) == plus_a_2());
  CHECK_THROWS_AS(delinearize(std::vector<MathItem>{}), InvalidTraversal);
  std::vector<MathItem> leaf_with_child = {{make_token(TokenKind::Variable, "a"), {}},
                                           {make_token(TokenKind::Variable, "b"), {0}}};
  CHECK_THROWS_AS(delinearize(leaf_with_child), InvalidTraversal);

  auto items = linearize(plus_a_2());
  auto missing_end = items;
  missing_end.pop_back();
  CHECK_THROWS_AS(delinearize(missing_end), InvalidTraversal);
  auto jump = items;
  jump[2].position = TreePosition{3};
  CHECK_THROWS_AS(delinearize(jump), InvalidTraversal);
  auto trailing = items;
  trailing.push_back({make_token(TokenKind::Variable, "b"), {3}});
  CHECK_THROWS_AS(delinearize(trailing), InvalidTraversal);
}

TEST_CASE("round trip and position agreement on random trees") {
  Vocabulary vocab = testing::fixture_vocab();
  testing::RandomTreeGen gen(vocab);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    OptNode t = gen(rng);
    CHECK(tree_depth(t) <= 6);
    CHECK(max_children(t) <= 8);
    CHECK(satisfies_end_law(t));
    auto items = linearize(t);
    auto pos = compute_positions(t);
    REQUIRE(items.size() == pos.size());
    for (std::size_t k = 0; k < items.size(); ++k) CHECK(items[k].position == pos[k].position);
    CHECK(delinearize(items) == t);
  }
}

TEST_CASE("caps") {
  OptNode deep = var("x");
  for (int i = 0; i < kMaxTreeDepth; ++i) deep = op("-", {deep, end_node()});
  CHECK(tree_depth(deep) == kMaxTreeDepth);
  CHECK_NOTHROW(check_caps(deep));
  deep = op("-", {deep, end_node()});
  CHECK_THROWS_AS(check_caps(deep), CapExceeded);

  std::vector<OptNode> kids(kMaxChildren, var("a"));
  CHECK_NOTHROW(check_caps(op("+", kids)));
  kids.push_back(var("a"));
  CHECK_THROWS_AS(check_caps(op("+", kids)), CapExceeded);
}

TEST_CASE("end law") {
  CHECK(satisfies_end_law(plus_a_2()));
  CHECK_FALSE(satisfies_end_law(op("+", {var("a"), digit('2')})));
  CHECK_FALSE(satisfies_end_law(op("+", {end_node(), var("a"), end_node()})));
}
