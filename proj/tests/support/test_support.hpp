// SPDX-License-Identifier: Apache-2.0
// Helpers shared by the unit and acceptance tests: random trees, a brute-force
// edit-distance oracle and small fixture vocabularies.
#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mathlm/tree.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm::testing {

inline Vocabulary fixture_vocab() {
  return Vocabulary(TextVocab({"new", "velocity", " apples", " the", " and", "How", " many"}), MathVocab::default_vocab());
}

// Random tree already in model form: every parent ends with End, numbers are
// digits or O^N sub-trees, OOV names are O^U sub-trees. Depth and width
// (End included) stay within the limits.
class RandomTreeGen {
 public:
  RandomTreeGen(const Vocabulary& vocab, int max_depth = 6, int max_width = 8)
      : vocab_(vocab), max_depth_(max_depth), max_width_(max_width) {}

  OptNode operator()(std::mt19937_64& rng) const { return node(rng, 0); }

 private:
  int uniform(std::mt19937_64& rng, int lo, int hi) const { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  OptNode leaf(std::mt19937_64& rng, int depth) const {
    const MathVocab& m = vocab_.math();
    int kind = uniform(rng, 0, depth < max_depth_ ? 3 : 1);
    switch (kind) {
      case 0: return var(m.variables[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(m.variables.size()) - 1))]);
      case 1: return digit(static_cast<char>('0' + uniform(rng, 0, 9)));
      case 2: {
        OptNode head(make_token(TokenKind::NumHead));
        int n = uniform(rng, 2, max_width_ - 1);
        int point = uniform(rng, -1, n - 2);
        for (int i = 0; i < n; ++i) head.children.push_back(digit(i == point && i > 0 ? '.' : static_cast<char>('0' + uniform(rng, 0, 9))));
        head.children.push_back(end_node());
        return head;
      }
      default: {
        OptNode head(make_token(TokenKind::OovHead));
        int n = uniform(rng, 1, max_width_ - 1);
        for (int i = 0; i < n; ++i)
          head.children.emplace_back(make_token(TokenKind::MathText, vocab_.text().token(uniform(rng, 'a', 'z'))));
        head.children.push_back(end_node());
        return head;
      }
    }
  }

  OptNode node(std::mt19937_64& rng, int depth) const {
    // Parents need room for one more level of children.
    if (depth >= max_depth_ || uniform(rng, 0, 99) < 35 + 10 * depth) return leaf(rng, depth);
    const MathVocab& m = vocab_.math();
    OptNode n(make_token(TokenKind::Operator,
                         m.operators[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(m.operators.size()) - 1))]));
    int k = uniform(rng, 1, max_width_ - 1);
    for (int i = 0; i < k; ++i) n.children.push_back(node(rng, depth + 1));
    n.children.push_back(end_node());
    return n;
  }

  const Vocabulary& vocab_;
  int max_depth_;
  int max_width_;
};

// Random ordered tree with exactly `nodes` nodes over a small label set.
inline OptNode random_small_tree(std::mt19937_64& rng, int nodes) {
  static const char* labels[] = {"a", "b", "c"};
  auto label = [&] { return std::string(labels[std::uniform_int_distribution<int>(0, 2)(rng)]); };
  // Grow by attaching each new node under a random existing node at a random
  // child slot.
  std::vector<OptNode*> all;
  OptNode root(make_token(TokenKind::Operator, label()));
  all.push_back(&root);
  for (int i = 1; i < nodes; ++i) {
    OptNode* parent = all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)];
    auto slot = std::uniform_int_distribution<std::size_t>(0, parent->children.size())(rng);
    parent->children.insert(parent->children.begin() + static_cast<std::ptrdiff_t>(slot),
                            OptNode(make_token(TokenKind::Operator, label())));
    // Insertion may move siblings, so rebuild the pointer list.
    all.clear();
    std::function<void(OptNode&)> collect = [&](OptNode& n) {
      all.push_back(&n);
      for (OptNode& c : n.children) collect(c);
    };
    collect(root);
  }
  return root;
}

// Minimal edit cost by enumerating every mapping that preserves ancestry and
// sibling order. Exponential; meant for trees of a handful of nodes.
inline int ted_oracle(const OptNode& a, const OptNode& b) {
  struct Info {
    std::vector<const Token*> label;
    std::vector<int> parent;
  };
  auto flatten = [](const OptNode& t) {
    Info info;
    std::function<void(const OptNode&, int)> go = [&](const OptNode& n, int p) {
      int self = static_cast<int>(info.label.size());
      info.label.push_back(&n.token);
      info.parent.push_back(p);
      for (const OptNode& c : n.children) go(c, self);
    };
    go(t, -1);
    return info;
  };
  Info A = flatten(a), B = flatten(b);
  auto is_ancestor = [](const Info& t, int x, int y) {
    for (int p = t.parent[static_cast<std::size_t>(y)]; p >= 0; p = t.parent[static_cast<std::size_t>(p)])
      if (p == x) return true;
    return false;
  };
  // Pre-order index: x left of y when x < y and x is not an ancestor of y.
  auto left_of = [&](const Info& t, int x, int y) { return x < y && !is_ancestor(t, x, y); };

  const int n = static_cast<int>(A.label.size());
  const int m = static_cast<int>(B.label.size());
  std::vector<int> map_to(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  int best = std::numeric_limits<int>::max();

  std::function<void(int, int, int)> search = [&](int i, int mapped, int relabels) {
    if (i == n) {
      best = std::min(best, n + m - 2 * mapped + relabels);
      return;
    }
    search(i + 1, mapped, relabels);
    for (int j = 0; j < m; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      bool ok = true;
      for (int k = 0; k < i && ok; ++k) {
        int l = map_to[static_cast<std::size_t>(k)];
        if (l < 0) continue;
        ok = is_ancestor(A, k, i) == is_ancestor(B, l, j) && left_of(A, k, i) == left_of(B, l, j);
      }
      if (!ok) continue;
      map_to[static_cast<std::size_t>(i)] = j;
      used[static_cast<std::size_t>(j)] = true;
      search(i + 1, mapped + 1, relabels + (*A.label[static_cast<std::size_t>(i)] == *B.label[static_cast<std::size_t>(j)] ? 0 : 1));
      used[static_cast<std::size_t>(j)] = false;
      map_to[static_cast<std::size_t>(i)] = -1;
    }
  };
  search(0, 0, 0);
  return best;
}

}  // namespace mathlm::testing
