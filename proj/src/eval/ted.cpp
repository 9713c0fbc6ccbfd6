// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <vector>

#include "mathlm/eval.hpp"

namespace mathlm {

namespace {

// Post-order arrays for Zhang-Shasha.
struct Flat {
  std::vector<const Token*> label;
  std::vector<int> lml;  // leftmost leaf descendant, post-order index
  std::vector<int> keyroots;

  explicit Flat(const OptNode& root) {
    visit(root);
    const int n = static_cast<int>(label.size());
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int i = n - 1; i >= 0; --i) {
      auto l = static_cast<std::size_t>(lml[static_cast<std::size_t>(i)]);
      if (!seen[l]) {
        seen[l] = true;
        keyroots.push_back(i);
      }
    }
    std::sort(keyroots.begin(), keyroots.end());
  }

  int visit(const OptNode& node) {
    int leftmost = -1;
    for (const OptNode& c : node.children) {
      int l = visit(c);
      if (leftmost < 0) leftmost = l;
    }
    label.push_back(&node.token);
    int self = static_cast<int>(label.size()) - 1;
    lml.push_back(leftmost < 0 ? self : leftmost);
    return lml.back();
  }
};

}  // namespace

int tree_edit_distance(const OptNode& a, const OptNode& b) {
  Flat A(a), B(b);
  const int n = static_cast<int>(A.label.size());
  const int m = static_cast<int>(B.label.size());
  std::vector<std::vector<int>> td(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(m), 0));
  std::vector<std::vector<int>> fd(static_cast<std::size_t>(n + 1), std::vector<int>(static_cast<std::size_t>(m + 1), 0));

  for (int i : A.keyroots) {
    for (int j : B.keyroots) {
      const int li = A.lml[static_cast<std::size_t>(i)];
      const int lj = B.lml[static_cast<std::size_t>(j)];
      // fd[x][y]: forest A[li..li+x-1] vs B[lj..lj+y-1].
      const int rows = i - li + 1;
      const int cols = j - lj + 1;
      fd[0][0] = 0;
      for (int x = 1; x <= rows; ++x) fd[static_cast<std::size_t>(x)][0] = x;
      for (int y = 1; y <= cols; ++y) fd[0][static_cast<std::size_t>(y)] = y;
      for (int x = 1; x <= rows; ++x) {
        const int ai = li + x - 1;
        for (int y = 1; y <= cols; ++y) {
          const int bj = lj + y - 1;
          auto ux = static_cast<std::size_t>(x);
          auto uy = static_cast<std::size_t>(y);
          int del = fd[ux - 1][uy] + 1;
          int ins = fd[ux][uy - 1] + 1;
          if (A.lml[static_cast<std::size_t>(ai)] == li && B.lml[static_cast<std::size_t>(bj)] == lj) {
            int rel = fd[ux - 1][uy - 1] + (*A.label[static_cast<std::size_t>(ai)] == *B.label[static_cast<std::size_t>(bj)] ? 0 : 1);
            fd[ux][uy] = std::min({del, ins, rel});
            td[static_cast<std::size_t>(ai)][static_cast<std::size_t>(bj)] = fd[ux][uy];
          } else {
            auto px = static_cast<std::size_t>(A.lml[static_cast<std::size_t>(ai)] - li);
            auto py = static_cast<std::size_t>(B.lml[static_cast<std::size_t>(bj)] - lj);
            int sub = fd[px][py] + td[static_cast<std::size_t>(ai)][static_cast<std::size_t>(bj)];
            fd[ux][uy] = std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return td[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(m - 1)];
}

bool tree_match(const OptNode& a, const OptNode& b) { return a == b; }

}  // namespace mathlm
