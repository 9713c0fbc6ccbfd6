// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mathlm/token.hpp"

namespace mathlm {

// Sibling indices from the root down to a node. The root has the empty path.
class TreePosition {
 public:
  TreePosition() = default;
  explicit TreePosition(std::vector<std::uint8_t> path);
  TreePosition(std::initializer_list<int> path);

  std::size_t depth() const noexcept { return path_.size(); }
  bool is_root() const noexcept { return path_.empty(); }
  int operator[](std::size_t i) const { return path_[i]; }
  int back() const { return path_.back(); }
  const std::vector<std::uint8_t>& path() const noexcept { return path_; }

  TreePosition child(int index) const;
  TreePosition parent() const;
  TreePosition next_sibling() const;

  std::string to_string() const;

  friend bool operator==(const TreePosition&, const TreePosition&) = default;
  friend auto operator<=>(const TreePosition&, const TreePosition&) = default;

 private:
  std::vector<std::uint8_t> path_;
};

struct OptNode {
  Token token;
  std::vector<OptNode> children;

  OptNode() = default;
  explicit OptNode(Token t, std::vector<OptNode> kids = {}) : token(std::move(t)), children(std::move(kids)) {}

  bool is_leaf() const noexcept { return children.empty(); }

  friend bool operator==(const OptNode&, const OptNode&) = default;
};

// Leaf / node helpers, mostly for tests and tree construction.
OptNode op(std::string symbol, std::vector<OptNode> children);
OptNode var(std::string symbol);
OptNode num(std::string symbol);
OptNode digit(char c);
OptNode end_node();

// Depth of the deepest node (root alone has depth 0).
int tree_depth(const OptNode& tree);
int max_children(const OptNode& tree);
std::size_t node_count(const OptNode& tree);

// Throws CapExceeded if the tree is deeper than kMaxTreeDepth or any node has
// more than kMaxChildren children.
void check_caps(const OptNode& tree);

// Every internal node's last child is End and no other child is End.
bool satisfies_end_law(const OptNode& tree);

struct PositionedNode {
  const OptNode* node;
  TreePosition position;
};

// Pre-order traversal with each node's position.
std::vector<PositionedNode> compute_positions(const OptNode& tree);

struct MathItem {
  Token token;
  TreePosition position;

  friend bool operator==(const MathItem&, const MathItem&) = default;
};

std::vector<MathItem> linearize(const OptNode& tree);

// Inverse of linearize. Throws InvalidTraversal when the items are not the
// pre-order traversal of exactly one tree with consistent positions.
OptNode delinearize(std::span<const MathItem> items);

// Indented multi-line dump with positions, for inspection.
std::string pretty_print(const OptNode& tree);

}  // namespace mathlm
