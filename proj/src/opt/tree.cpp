// SPDX-License-Identifier: Apache-2.0
#include "mathlm/tree.hpp"

#include <algorithm>
#include <sstream>

#include "mathlm/errors.hpp"

namespace mathlm {

std::string_view kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Text: return "Text";
    case TokenKind::Operator: return "Operator";
    case TokenKind::Variable: return "Variable";
    case TokenKind::Number: return "Number";
    case TokenKind::Digit: return "Digit";
    case TokenKind::End: return "End";
    case TokenKind::StartFormula: return "StartFormula";
    case TokenKind::EndFormula: return "EndFormula";
    case TokenKind::NumHead: return "NumHead";
    case TokenKind::OovHead: return "OovHead";
    case TokenKind::MathText: return "MathText";
  }
  return "?";
}

std::string_view type_tag_name(TypeTag t) {
  switch (t) {
    case TypeTag::Text: return "Text";
    case TypeTag::Operator: return "Operator";
    case TypeTag::Variable: return "Variable";
    case TypeTag::Number: return "Number";
    case TypeTag::End: return "End";
    case TypeTag::Control: return "Control";
  }
  return "?";
}

std::string display(const Token& t) {
  switch (t.kind) {
    case TokenKind::End: return "<E>";
    case TokenKind::StartFormula: return "<F^s>";
    case TokenKind::EndFormula: return "<F^e>";
    case TokenKind::NumHead: return "<O^N>";
    case TokenKind::OovHead: return "<O^U>";
    case TokenKind::MathText: return "\"" + t.symbol + "\"";
    default: return t.symbol;
  }
}

TreePosition::TreePosition(std::vector<std::uint8_t> path) : path_(std::move(path)) {}

TreePosition::TreePosition(std::initializer_list<int> path) {
  path_.reserve(path.size());
  for (int p : path) path_.push_back(static_cast<std::uint8_t>(p));
}

TreePosition TreePosition::child(int index) const {
  TreePosition out = *this;
  out.path_.push_back(static_cast<std::uint8_t>(index));
  return out;
}

TreePosition TreePosition::parent() const {
  TreePosition out = *this;
  if (!out.path_.empty()) out.path_.pop_back();
  return out;
}

TreePosition TreePosition::next_sibling() const {
  TreePosition out = *this;
  if (!out.path_.empty()) ++out.path_.back();
  return out;
}

std::string TreePosition::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(path_[i]);
  }
  return s + "]";
}

OptNode op(std::string symbol, std::vector<OptNode> children) {
  return OptNode(make_token(TokenKind::Operator, std::move(symbol)), std::move(children));
}
OptNode var(std::string symbol) { return OptNode(make_token(TokenKind::Variable, std::move(symbol))); }
OptNode num(std::string symbol) { return OptNode(make_token(TokenKind::Number, std::move(symbol))); }
OptNode digit(char c) { return OptNode(make_token(TokenKind::Digit, std::string(1, c))); }
OptNode end_node() { return OptNode(make_token(TokenKind::End)); }

int tree_depth(const OptNode& tree) {
  int d = 0;
  for (const auto& c : tree.children) d = std::max(d, 1 + tree_depth(c));
  return d;
}

int max_children(const OptNode& tree) {
  int w = static_cast<int>(tree.children.size());
  for (const auto& c : tree.children) w = std::max(w, max_children(c));
  return w;
}

std::size_t node_count(const OptNode& tree) {
  std::size_t n = 1;
  for (const auto& c : tree.children) n += node_count(c);
  return n;
}

void check_caps(const OptNode& tree) {
  if (int d = tree_depth(tree); d > kMaxTreeDepth)
    throw CapExceeded("tree depth " + std::to_string(d) + " exceeds " + std::to_string(kMaxTreeDepth));
  if (int w = max_children(tree); w > kMaxChildren)
    throw CapExceeded("node has " + std::to_string(w) + " children, cap is " + std::to_string(kMaxChildren));
}

bool satisfies_end_law(const OptNode& tree) {
  if (tree.children.empty()) return tree.token.kind == TokenKind::End || !is_parent_kind(tree.token.kind);
  if (tree.children.back().token.kind != TokenKind::End) return false;
  for (std::size_t i = 0; i + 1 < tree.children.size(); ++i) {
    if (tree.children[i].token.kind == TokenKind::End) return false;
    if (!satisfies_end_law(tree.children[i])) return false;
  }
  return true;
}

namespace {

void collect_positions(const OptNode& node, TreePosition& pos, std::vector<PositionedNode>& out) {
  out.push_back({&node, pos});
  for (std::size_t j = 0; j < node.children.size(); ++j) {
    TreePosition child = pos.child(static_cast<int>(j));
    collect_positions(node.children[j], child, out);
  }
}

class TraversalReader {
 public:
  explicit TraversalReader(std::span<const MathItem> items) : items_(items) {}

  OptNode read_root() {
    OptNode root = read_node(TreePosition{}, std::nullopt);
    if (next_ != items_.size())
      fail("trailing item after a complete tree", next_);
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& why, std::size_t index) const {
    throw InvalidTraversal(why + " (item " + std::to_string(index) + ")");
  }

  void expect_position(const TreePosition& expected) const {
    if (items_[next_].position != expected)
      fail("position " + items_[next_].position.to_string() + " where " + expected.to_string() +
               " was expected",
           next_);
  }

  OptNode read_node(const TreePosition& expected, std::optional<TokenKind> parent) {
    if (next_ >= items_.size()) fail("traversal ends inside a tree", next_);
    const Token& tok = items_[next_].token;
    if (!is_tree_kind(tok.kind) || tok.kind == TokenKind::End)
      fail("token kind " + std::string(kind_name(tok.kind)) + " cannot start a node", next_);
    if (parent == TokenKind::NumHead && tok.kind != TokenKind::Digit)
      fail("number sub-tree child must be a digit", next_);
    if ((parent == TokenKind::OovHead) != (tok.kind == TokenKind::MathText))
      fail("text tokens appear exactly under out-of-vocabulary heads", next_);
    expect_position(expected);
    ++next_;

    OptNode node(tok);
    if (!is_parent_kind(tok.kind)) return node;
    if (static_cast<int>(expected.depth()) >= kMaxTreeDepth)
      fail("parent node at the depth cap", next_ - 1);

    for (int j = 0;; ++j) {
      if (j >= kMaxChildren) fail("child count exceeds cap", next_);
      if (next_ >= items_.size()) fail("missing End node", next_);
      if (items_[next_].token.kind == TokenKind::End) {
        expect_position(expected.child(j));
        node.children.push_back(OptNode(items_[next_].token));
        ++next_;
        return node;
      }
      node.children.push_back(read_node(expected.child(j), tok.kind));
    }
  }

  std::span<const MathItem> items_;
  std::size_t next_ = 0;
};

void pretty_into(const OptNode& node, const TreePosition& pos, int indent, std::ostringstream& os) {
  os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << display(node.token) << "  "
     << kind_name(node.token.kind) << " " << pos.to_string() << "\n";
  for (std::size_t j = 0; j < node.children.size(); ++j)
    pretty_into(node.children[j], pos.child(static_cast<int>(j)), indent + 1, os);
}

}  // namespace

std::vector<PositionedNode> compute_positions(const OptNode& tree) {
  std::vector<PositionedNode> out;
  TreePosition root;
  collect_positions(tree, root, out);
  return out;
}

std::vector<MathItem> linearize(const OptNode& tree) {
  std::vector<MathItem> out;
  for (auto& pn : compute_positions(tree)) out.push_back({pn.node->token, std::move(pn.position)});
  return out;
}

OptNode delinearize(std::span<const MathItem> items) {
  if (items.empty()) throw InvalidTraversal("empty traversal");
  return TraversalReader(items).read_root();
}

std::string pretty_print(const OptNode& tree) {
  std::ostringstream os;
  pretty_into(tree, TreePosition{}, 0, os);
  return os.str();
}

}  // namespace mathlm
