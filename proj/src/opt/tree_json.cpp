// SPDX-License-Identifier: Apache-2.0
#include "mathlm/tree_json.hpp"

#include "mathlm/errors.hpp"

namespace mathlm {

std::string_view type_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Operator: return "O";
    case TokenKind::Variable: return "V";
    case TokenKind::Number:
    case TokenKind::Digit: return "N";
    case TokenKind::End: return "E";
    case TokenKind::NumHead: return "ON";
    case TokenKind::OovHead: return "OU";
    case TokenKind::MathText: return "T";
    default: throw FormatError("token kind " + std::string(kind_name(kind)) + " has no tree type");
  }
}

nlohmann::json tree_to_json(const OptNode& tree) {
  nlohmann::json children = nullptr;
  if (!tree.children.empty()) {
    children = nlohmann::json::array();
    for (const auto& c : tree.children) children.push_back(tree_to_json(c));
  }
  return nlohmann::json::array({type_string(tree.token.kind), tree.token.symbol, children});
}

OptNode tree_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_string() || !j[1].is_string())
    throw FormatError("tree node must be [type, name, children-or-null]");
  const std::string type = j[0].get<std::string>();
  std::string name = j[1].get<std::string>();
  TokenKind kind;
  if (type == "O") kind = TokenKind::Operator;
  else if (type == "V") kind = TokenKind::Variable;
  else if (type == "N") kind = name.size() == 1 ? TokenKind::Digit : TokenKind::Number;
  else if (type == "E") kind = TokenKind::End;
  else if (type == "ON") kind = TokenKind::NumHead;
  else if (type == "OU") kind = TokenKind::OovHead;
  else if (type == "T") kind = TokenKind::MathText;
  else throw FormatError("unknown tree node type '" + type + "'");

  OptNode node(make_token(kind, std::move(name)));
  if (j[2].is_array()) {
    for (const auto& c : j[2]) node.children.push_back(tree_from_json(c));
  } else if (!j[2].is_null()) {
    throw FormatError("children must be an array or null");
  }
  return node;
}

nlohmann::json tree_document(const OptNode& tree, bool with_positions) {
  nlohmann::json doc;
  doc["tree"] = tree_to_json(tree);
  if (with_positions) {
    nlohmann::json positions = nlohmann::json::array();
    for (const auto& pn : compute_positions(tree)) {
      nlohmann::json p = nlohmann::json::array();
      for (auto v : pn.position.path()) p.push_back(static_cast<int>(v));
      positions.push_back(p);
    }
    doc["positions"] = positions;
  }
  return doc;
}

}  // namespace mathlm
