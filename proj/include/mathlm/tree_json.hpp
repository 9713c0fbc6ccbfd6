// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <string_view>

#include "mathlm/tree.hpp"

namespace mathlm {

// Tree file format: every node is a 3-tuple [type, name, children-or-null].
// Types: "O" operator, "V" variable, "N" number or digit, "E" end,
// "ON" number head, "OU" out-of-vocabulary head, "T" text token.
nlohmann::json tree_to_json(const OptNode& tree);
OptNode tree_from_json(const nlohmann::json& j);

// {"tree": <3-tuple>, "positions": [[...], ...]} with positions in pre-order.
nlohmann::json tree_document(const OptNode& tree, bool with_positions);

std::string_view type_string(TokenKind kind);

}  // namespace mathlm
