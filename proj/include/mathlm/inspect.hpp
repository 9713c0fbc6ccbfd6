// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "mathlm/normalize.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

struct InspectOptions {
  NormalizeOptions normalize;
  bool bits = true;  // include the binary position codes
};

// Human-readable dump of every stage for one formula: raw tree, normalized
// tree with positions, traversal with type tags and position codes, the
// 3-tuple JSON document, and the LaTeX printed back from the tree.
// Throws SyntaxError with the input offset on invalid LaTeX.
std::string inspect_expression(std::string_view latex, const Vocabulary& vocab, const InspectOptions& options = {});

// Position code as one 12-character group per level, e.g. "101010101001".
std::string position_code_string(const TreePosition& p);

}  // namespace mathlm
