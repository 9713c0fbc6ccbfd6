// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mathlm/tree.hpp"

namespace mathlm {

struct PrintOptions {
  bool use_frac = false;  // print "/" as \frac{..}{..}
};

// Prints a raw or normalized tree back to the parser's LaTeX subset using the
// fewest parentheses that keep parse_math's reading identical. Products print
// as juxtaposition when the right operand starts with a letter, a command or a
// parenthesis, otherwise as \times. Throws UnprintableNode for operators with
// the wrong arity, operators the grammar cannot express, misplaced End nodes,
// or sub-trees that do not spell a number / identifier.
std::string tree_to_latex(const OptNode& tree, const PrintOptions& options = {});

}  // namespace mathlm
