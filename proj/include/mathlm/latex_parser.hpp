// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "mathlm/tree.hpp"

namespace mathlm {

// Parses a LaTeX math subset into a raw operator tree (no End nodes, numbers
// as single Number leaves).
//
// Grammar, loosest binding first:
//
//   relation       := additive (relop additive)*          = < > \le \ge \ne \approx
//   additive       := multiplicative (('+' | '-' | \pm) multiplicative)*
//   multiplicative := unary (('*' | \times | \cdot | '/' | \div) unary)*
//   unary          := ('-' | '+') unary | implicit
//   implicit       := power power*                        juxtaposition, e.g. 9.8t
//   power          := primary ('^' exponent)?             right associative
//   primary        := number | identifier | greek | (..) | {..} | \left(..\right)
//                   | \frac{..}{..} | \sqrt[..]{..} | function power | \operatorname{..}
//
// Juxtaposition therefore binds tighter than explicit division. A run of
// letters is one identifier ("newvelocity"), optionally followed by a
// subscript (x_1, x_{12}). Unary minus is the "-" operator with one child;
// \frac and '/' both produce "/".
//
// Throws SyntaxError carrying the byte offset of the offending input.
OptNode parse_math(std::string_view expr);

// Canonical operator symbols produced by the parser.
bool is_function_symbol(std::string_view symbol);
bool is_relation_symbol(std::string_view symbol);

}  // namespace mathlm
