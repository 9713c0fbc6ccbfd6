// SPDX-License-Identifier: Apache-2.0
#include "mathlm/inspect.hpp"

#include <iomanip>
#include <sstream>

#include "mathlm/embedder.hpp"
#include "mathlm/latex_parser.hpp"
#include "mathlm/latex_printer.hpp"
#include "mathlm/tree_json.hpp"

namespace mathlm {

std::string position_code_string(const TreePosition& p) {
  Vector code = bin_encode(p);
  std::string out;
  for (std::size_t level = 0; level < p.depth(); ++level) {
    if (level) out += ' ';
    for (int k = 0; k < 2 * kPositionBits; ++k)
      out += code[static_cast<Eigen::Index>(level) * 2 * kPositionBits + k] > 0.5 ? '1' : '0';
  }
  return out.empty() ? "-" : out;
}

std::string inspect_expression(std::string_view latex, const Vocabulary& vocab, const InspectOptions& options) {
  OptNode raw = parse_math(latex);
  OptNode tree = normalize_tree(raw, vocab.math(), vocab.text(), options.normalize);
  std::ostringstream os;
  os << "input: " << latex << "\n\n";
  os << "parsed tree:\n" << pretty_print(raw) << '\n';
  os << "normalized tree:\n" << pretty_print(tree) << '\n';
  os << "traversal:\n";
  for (const MathItem& item : linearize(tree)) {
    os << "  " << std::left << std::setw(10) << display(item.token) << ' ' << std::setw(14) << item.position.to_string()
       << std::setw(10) << type_tag_name(type_tag_of(item.token.kind));
    if (options.bits) os << position_code_string(item.position);
    os << '\n';
  }
  os << "\njson: " << tree_document(tree, true).dump() << "\n\n";
  os << "latex: " << tree_to_latex(tree) << '\n';
  return os.str();
}

}  // namespace mathlm
