// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mathlm/tree.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

struct NormalizeOptions {
  // Multi-character numbers become O^N sub-trees. When off, numbers listed in
  // MathVocab::numbers stay single tokens and the rest still become sub-trees.
  bool number_subtrees = true;
};

// Rewrites a raw operator tree into model form:
//  - every parent gets a trailing End child;
//  - multi-character numbers become NumHead(digit..., End), single digits stay leaves;
//  - out-of-vocabulary variables become OovHead(text token..., End).
// Idempotent on already-normalized trees. Throws CapExceeded past the depth or
// width caps and VocabError for operators missing from the vocabulary.
OptNode normalize_tree(const OptNode& raw, const MathVocab& math, const TextVocab& text,
                       const NormalizeOptions& options = {});

// Replaces each NumHead sub-tree with a single Number leaf (End children kept
// elsewhere). Used when scoring tree distances with numbers as atoms.
OptNode collapse_number_subtrees(const OptNode& tree);

// Symbol spelled by a NumHead or OovHead sub-tree, e.g. "9.8", "newvelocity".
std::string spelled_symbol(const OptNode& head);

}  // namespace mathlm
