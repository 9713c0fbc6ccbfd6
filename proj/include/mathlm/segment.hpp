// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mathlm/latex_printer.hpp"
#include "mathlm/normalize.hpp"
#include "mathlm/tree.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

struct SeqItem {
  Token token;
  std::optional<TreePosition> position;  // set for formula tree nodes only
  TypeTag type = TypeTag::Text;

  friend bool operator==(const SeqItem&, const SeqItem&) = default;
};

// Text regions are single Text items holding the raw region string until
// encode() tokenizes them.
using MixedSequence = std::vector<SeqItem>;

struct Region {
  bool is_math = false;
  std::string text;     // region content without delimiters
  std::size_t offset;   // byte offset of the content in the document
};

// Splits on $...$ and $$...$$. A backslash-escaped \$ stays in the text.
// Throws UnbalancedDelimiter at the offset of an unclosed opener.
std::vector<Region> split_regions(std::string_view doc);

// Parses and normalizes a single formula. Syntax error offsets are shifted by
// `base_offset`.
OptNode formula_tree(std::string_view latex, const Vocabulary& vocab, const NormalizeOptions& options = {},
                     std::size_t base_offset = 0);

// Text regions become Text items; each formula becomes F^s, its normalized
// tree in pre-order, F^e.
MixedSequence segment_regions(std::string_view doc, const Vocabulary& vocab, const NormalizeOptions& options = {});

// Token-level form fed to the model.
struct EncodedSequence {
  std::vector<int> ids;
  std::vector<TypeTag> types;
  std::vector<std::optional<TreePosition>> positions;

  std::size_t size() const noexcept { return ids.size(); }
  void push(int id, TypeTag type, std::optional<TreePosition> pos = std::nullopt) {
    ids.push_back(id);
    types.push_back(type);
    positions.push_back(std::move(pos));
  }
  void append(const EncodedSequence& other);
  friend bool operator==(const EncodedSequence&, const EncodedSequence&) = default;
};

EncodedSequence encode(const MixedSequence& seq, const Vocabulary& vocab);
EncodedSequence encode_document(std::string_view doc, const Vocabulary& vocab, const NormalizeOptions& options = {});

struct DecodedFormula {
  std::size_t begin = 0;  // index of F^s
  std::size_t end = 0;    // one past F^e (or sequence end when unterminated)
  bool terminated = false;
  std::optional<OptNode> tree;  // empty when the span does not delinearize
  std::string error;
};

// Finds every formula span and delinearizes it. Text ids inside a span are
// read as MathText.
std::vector<DecodedFormula> decode_formulas(const EncodedSequence& seq, const Vocabulary& vocab);

// Back to a document string: text detokenized, formulas printed as $latex$.
// Formulas that fail to decode or print are rendered as $?$.
std::string decode_document(const EncodedSequence& seq, const Vocabulary& vocab, const PrintOptions& print = {});

}  // namespace mathlm
