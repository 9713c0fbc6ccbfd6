// SPDX-License-Identifier: Apache-2.0
#include "mathlm/segment.hpp"

#include "mathlm/errors.hpp"
#include "mathlm/latex_parser.hpp"

namespace mathlm {

void EncodedSequence::append(const EncodedSequence& other) {
  ids.insert(ids.end(), other.ids.begin(), other.ids.end());
  types.insert(types.end(), other.types.begin(), other.types.end());
  positions.insert(positions.end(), other.positions.begin(), other.positions.end());
}

std::vector<Region> split_regions(std::string_view doc) {
  std::vector<Region> regions;
  std::string text;
  std::size_t text_start = 0;
  std::size_t i = 0;
  auto flush_text = [&] {
    if (!text.empty()) regions.push_back({false, std::move(text), text_start});
    text.clear();
  };
  while (i < doc.size()) {
    if (doc[i] == '\\' && i + 1 < doc.size() && doc[i + 1] == '$') {
      if (text.empty()) text_start = i;
      text += "\\$";
      i += 2;
      continue;
    }
    if (doc[i] != '$') {
      if (text.empty()) text_start = i;
      text += doc[i++];
      continue;
    }
    flush_text();
    std::size_t open = i;
    std::string_view delim = (i + 1 < doc.size() && doc[i + 1] == '$') ? "$$" : "$";
    std::size_t content = i + delim.size();
    std::size_t close = content;
    for (;;) {
      close = doc.find(delim, close);
      if (close == std::string_view::npos) throw UnbalancedDelimiter(open);
      if (close > content && doc[close - 1] == '\\') {
        ++close;
        continue;
      }
      break;
    }
    regions.push_back({true, std::string(doc.substr(content, close - content)), content});
    i = close + delim.size();
  }
  flush_text();
  return regions;
}

OptNode formula_tree(std::string_view latex, const Vocabulary& vocab, const NormalizeOptions& options,
                     std::size_t base_offset) {
  OptNode raw;
  try {
    raw = parse_math(latex);
  } catch (const SyntaxError& e) {
    throw SyntaxError(e.detail(), e.offset() + base_offset);
  }
  return normalize_tree(raw, vocab.math(), vocab.text(), options);
}

MixedSequence segment_regions(std::string_view doc, const Vocabulary& vocab, const NormalizeOptions& options) {
  MixedSequence out;
  for (const Region& r : split_regions(doc)) {
    if (!r.is_math) {
      out.push_back({make_token(TokenKind::Text, r.text), std::nullopt, TypeTag::Text});
      continue;
    }
    OptNode tree = formula_tree(r.text, vocab, options, r.offset);
    out.push_back({make_token(TokenKind::StartFormula), std::nullopt, TypeTag::Control});
    for (auto& item : linearize(tree))
      out.push_back({item.token, std::move(item.position), type_tag_of(item.token.kind)});
    out.push_back({make_token(TokenKind::EndFormula), std::nullopt, TypeTag::Control});
  }
  return out;
}

EncodedSequence encode(const MixedSequence& seq, const Vocabulary& vocab) {
  EncodedSequence out;
  for (const SeqItem& item : seq) {
    if (item.token.kind == TokenKind::Text) {
      for (int id : vocab.text().tokenize(item.token.symbol)) out.push(id, TypeTag::Text);
      continue;
    }
    out.push(vocab.id_of(item.token), item.type, item.position);
  }
  return out;
}

EncodedSequence encode_document(std::string_view doc, const Vocabulary& vocab, const NormalizeOptions& options) {
  return encode(segment_regions(doc, vocab, options), vocab);
}

std::vector<DecodedFormula> decode_formulas(const EncodedSequence& seq, const Vocabulary& vocab) {
  const int start = vocab.layout().special(Special::StartFormula);
  const int stop = vocab.layout().special(Special::EndFormula);
  std::vector<DecodedFormula> out;
  std::size_t i = 0;
  while (i < seq.size()) {
    if (seq.ids[i] != start) {
      ++i;
      continue;
    }
    DecodedFormula f;
    f.begin = i;
    std::vector<MathItem> items;
    std::size_t j = i + 1;
    for (; j < seq.size() && seq.ids[j] != stop; ++j) {
      Token tok = vocab.token_of(seq.ids[j]);
      if (tok.kind == TokenKind::Text) tok.kind = TokenKind::MathText;
      if (!seq.positions[j]) {
        f.error = "formula token without a tree position";
        break;
      }
      items.push_back({std::move(tok), *seq.positions[j]});
    }
    while (j < seq.size() && seq.ids[j] != stop) ++j;
    f.terminated = j < seq.size();
    f.end = f.terminated ? j + 1 : j;
    if (f.error.empty()) {
      try {
        f.tree = delinearize(items);
      } catch (const InvalidTraversal& e) {
        f.error = e.what();
      }
    }
    i = f.end;
    out.push_back(std::move(f));
  }
  return out;
}

std::string decode_document(const EncodedSequence& seq, const Vocabulary& vocab, const PrintOptions& print) {
  std::string out;
  std::size_t i = 0;
  auto formulas = decode_formulas(seq, vocab);
  std::size_t next_formula = 0;
  std::vector<int> text_run;
  auto flush = [&] {
    out += vocab.text().detokenize(text_run);
    text_run.clear();
  };
  while (i < seq.size()) {
    if (next_formula < formulas.size() && formulas[next_formula].begin == i) {
      flush();
      const DecodedFormula& f = formulas[next_formula++];
      std::string latex = "?";
      if (f.tree) {
        try {
          latex = tree_to_latex(*f.tree, print);
        } catch (const UnprintableNode&) {
        }
      }
      out += "$" + latex + "$";
      i = f.end;
      continue;
    }
    if (vocab.layout().text.contains(seq.ids[i])) text_run.push_back(seq.ids[i]);
    ++i;
  }
  flush();
  return out;
}

}  // namespace mathlm
