// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mathlm/vocab.hpp"

namespace mathlm {

struct CorpusExample {
  std::string problem;
  std::string equation;  // LaTeX without $ delimiters

  friend bool operator==(const CorpusExample&, const CorpusExample&) = default;
};

// A numeric slot: integers in [lo, hi], or decimals with `decimals` places
// drawn from the same range of whole parts.
struct SlotRange {
  std::string name;
  int lo = 1;
  int hi = 9;
  int decimals = 0;
};

// Text and equation with {name} slots; {v} is the unknown.
struct ProblemTemplate {
  std::string text;
  std::string equation;
  std::vector<SlotRange> slots;
};

std::vector<ProblemTemplate> default_templates();

struct CorpusOptions {
  double other_letter_rate = 0.15;  // unknown is a letter other than x
  double oov_name_rate = 0.10;      // unknown is a multi-letter word
};

// Deterministic under `seed`. Every equation parses, normalizes and has an
// exact rational solution.
std::vector<CorpusExample> generate_corpus(int n, std::uint64_t seed,
                                           const std::vector<ProblemTemplate>& templates = default_templates(),
                                           const CorpusOptions& options = {});

struct CorpusSplits {
  std::vector<CorpusExample> train, val, test;
};

// 80/10/10 in order.
CorpusSplits split_corpus(const std::vector<CorpusExample>& examples);

// Fold index of every example for k-fold cross-validation, balanced and
// shuffled under `seed`.
std::vector<int> cv_fold_assignment(std::size_t n, int k, std::uint64_t seed);

// JSON lines {"problem": ..., "equation": ...}.
void write_jsonl(const std::string& path, const std::vector<CorpusExample>& examples);
std::vector<CorpusExample> read_jsonl(const std::string& path);

// Writes train.jsonl, val.jsonl and test.jsonl under `dir`.
CorpusSplits write_corpus(const std::string& dir, int n, std::uint64_t seed);

// Text vocabulary trained on problems and equations, with the default math
// vocabulary. With `number_tokens` the multi-character numbers of the
// equations become whole-number math tokens.
Vocabulary corpus_vocabulary(const std::vector<CorpusExample>& examples, std::size_t max_words, bool number_tokens);

}  // namespace mathlm
