// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "mathlm/decoder.hpp"
#include "mathlm/transformer.hpp"

namespace mathlm {

enum class SearchMode { Greedy, Beam, Sample };

struct GenerateOptions {
  SearchMode mode = SearchMode::Greedy;
  int beam_width = 3;
  int top_k = 0;  // sampling only, 0 keeps every allowed token
  double temperature = 1.0;
  int max_len = 1024;      // total length including the prompt
  int max_formulas = 1;    // stop after this many completed formulas, 0 for no limit
  std::uint64_t seed = 0;  // sampling only
};

struct Generation {
  EncodedSequence seq;  // prompt followed by generated tokens
  std::size_t prompt_length = 0;
  DecoderState state;
  double log_prob = 0.0;    // sum over generated tokens, under the masks
  bool hit_max_len = false;
};

// Minimal number of tokens needed to close every open structure (pending
// children, End tokens, F^e). Zero outside formulas.
int closing_cost(const DecoderState& state);

// Decodes from `prompt` with every token drawn from allowed_next. Near max_len
// only tokens that still allow the open formula to close are kept, so every
// formula span in the output delinearizes. Ties break toward the lower id.
// Throws IllegalToken for an invalid prompt and LengthExceeded when the prompt
// leaves no room to close its open formula.
Generation generate(const Transformer& model, const EncodedSequence& prompt, const GenerateOptions& options = {});

}  // namespace mathlm
