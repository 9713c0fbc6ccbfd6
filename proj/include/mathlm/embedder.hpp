// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "mathlm/params.hpp"
#include "mathlm/segment.hpp"
#include "mathlm/tree.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

// Binary tree-position code: each path entry expands to kPositionBits one-hot
// 2-vectors of its binary digits (most significant first), one block per depth
// slot, zero-padded to kMaxTreeDepth slots.
inline constexpr int kPositionBits = 6;
inline constexpr int kTreeCodeSize = 2 * kPositionBits * kMaxTreeDepth;  // 384

// Throws CapExceeded for paths deeper than kMaxTreeDepth or entries >= 64.
Vector bin_encode(const TreePosition& p);

// Indices of the ones in bin_encode(p), ascending.
std::vector<int> bin_active_indices(const TreePosition& p);

struct AblationFlags {
  bool tree_positions = true;   // tree-position embedding term
  bool type_embeddings = true;  // symbol-type embedding term
  bool shared_semantics = true; // math embeddings derived from text embeddings
  bool number_subtrees = true;  // multi-digit numbers as O^N sub-trees

  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct EmbeddingConfig {
  int d_model = 128;
  int max_seq = 1024;
  int phi_hidden = 0;  // 0 means d_model
  double init_std = 0.02;
  double phi_init_std = 1e-3;
  AblationFlags ablation;
};

struct EmbeddingParams {
  Param text_table;     // T x d
  Param seq_pos_table;  // L x d
  Param type_table;     // 6 x d (empty when type embeddings are off)
  Param tree_proj;      // d x 384 (empty when tree positions are off)
  Param phi_w1, phi_b1, phi_w2, phi_b2;  // d -> h -> d correction (empty when semantics are not shared)
  Param special_table;  // 5 x d
  Param math_table;     // (M - 5) x d, only when semantics are not shared

  void for_each(const ParamVisitor& f);
};

// Scratch state kept by embed() for backward().
struct EmbedCache {
  std::vector<int> unique_math;      // math ids (non-special) present in the sequence
  std::vector<int> slot_of_item;     // index into unique_math, or -1
  Matrix text_avg;                   // unique x d, rows are t-bar
  Matrix phi_pre;                    // unique x h, pre-activation of the hidden layer
  Matrix phi_act;                    // unique x h
  std::vector<std::vector<int>> tree_bits;  // per item
};

// Input embedding: token + sequence position + tree position + type.
class Embedder {
 public:
  Embedder(EmbeddingConfig config, std::shared_ptr<const Vocabulary> vocab);

  void init(Rng& rng);
  const EmbeddingConfig& config() const noexcept { return config_; }
  EmbeddingParams& params() noexcept { return params_; }
  const EmbeddingParams& params() const noexcept { return params_; }
  const Vocabulary& vocab() const noexcept { return *vocab_; }

  // Text tokens spelling the math symbol behind a (non-special) math id.
  const std::vector<int>& text_pieces(int math_id) const;

  // Semantic embedding of one token id (text row, special row, or derived math
  // embedding).
  RowVector token_embedding(int id) const;
  // Average of the text-token embeddings spelling a math id.
  RowVector text_average(int math_id) const;

  RowVector tree_position_embedding(const TreePosition& p) const;

  // L x d. Throws SequenceTooLong past max_seq.
  Matrix embed(const EncodedSequence& seq, EmbedCache* cache = nullptr) const;
  // Embedding of a single item at sequence index `index`.
  RowVector embed_item(int id, TypeTag type, const std::optional<TreePosition>& pos, int index) const;

  // Accumulates parameter gradients given dL/d(embeddings).
  void backward(const EncodedSequence& seq, const EmbedCache& cache, const Matrix& d_embed);

 private:
  bool is_derived_math(int id) const;
  RowVector phi(const RowVector& t, RowVector* pre = nullptr, RowVector* act = nullptr) const;

  EmbeddingConfig config_;
  std::shared_ptr<const Vocabulary> vocab_;
  EmbeddingParams params_;
  std::vector<std::vector<int>> pieces_;  // per math id offset
};

// Tanh approximation of GELU and its derivative.
double gelu(double x);
double gelu_grad(double x);

}  // namespace mathlm
