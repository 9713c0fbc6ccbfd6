// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <vector>

#include "mathlm/embedder.hpp"
#include "mathlm/params.hpp"
#include "mathlm/segment.hpp"
#include "mathlm/vocab.hpp"

namespace mathlm {

struct ModelConfig {
  int d_model = 128;
  int n_layers = 4;
  int n_heads = 4;
  int d_ff = 512;
  int max_seq = 1024;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  int phi_hidden = 0;  // 0 means d_model
  double init_std = 0.02;
  AblationFlags ablation;

  // Throws ShapeMismatch for inconsistent sizes.
  void validate() const;
  EmbeddingConfig embedding() const;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AblationFlags& a);
AblationFlags ablation_from_json(const nlohmann::json& j);

struct BlockParams {
  Param ln1_g, ln1_b;
  Param w_qkv, b_qkv;  // d x 3d: queries, keys, values
  Param w_o, b_o;
  Param ln2_g, ln2_b;
  Param w_ff1, b_ff1;
  Param w_ff2, b_ff2;
};

struct HeadParams {
  Param lnf_g, lnf_b;
  Param w_text, b_text;  // d x T
  Param w_math, b_math;  // d x M
};

// Intermediate values of one block, kept for the backward pass.
struct BlockCache {
  Matrix x_in;
  Matrix xhat1, xhat2;
  Vector rstd1, rstd2;
  Matrix h1, qkv;
  std::vector<Matrix> probs;  // per head, L x L
  Matrix attn;                // concatenated head outputs, L x d
  Matrix drop1, drop2;        // dropout scales (empty when dropout is off)
  Matrix x_mid;
  Matrix h2, ff_pre, ff_act;
};

struct ForwardCache {
  EncodedSequence seq;
  EmbedCache embed;
  std::vector<BlockCache> blocks;
  Matrix xhat_f;
  Vector rstd_f;
  Matrix z;  // final normalized states
  int first_row = 0;
};

// Decoder-only transformer with pre-norm blocks and separate text and math
// output heads whose logits are concatenated over the unified id space.
class Transformer {
 public:
  Transformer(ModelConfig config, std::shared_ptr<const Vocabulary> vocab);

  // Deterministic initialization from config().seed.
  void init();

  const ModelConfig& config() const noexcept { return config_; }
  const Vocabulary& vocab() const noexcept { return *vocab_; }
  std::shared_ptr<const Vocabulary> vocab_ptr() const noexcept { return vocab_; }
  Embedder& embedder() noexcept { return embedder_; }
  const Embedder& embedder() const noexcept { return embedder_; }
  std::vector<BlockParams>& blocks() noexcept { return blocks_; }
  HeadParams& head() noexcept { return head_; }

  // Fixed visiting order, used by the optimizer and checkpoints.
  void for_each_param(const ParamVisitor& f);
  void for_each_param(const ConstParamVisitor& f) const;
  std::size_t parameter_count() const;
  void zero_grad();

  // Logits for every position, L x (T + M). Inference mode (no dropout).
  Matrix forward(const EncodedSequence& seq) const;
  // Same from precomputed input embeddings. Throws ShapeMismatch.
  Matrix forward_embeddings(const Matrix& x) const;

  // Training forward. Logits are produced for rows [first_row, L) only.
  // `dropout_rng` may be null, which disables dropout.
  Matrix forward_train(const EncodedSequence& seq, int first_row, ForwardCache& cache, Rng* dropout_rng);
  // Accumulates gradients for d(loss)/d(logits) of the rows kept by forward_train.
  void backward(const ForwardCache& cache, const Matrix& d_logits);

 private:
  friend class InferenceSession;

  Matrix run_blocks(Matrix x, ForwardCache* cache, Rng* dropout_rng) const;
  Matrix logits_from(const Matrix& z) const;

  ModelConfig config_;
  std::shared_ptr<const Vocabulary> vocab_;
  Embedder embedder_;
  std::vector<BlockParams> blocks_;
  HeadParams head_;
};

// Incremental decoding with a key/value cache. Copyable, so beams can fork.
class InferenceSession {
 public:
  explicit InferenceSession(const Transformer& model);

  // Appends one item and returns the logits for the next token.
  RowVector push(int id, TypeTag type, const std::optional<TreePosition>& pos);
  int length() const noexcept { return length_; }
  const RowVector& last_logits() const noexcept { return last_; }

 private:
  const Transformer* model_;
  std::vector<std::vector<double>> keys_, values_;  // per layer, row-major length_ x d
  int length_ = 0;
  RowVector last_;
};

}  // namespace mathlm
