// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mathlm/optimizer.hpp"
#include "mathlm/transformer.hpp"

namespace mathlm {

// A training sequence and the index of its first scored token. Tokens before
// `loss_from` form the prompt.
struct TrainingExample {
  EncodedSequence seq;
  int loss_from = 1;
};

// Problem text, then F^s, the equation tree and F^e. The loss starts at the
// first tree token, so the prompt ends with F^s.
TrainingExample equation_example(std::string_view problem, std::string_view equation, const Vocabulary& vocab,
                                 const NormalizeOptions& options = {});
// Prompt part of equation_example: problem text followed by F^s.
EncodedSequence equation_prompt(std::string_view problem, const Vocabulary& vocab);

// Tokenized dataset file: magic, count, then per example loss_from, ids,
// type tags and tree positions. Throws FormatError on malformed input.
void save_examples(const std::string& path, std::span<const TrainingExample> examples);
std::vector<TrainingExample> load_examples(const std::string& path);

struct TrainConfig {
  int batch_size = 4;
  int grad_accum = 4;
  int max_epochs = 20;
  int patience = 3;  // epochs without validation improvement before stopping
  double min_delta = 0.0;
  std::uint64_t seed = 0;  // shuffling and dropout
  OptimizerConfig optimizer;
  std::string log_path;         // JSON lines, empty disables
  std::string checkpoint_path;  // written at every epoch end, empty disables
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  std::vector<double> step_losses;
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val = 0.0;
  bool early_stopped = false;
};

class Trainer {
 public:
  Trainer(Transformer& model, TrainConfig config);

  // One optimizer update over all examples in `batch`, with the loss averaged
  // per scored token. Throws NonFiniteLoss.
  double train_step(std::span<const TrainingExample> batch);

  // Per-token loss without parameter updates.
  double evaluate_loss(std::span<const TrainingExample> examples) const;

  // Runs epochs until max_epochs or early stopping; the best validation
  // parameters are restored at the end. `epoch_limit` stops after that many
  // epochs of this call without finishing (used to emulate interruption).
  TrainResult fit(std::span<const TrainingExample> train, std::span<const TrainingExample> val,
                  std::optional<int> epoch_limit = std::nullopt);

  void save_checkpoint(const std::string& path) const;
  // Restores model, optimizer and trainer state from save_checkpoint output.
  void load_checkpoint(const std::string& path);

  int epoch() const noexcept { return epoch_; }
  AdamW& optimizer() noexcept { return optimizer_; }
  const TrainResult& history() const noexcept { return history_; }

 private:
  void log(const nlohmann::json& record) const;

  Transformer& model_;
  TrainConfig config_;
  AdamW optimizer_;
  Rng shuffle_rng_;
  Rng dropout_rng_;
  int epoch_ = 0;
  int bad_epochs_ = 0;
  bool finished_ = false;
  std::vector<Matrix> best_params_;
  TrainResult history_;
};

}  // namespace mathlm
