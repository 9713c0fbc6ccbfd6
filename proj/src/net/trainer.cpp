// SPDX-License-Identifier: Apache-2.0
#include "mathlm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mathlm/checkpoint.hpp"
#include "mathlm/decoder.hpp"
#include "mathlm/errors.hpp"
#include "mathlm/masked_loss.hpp"

namespace mathlm {

EncodedSequence equation_prompt(std::string_view problem, const Vocabulary& vocab) {
  EncodedSequence seq = encode_document(problem, vocab);
  seq.push(vocab.layout().special(Special::StartFormula), TypeTag::Control);
  return seq;
}

TrainingExample equation_example(std::string_view problem, std::string_view equation, const Vocabulary& vocab,
                                 const NormalizeOptions& options) {
  TrainingExample ex;
  ex.seq = equation_prompt(problem, vocab);
  ex.loss_from = static_cast<int>(ex.seq.size());
  OptNode tree = formula_tree(equation, vocab, options);
  for (const MathItem& item : linearize(tree)) ex.seq.push(vocab.id_of(item.token), type_tag_of(item.token.kind), item.position);
  ex.seq.push(vocab.layout().special(Special::EndFormula), TypeTag::Control);
  return ex;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size}, {"grad_accum", c.grad_accum}, {"max_epochs", c.max_epochs},
          {"patience", c.patience},     {"min_delta", c.min_delta},   {"seed", c.seed},
          {"optimizer", to_json(c.optimizer)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.grad_accum = j.value("grad_accum", c.grad_accum);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.min_delta = j.value("min_delta", c.min_delta);
  c.seed = j.value("seed", c.seed);
  if (j.contains("optimizer")) c.optimizer = optimizer_config_from_json(j.at("optimizer"));
  return c;
}

namespace {

struct Scored {
  EncodedSequence input;  // sequence without its last token
  std::vector<int> targets;
  std::vector<TokenMask> masks;
  int first_row = 0;
};

Scored prepare(const TrainingExample& ex, const Vocabulary& vocab) {
  const int L = static_cast<int>(ex.seq.size());
  if (ex.loss_from < 1 || ex.loss_from >= L + 1) throw ShapeMismatch("loss_from outside the sequence");
  Scored s;
  s.first_row = ex.loss_from - 1;
  std::vector<TokenMask> all = sequence_masks(ex.seq, vocab);
  for (int i = s.first_row; i < L - 1; ++i) {
    s.targets.push_back(ex.seq.ids[static_cast<std::size_t>(i + 1)]);
    s.masks.push_back(std::move(all[static_cast<std::size_t>(i)]));
  }
  s.input.ids.assign(ex.seq.ids.begin(), ex.seq.ids.end() - 1);
  s.input.types.assign(ex.seq.types.begin(), ex.seq.types.end() - 1);
  s.input.positions.assign(ex.seq.positions.begin(), ex.seq.positions.end() - 1);
  return s;
}

std::vector<Matrix> snapshot(const Transformer& m) {
  std::vector<Matrix> out;
  m.for_each_param(ConstParamVisitor([&](const std::string&, const Param& p) { out.push_back(p.value); }));
  return out;
}

void restore(Transformer& m, const std::vector<Matrix>& values) {
  std::size_t i = 0;
  m.for_each_param(ParamVisitor([&](const std::string&, Param& p) { p.value = values.at(i++); }));
}

std::string rng_state(const Rng& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

void set_rng_state(Rng& r, const std::string& s) {
  std::istringstream is(s);
  is >> r;
  if (!is) throw FormatError("bad generator state in checkpoint");
}

}  // namespace

Trainer::Trainer(Transformer& model, TrainConfig config)
    : model_(model),
      config_(std::move(config)),
      optimizer_(config_.optimizer),
      shuffle_rng_(config_.seed),
      dropout_rng_(config_.seed ^ 0x9e3779b97f4a7c15ull) {
  if (config_.batch_size <= 0 || config_.grad_accum <= 0) throw ShapeMismatch("batch sizes must be positive");
  optimizer_.reset(model_);
}

double Trainer::train_step(std::span<const TrainingExample> batch) {
  model_.zero_grad();
  std::vector<Scored> prepared;
  prepared.reserve(batch.size());
  int tokens = 0;
  for (const TrainingExample& ex : batch) {
    prepared.push_back(prepare(ex, model_.vocab()));
    tokens += static_cast<int>(prepared.back().targets.size());
  }
  if (tokens == 0) return 0.0;
  double total = 0.0;
  ForwardCache cache;
  for (const Scored& s : prepared) {
    if (s.targets.empty()) continue;
    Matrix logits = model_.forward_train(s.input, s.first_row, cache, &dropout_rng_);
    LossResult r = masked_loss_with_grad(logits, s.targets, s.masks);
    if (!std::isfinite(r.sum)) throw NonFiniteLoss("loss became " + std::to_string(r.sum));
    total += r.sum;
    model_.backward(cache, r.d_sum / static_cast<double>(tokens));
  }
  optimizer_.step(model_);
  return total / tokens;
}

double Trainer::evaluate_loss(std::span<const TrainingExample> examples) const {
  double total = 0.0;
  long tokens = 0;
  for (const TrainingExample& ex : examples) {
    Scored s = prepare(ex, model_.vocab());
    if (s.targets.empty()) continue;
    Matrix logits = model_.forward(s.input).bottomRows(static_cast<Eigen::Index>(s.targets.size()));
    total += masked_loss_with_grad(logits, s.targets, s.masks, false).sum;
    tokens += static_cast<long>(s.targets.size());
  }
  return tokens ? total / static_cast<double>(tokens) : 0.0;
}

void Trainer::log(const nlohmann::json& record) const {
  if (config_.log_path.empty()) return;
  std::ofstream out(config_.log_path, std::ios::app);
  out << record.dump() << '\n';
}

TrainResult Trainer::fit(std::span<const TrainingExample> train, std::span<const TrainingExample> val,
                         std::optional<int> epoch_limit) {
  const std::size_t per_update = static_cast<std::size_t>(config_.batch_size * config_.grad_accum);
  int ran = 0;
  while (!finished_ && epoch_ < config_.max_epochs) {
    if (epoch_limit && ran >= *epoch_limit) break;
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng_);

    double epoch_loss = 0.0;
    int updates = 0;
    std::vector<TrainingExample> batch;
    for (std::size_t start = 0; start < order.size(); start += per_update) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + per_update); ++k) batch.push_back(train[order[k]]);
      double lr = optimizer_.current_lr();
      double loss = train_step(batch);
      history_.step_losses.push_back(loss);
      epoch_loss += loss;
      ++updates;
      log({{"step", optimizer_.step_count()}, {"loss", loss}, {"lr", lr}});
    }

    EpochRecord rec;
    rec.epoch = epoch_;
    rec.train_loss = updates ? epoch_loss / updates : 0.0;
    rec.val_loss = val.empty() ? rec.train_loss : evaluate_loss(val);
    history_.epochs.push_back(rec);
    log({{"epoch", rec.epoch}, {"train_loss", rec.train_loss}, {"val_loss", rec.val_loss}});

    if (history_.best_epoch < 0 || rec.val_loss < history_.best_val - config_.min_delta) {
      history_.best_epoch = epoch_;
      history_.best_val = rec.val_loss;
      best_params_ = snapshot(model_);
      bad_epochs_ = 0;
    } else if (++bad_epochs_ >= config_.patience) {
      history_.early_stopped = true;
      finished_ = true;
    }
    ++epoch_;
    ++ran;
    if (epoch_ >= config_.max_epochs) finished_ = true;
    if (!config_.checkpoint_path.empty()) save_checkpoint(config_.checkpoint_path);
  }
  if (finished_ && !best_params_.empty()) restore(model_, best_params_);
  return history_;
}

void Trainer::save_checkpoint(const std::string& path) const {
  CheckpointData data;
  data.meta["train"] = to_json(config_);
  nlohmann::json state;
  state["epoch"] = epoch_;
  state["bad_epochs"] = bad_epochs_;
  state["finished"] = finished_;
  state["optimizer_steps"] = optimizer_.step_count();
  state["shuffle_rng"] = rng_state(shuffle_rng_);
  state["dropout_rng"] = rng_state(dropout_rng_);
  state["best_epoch"] = history_.best_epoch;
  state["best_val"] = history_.best_val;
  state["early_stopped"] = history_.early_stopped;
  state["step_losses"] = history_.step_losses;
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochRecord& e : history_.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  state["epochs"] = epochs;
  data.meta["trainer"] = state;
  store_model(data, model_);

  for (std::size_t i = 0; i < optimizer_.first_moments().size(); ++i) {
    data.tensors.emplace_back("adam_m/" + std::to_string(i), optimizer_.first_moments()[i]);
    data.tensors.emplace_back("adam_v/" + std::to_string(i), optimizer_.second_moments()[i]);
  }
  for (std::size_t i = 0; i < best_params_.size(); ++i)
    data.tensors.emplace_back("best/" + std::to_string(i), best_params_[i]);
  write_checkpoint(path, data);
}

void Trainer::load_checkpoint(const std::string& path) {
  CheckpointData data = read_checkpoint(path);
  if (!data.meta.contains("trainer")) throw FormatError(path + ": not a training checkpoint");
  load_params(model_, data);
  const nlohmann::json& s = data.meta.at("trainer");
  epoch_ = s.at("epoch");
  bad_epochs_ = s.at("bad_epochs");
  // A run that stopped only at its epoch cap may continue under a larger cap.
  finished_ = s.at("early_stopped").get<bool>() || epoch_ >= config_.max_epochs;
  set_rng_state(shuffle_rng_, s.at("shuffle_rng"));
  set_rng_state(dropout_rng_, s.at("dropout_rng"));
  history_ = TrainResult{};
  history_.best_epoch = s.at("best_epoch");
  history_.best_val = s.at("best_val");
  history_.early_stopped = s.at("early_stopped");
  history_.step_losses = s.at("step_losses").get<std::vector<double>>();
  for (const auto& e : s.at("epochs")) history_.epochs.push_back({e.at("epoch"), e.at("train_loss"), e.at("val_loss")});

  optimizer_.reset(model_);
  for (std::size_t i = 0; i < optimizer_.first_moments().size(); ++i) {
    const Matrix* m = data.find("adam_m/" + std::to_string(i));
    const Matrix* v = data.find("adam_v/" + std::to_string(i));
    if (!m || !v) throw FormatError(path + ": missing optimizer state");
    optimizer_.first_moments()[i] = *m;
    optimizer_.second_moments()[i] = *v;
  }
  optimizer_.set_step_count(s.at("optimizer_steps"));
  best_params_.clear();
  for (std::size_t i = 0;; ++i) {
    const Matrix* b = data.find("best/" + std::to_string(i));
    if (!b) break;
    best_params_.push_back(*b);
  }
}

}  // namespace mathlm
