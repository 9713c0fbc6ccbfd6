// SPDX-License-Identifier: Apache-2.0
#include "mathlm/embedder.hpp"

#include <algorithm>

#include "mathlm/errors.hpp"

namespace mathlm {

void Param::init_normal(Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < value.size(); ++i) value.data()[i] = dist(rng);
}

void EmbeddingParams::for_each(const ParamVisitor& f) {
  auto visit = [&](const char* name, Param& p) {
    if (!p.empty()) f(name, p);
  };
  visit("emb.text", text_table);
  visit("emb.seq_pos", seq_pos_table);
  visit("emb.type", type_table);
  visit("emb.tree_proj", tree_proj);
  visit("emb.phi_w1", phi_w1);
  visit("emb.phi_b1", phi_b1);
  visit("emb.phi_w2", phi_w2);
  visit("emb.phi_b2", phi_b2);
  visit("emb.special", special_table);
  visit("emb.math", math_table);
}

Embedder::Embedder(EmbeddingConfig config, std::shared_ptr<const Vocabulary> vocab)
    : config_(config), vocab_(std::move(vocab)) {
  const int d = config_.d_model;
  const int h = config_.phi_hidden > 0 ? config_.phi_hidden : d;
  const IdLayout& l = vocab_->layout();
  const AblationFlags& a = config_.ablation;

  params_.text_table = Param(l.text.size(), d, false);
  params_.seq_pos_table = Param(config_.max_seq, d, false);
  if (a.type_embeddings) params_.type_table = Param(kNumTypeTags, d, false);
  if (a.tree_positions) params_.tree_proj = Param(d, kTreeCodeSize);
  if (a.shared_semantics) {
    params_.phi_w1 = Param(d, h);
    params_.phi_b1 = Param(1, h, false);
    params_.phi_w2 = Param(h, d);
    params_.phi_b2 = Param(1, d, false);
  } else {
    params_.math_table = Param(l.math.size() - kNumSpecials, d, false);
  }
  params_.special_table = Param(kNumSpecials, d, false);

  pieces_.resize(static_cast<std::size_t>(l.math.size()));
  for (int id = l.specials.end; id < l.math.end; ++id) {
    Token tok = vocab_->token_of(id);
    pieces_[static_cast<std::size_t>(id - l.math.begin)] = vocab_->text().tokenize(text_rendering(tok.symbol));
  }
}

void Embedder::init(Rng& rng) {
  const double s = config_.init_std;
  params_.text_table.init_normal(rng, s);
  params_.seq_pos_table.init_normal(rng, s / 2);
  if (!params_.type_table.empty()) params_.type_table.init_normal(rng, s);
  if (!params_.tree_proj.empty()) params_.tree_proj.init_normal(rng, s / std::sqrt(2.0 * kPositionBits));
  if (!params_.phi_w1.empty()) {
    params_.phi_w1.init_normal(rng, config_.phi_init_std);
    params_.phi_w2.init_normal(rng, config_.phi_init_std);
  }
  params_.special_table.init_normal(rng, s);
  if (!params_.math_table.empty()) params_.math_table.init_normal(rng, s);
}

const std::vector<int>& Embedder::text_pieces(int math_id) const {
  return pieces_.at(static_cast<std::size_t>(math_id - vocab_->layout().math.begin));
}

bool Embedder::is_derived_math(int id) const {
  const IdLayout& l = vocab_->layout();
  return config_.ablation.shared_semantics && l.math.contains(id) && !l.specials.contains(id);
}

RowVector Embedder::text_average(int math_id) const {
  const auto& pieces = text_pieces(math_id);
  RowVector t = RowVector::Zero(config_.d_model);
  for (int p : pieces) t += params_.text_table.value.row(p);
  return t / static_cast<double>(pieces.size());
}

RowVector Embedder::phi(const RowVector& t, RowVector* pre_out, RowVector* act_out) const {
  RowVector pre = t * params_.phi_w1.value + params_.phi_b1.value;
  RowVector act = pre.unaryExpr([](double x) { return gelu(x); });
  RowVector out = act * params_.phi_w2.value + params_.phi_b2.value;
  if (pre_out) *pre_out = std::move(pre);
  if (act_out) *act_out = std::move(act);
  return out;
}

RowVector Embedder::token_embedding(int id) const {
  const IdLayout& l = vocab_->layout();
  if (l.text.contains(id)) return params_.text_table.value.row(id);
  if (l.specials.contains(id)) return params_.special_table.value.row(id - l.specials.begin);
  if (!l.math.contains(id)) throw ShapeMismatch("token id " + std::to_string(id) + " outside the vocabulary");
  if (!config_.ablation.shared_semantics) return params_.math_table.value.row(id - l.specials.end);
  RowVector t = text_average(id);
  return t + phi(t);
}

RowVector Embedder::tree_position_embedding(const TreePosition& p) const {
  RowVector out = RowVector::Zero(config_.d_model);
  if (params_.tree_proj.empty()) return out;
  for (int a : bin_active_indices(p)) out += params_.tree_proj.value.col(a).transpose();
  return out;
}

RowVector Embedder::embed_item(int id, TypeTag type, const std::optional<TreePosition>& pos, int index) const {
  if (index >= config_.max_seq)
    throw SequenceTooLong("position " + std::to_string(index) + " exceeds " + std::to_string(config_.max_seq));
  RowVector x = token_embedding(id) + params_.seq_pos_table.value.row(index);
  if (!params_.type_table.empty()) x += params_.type_table.value.row(static_cast<int>(type));
  if (pos) x += tree_position_embedding(*pos);
  return x;
}

Matrix Embedder::embed(const EncodedSequence& seq, EmbedCache* cache) const {
  const int L = static_cast<int>(seq.size());
  const int d = config_.d_model;
  if (L > config_.max_seq)
    throw SequenceTooLong("sequence of " + std::to_string(L) + " exceeds " + std::to_string(config_.max_seq));
  if (seq.types.size() != seq.ids.size() || seq.positions.size() != seq.ids.size())
    throw ShapeMismatch("encoded sequence fields differ in length");

  EmbedCache local;
  EmbedCache& c = cache ? *cache : local;
  c = EmbedCache{};
  c.slot_of_item.assign(static_cast<std::size_t>(L), -1);
  c.tree_bits.resize(static_cast<std::size_t>(L));

  for (int i = 0; i < L; ++i) {
    int id = seq.ids[static_cast<std::size_t>(i)];
    if (!is_derived_math(id)) continue;
    auto it = std::find(c.unique_math.begin(), c.unique_math.end(), id);
    c.slot_of_item[static_cast<std::size_t>(i)] = static_cast<int>(it - c.unique_math.begin());
    if (it == c.unique_math.end()) c.unique_math.push_back(id);
  }
  Matrix math_rows;
  if (!c.unique_math.empty()) {
    const int U = static_cast<int>(c.unique_math.size());
    const int h = static_cast<int>(params_.phi_w1.value.cols());
    c.text_avg.resize(U, d);
    c.phi_pre.resize(U, h);
    c.phi_act.resize(U, h);
    math_rows.resize(U, d);
    for (int u = 0; u < U; ++u) {
      RowVector t = text_average(c.unique_math[static_cast<std::size_t>(u)]);
      RowVector pre, act;
      RowVector corr = phi(t, &pre, &act);
      c.text_avg.row(u) = t;
      c.phi_pre.row(u) = pre;
      c.phi_act.row(u) = act;
      math_rows.row(u) = t + corr;
    }
  }

  Matrix X(L, d);
  for (int i = 0; i < L; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    int id = seq.ids[ui];
    int slot = c.slot_of_item[ui];
    X.row(i) = slot >= 0 ? RowVector(math_rows.row(slot)) : token_embedding(id);
    X.row(i) += params_.seq_pos_table.value.row(i);
    if (!params_.type_table.empty()) X.row(i) += params_.type_table.value.row(static_cast<int>(seq.types[ui]));
    if (!params_.tree_proj.empty() && seq.positions[ui]) {
      c.tree_bits[ui] = bin_active_indices(*seq.positions[ui]);
      for (int a : c.tree_bits[ui]) X.row(i) += params_.tree_proj.value.col(a).transpose();
    }
  }
  return X;
}

void Embedder::backward(const EncodedSequence& seq, const EmbedCache& c, const Matrix& dX) {
  const IdLayout& l = vocab_->layout();
  const int L = static_cast<int>(seq.size());
  const int U = static_cast<int>(c.unique_math.size());
  Matrix d_math = Matrix::Zero(U, config_.d_model);

  for (int i = 0; i < L; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    int id = seq.ids[ui];
    auto g = dX.row(i);
    params_.seq_pos_table.grad.row(i) += g;
    if (!params_.type_table.empty()) params_.type_table.grad.row(static_cast<int>(seq.types[ui])) += g;
    if (!params_.tree_proj.empty())
      for (int a : c.tree_bits[ui]) params_.tree_proj.grad.col(a) += g.transpose();

    if (c.slot_of_item[ui] >= 0) {
      d_math.row(c.slot_of_item[ui]) += g;
    } else if (l.text.contains(id)) {
      params_.text_table.grad.row(id) += g;
    } else if (l.specials.contains(id)) {
      params_.special_table.grad.row(id - l.specials.begin) += g;
    } else {
      params_.math_table.grad.row(id - l.specials.end) += g;
    }
  }
  if (U == 0) return;

  // emb = t + gelu(t W1 + b1) W2 + b2 for each unique symbol.
  params_.phi_w2.grad += c.phi_act.transpose() * d_math;
  params_.phi_b2.grad += d_math.colwise().sum();
  Matrix d_act = d_math * params_.phi_w2.value.transpose();
  Matrix d_pre = d_act.cwiseProduct(c.phi_pre.unaryExpr([](double x) { return gelu_grad(x); }));
  params_.phi_w1.grad += c.text_avg.transpose() * d_pre;
  params_.phi_b1.grad += d_pre.colwise().sum();
  Matrix d_t = d_math + d_pre * params_.phi_w1.value.transpose();
  for (int u = 0; u < U; ++u) {
    const auto& pieces = text_pieces(c.unique_math[static_cast<std::size_t>(u)]);
    double inv = 1.0 / static_cast<double>(pieces.size());
    for (int p : pieces) params_.text_table.grad.row(p) += inv * d_t.row(u);
  }
}

}  // namespace mathlm
