// SPDX-License-Identifier: Apache-2.0
#include "mathlm/transformer.hpp"

#include <cmath>
#include <limits>

#include "mathlm/errors.hpp"

namespace mathlm {

void ModelConfig::validate() const {
  if (d_model <= 0 || n_layers < 0 || n_heads <= 0 || d_ff <= 0 || max_seq <= 0)
    throw ShapeMismatch("model sizes must be positive");
  if (d_model % n_heads != 0)
    throw ShapeMismatch("d_model " + std::to_string(d_model) + " not divisible by n_heads " + std::to_string(n_heads));
  if (dropout < 0.0 || dropout >= 1.0) throw ShapeMismatch("dropout must lie in [0, 1)");
}

EmbeddingConfig ModelConfig::embedding() const {
  EmbeddingConfig e;
  e.d_model = d_model;
  e.max_seq = max_seq;
  e.phi_hidden = phi_hidden;
  e.init_std = init_std;
  e.ablation = ablation;
  return e;
}

nlohmann::json to_json(const AblationFlags& a) {
  return {{"tree_positions", a.tree_positions},
          {"type_embeddings", a.type_embeddings},
          {"shared_semantics", a.shared_semantics},
          {"number_subtrees", a.number_subtrees}};
}

AblationFlags ablation_from_json(const nlohmann::json& j) {
  AblationFlags a;
  a.tree_positions = j.value("tree_positions", a.tree_positions);
  a.type_embeddings = j.value("type_embeddings", a.type_embeddings);
  a.shared_semantics = j.value("shared_semantics", a.shared_semantics);
  a.number_subtrees = j.value("number_subtrees", a.number_subtrees);
  return a;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"d_model", c.d_model},   {"n_layers", c.n_layers},     {"n_heads", c.n_heads},
          {"d_ff", c.d_ff},         {"max_seq", c.max_seq},       {"dropout", c.dropout},
          {"seed", c.seed},         {"phi_hidden", c.phi_hidden}, {"init_std", c.init_std},
          {"ablation", to_json(c.ablation)}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.max_seq = j.value("max_seq", c.max_seq);
  c.dropout = j.value("dropout", c.dropout);
  c.seed = j.value("seed", c.seed);
  c.phi_hidden = j.value("phi_hidden", c.phi_hidden);
  c.init_std = j.value("init_std", c.init_std);
  if (j.contains("ablation")) c.ablation = ablation_from_json(j.at("ablation"));
  return c;
}

namespace {

constexpr double kLnEps = 1e-5;

// Row-wise layer norm. Returns the normalized rows; gain and bias are applied
// by the caller.
Matrix normalize_rows(const Matrix& x, Matrix& xhat, Vector& rstd) {
  const Eigen::Index n = x.cols();
  Vector mean = x.rowwise().mean();
  xhat = x.colwise() - mean;
  Vector var = xhat.rowwise().squaredNorm() / static_cast<double>(n);
  rstd = (var.array() + kLnEps).rsqrt().matrix();
  xhat = rstd.asDiagonal() * xhat;
  return xhat;
}

Matrix layer_norm(const Matrix& x, const Param& g, const Param& b, Matrix& xhat, Vector& rstd) {
  normalize_rows(x, xhat, rstd);
  return (xhat.array().rowwise() * g.value.row(0).array()).matrix().rowwise() + b.value.row(0);
}

Matrix layer_norm(const Matrix& x, const Param& g, const Param& b) {
  Matrix xhat;
  Vector rstd;
  return layer_norm(x, g, b, xhat, rstd);
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& xhat, const Vector& rstd, Param& g, Param& b) {
  g.grad.row(0) += dy.cwiseProduct(xhat).colwise().sum();
  b.grad.row(0) += dy.colwise().sum();
  Matrix dxhat = (dy.array().rowwise() * g.value.row(0).array()).matrix();
  const double n = static_cast<double>(dy.cols());
  Vector mean_d = dxhat.rowwise().sum() / n;
  Vector mean_dx = dxhat.cwiseProduct(xhat).rowwise().sum() / n;
  Matrix dx = dxhat.colwise() - mean_d;
  dx -= mean_dx.asDiagonal() * xhat;
  return rstd.asDiagonal() * dx;
}

Matrix gelu_m(const Matrix& x) { return x.unaryExpr([](double v) { return gelu(v); }); }

Matrix dropout_scales(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - p);
  Matrix m(rows, cols);
  const double s = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? s : 0.0;
  return m;
}

// Row-wise softmax over the causal (lower-triangular) part of s.
Matrix causal_softmax(const Matrix& s) {
  const Eigen::Index L = s.rows();
  Matrix p = Matrix::Zero(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    double mx = s.row(i).head(i + 1).maxCoeff();
    double total = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) {
      double e = std::exp(s(i, j) - mx);
      p(i, j) = e;
      total += e;
    }
    p.row(i).head(i + 1) /= total;
  }
  return p;
}

}  // namespace

Transformer::Transformer(ModelConfig config, std::shared_ptr<const Vocabulary> vocab)
    : config_(config), vocab_(vocab), embedder_((config.validate(), config.embedding()), vocab) {
  const int d = config_.d_model;
  const int f = config_.d_ff;
  blocks_.resize(static_cast<std::size_t>(config_.n_layers));
  for (BlockParams& b : blocks_) {
    b.ln1_g = Param(1, d, false);
    b.ln1_b = Param(1, d, false);
    b.w_qkv = Param(d, 3 * d);
    b.b_qkv = Param(1, 3 * d, false);
    b.w_o = Param(d, d);
    b.b_o = Param(1, d, false);
    b.ln2_g = Param(1, d, false);
    b.ln2_b = Param(1, d, false);
    b.w_ff1 = Param(d, f);
    b.b_ff1 = Param(1, f, false);
    b.w_ff2 = Param(f, d);
    b.b_ff2 = Param(1, d, false);
  }
  const IdLayout& l = vocab_->layout();
  head_.lnf_g = Param(1, d, false);
  head_.lnf_b = Param(1, d, false);
  head_.w_text = Param(d, l.text.size());
  head_.b_text = Param(1, l.text.size(), false);
  head_.w_math = Param(d, l.math.size());
  head_.b_math = Param(1, l.math.size(), false);
}

void Transformer::init() {
  Rng rng(config_.seed);
  embedder_.init(rng);
  const double s = config_.init_std;
  const double s_out = s / std::sqrt(2.0 * std::max(1, config_.n_layers));
  for (BlockParams& b : blocks_) {
    b.ln1_g.value.setOnes();
    b.ln1_b.value.setZero();
    b.w_qkv.init_normal(rng, s);
    b.b_qkv.value.setZero();
    b.w_o.init_normal(rng, s_out);
    b.b_o.value.setZero();
    b.ln2_g.value.setOnes();
    b.ln2_b.value.setZero();
    b.w_ff1.init_normal(rng, s);
    b.b_ff1.value.setZero();
    b.w_ff2.init_normal(rng, s_out);
    b.b_ff2.value.setZero();
  }
  head_.lnf_g.value.setOnes();
  head_.lnf_b.value.setZero();
  head_.w_text.init_normal(rng, s);
  head_.b_text.value.setZero();
  head_.w_math.init_normal(rng, s);
  head_.b_math.value.setZero();
}

void Transformer::for_each_param(const ParamVisitor& f) {
  embedder_.params().for_each(f);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    BlockParams& b = blocks_[i];
    const std::string p = "block" + std::to_string(i) + ".";
    f(p + "ln1_g", b.ln1_g);
    f(p + "ln1_b", b.ln1_b);
    f(p + "w_qkv", b.w_qkv);
    f(p + "b_qkv", b.b_qkv);
    f(p + "w_o", b.w_o);
    f(p + "b_o", b.b_o);
    f(p + "ln2_g", b.ln2_g);
    f(p + "ln2_b", b.ln2_b);
    f(p + "w_ff1", b.w_ff1);
    f(p + "b_ff1", b.b_ff1);
    f(p + "w_ff2", b.w_ff2);
    f(p + "b_ff2", b.b_ff2);
  }
  f("head.lnf_g", head_.lnf_g);
  f("head.lnf_b", head_.lnf_b);
  f("head.w_text", head_.w_text);
  f("head.b_text", head_.b_text);
  f("head.w_math", head_.w_math);
  f("head.b_math", head_.b_math);
}

void Transformer::for_each_param(const ConstParamVisitor& f) const {
  const_cast<Transformer*>(this)->for_each_param(ParamVisitor([&](const std::string& n, Param& p) { f(n, p); }));
}

std::size_t Transformer::parameter_count() const {
  std::size_t n = 0;
  for_each_param(ConstParamVisitor([&](const std::string&, const Param& p) { n += static_cast<std::size_t>(p.value.size()); }));
  return n;
}

void Transformer::zero_grad() {
  for_each_param(ParamVisitor([](const std::string&, Param& p) { p.zero_grad(); }));
}

Matrix Transformer::run_blocks(Matrix x, ForwardCache* cache, Rng* dropout_rng) const {
  const int d = config_.d_model;
  const int H = config_.n_heads;
  const int dh = d / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index L = x.rows();
  const bool drop = dropout_rng != nullptr && config_.dropout > 0.0;
  if (cache) cache->blocks.assign(blocks_.size(), BlockCache{});

  for (std::size_t li = 0; li < blocks_.size(); ++li) {
    const BlockParams& b = blocks_[li];
    BlockCache local;
    BlockCache& c = cache ? cache->blocks[li] : local;
    if (cache) c.x_in = x;

    c.h1 = layer_norm(x, b.ln1_g, b.ln1_b, c.xhat1, c.rstd1);
    c.qkv = (c.h1 * b.w_qkv.value).rowwise() + b.b_qkv.value.row(0);
    c.attn.resize(L, d);
    if (cache) c.probs.resize(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h) {
      auto q = c.qkv.middleCols(h * dh, dh);
      auto k = c.qkv.middleCols(d + h * dh, dh);
      auto v = c.qkv.middleCols(2 * d + h * dh, dh);
      Matrix p = causal_softmax((q * k.transpose()) * scale);
      c.attn.middleCols(h * dh, dh) = p * v;
      if (cache) c.probs[static_cast<std::size_t>(h)] = std::move(p);
    }
    Matrix o = (c.attn * b.w_o.value).rowwise() + b.b_o.value.row(0);
    if (drop) {
      c.drop1 = dropout_scales(L, d, config_.dropout, *dropout_rng);
      o = o.cwiseProduct(c.drop1);
    }
    x += o;
    if (cache) c.x_mid = x;

    c.h2 = layer_norm(x, b.ln2_g, b.ln2_b, c.xhat2, c.rstd2);
    c.ff_pre = (c.h2 * b.w_ff1.value).rowwise() + b.b_ff1.value.row(0);
    c.ff_act = gelu_m(c.ff_pre);
    Matrix f = (c.ff_act * b.w_ff2.value).rowwise() + b.b_ff2.value.row(0);
    if (drop) {
      c.drop2 = dropout_scales(L, d, config_.dropout, *dropout_rng);
      f = f.cwiseProduct(c.drop2);
    }
    x += f;
  }
  return x;
}

Matrix Transformer::logits_from(const Matrix& z) const {
  const IdLayout& l = vocab_->layout();
  Matrix out(z.rows(), l.total);
  out.leftCols(l.text.size()) = (z * head_.w_text.value).rowwise() + head_.b_text.value.row(0);
  out.rightCols(l.math.size()) = (z * head_.w_math.value).rowwise() + head_.b_math.value.row(0);
  return out;
}

Matrix Transformer::forward_embeddings(const Matrix& x) const {
  if (x.cols() != config_.d_model)
    throw ShapeMismatch("embedding width " + std::to_string(x.cols()) + " != d_model " + std::to_string(config_.d_model));
  if (x.rows() > config_.max_seq)
    throw SequenceTooLong("sequence of " + std::to_string(x.rows()) + " exceeds " + std::to_string(config_.max_seq));
  Matrix h = run_blocks(x, nullptr, nullptr);
  return logits_from(layer_norm(h, head_.lnf_g, head_.lnf_b));
}

Matrix Transformer::forward(const EncodedSequence& seq) const { return forward_embeddings(embedder_.embed(seq)); }

Matrix Transformer::forward_train(const EncodedSequence& seq, int first_row, ForwardCache& cache, Rng* dropout_rng) {
  const int L = static_cast<int>(seq.size());
  if (first_row < 0 || first_row > L) throw ShapeMismatch("first logit row outside the sequence");
  cache.seq = seq;
  cache.first_row = first_row;
  Matrix x = embedder_.embed(seq, &cache.embed);
  Matrix h = run_blocks(std::move(x), &cache, dropout_rng);
  cache.z = layer_norm(h, head_.lnf_g, head_.lnf_b, cache.xhat_f, cache.rstd_f);
  return logits_from(cache.z.bottomRows(L - first_row));
}

void Transformer::backward(const ForwardCache& cache, const Matrix& d_logits) {
  const IdLayout& l = vocab_->layout();
  const Eigen::Index L = cache.z.rows();
  const Eigen::Index R = L - cache.first_row;
  if (d_logits.rows() != R || d_logits.cols() != l.total) throw ShapeMismatch("logit gradient shape");
  const int d = config_.d_model;
  const int H = config_.n_heads;
  const int dh = d / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  auto z_rows = cache.z.bottomRows(R);
  auto d_text = d_logits.leftCols(l.text.size());
  auto d_math = d_logits.rightCols(l.math.size());
  head_.w_text.grad += z_rows.transpose() * d_text;
  head_.b_text.grad += d_text.colwise().sum();
  head_.w_math.grad += z_rows.transpose() * d_math;
  head_.b_math.grad += d_math.colwise().sum();
  Matrix dz = Matrix::Zero(L, d);
  dz.bottomRows(R) = d_text * head_.w_text.value.transpose() + d_math * head_.w_math.value.transpose();
  Matrix dx = layer_norm_backward(dz, cache.xhat_f, cache.rstd_f, head_.lnf_g, head_.lnf_b);

  for (std::size_t li = blocks_.size(); li-- > 0;) {
    BlockParams& b = blocks_[li];
    const BlockCache& c = cache.blocks[li];

    Matrix df = c.drop2.size() ? Matrix(dx.cwiseProduct(c.drop2)) : dx;
    b.w_ff2.grad += c.ff_act.transpose() * df;
    b.b_ff2.grad += df.colwise().sum();
    Matrix d_act = df * b.w_ff2.value.transpose();
    Matrix d_pre = d_act.cwiseProduct(c.ff_pre.unaryExpr([](double v) { return gelu_grad(v); }));
    b.w_ff1.grad += c.h2.transpose() * d_pre;
    b.b_ff1.grad += d_pre.colwise().sum();
    Matrix dh2 = d_pre * b.w_ff1.value.transpose();
    dx += layer_norm_backward(dh2, c.xhat2, c.rstd2, b.ln2_g, b.ln2_b);

    Matrix d_o = c.drop1.size() ? Matrix(dx.cwiseProduct(c.drop1)) : dx;
    b.w_o.grad += c.attn.transpose() * d_o;
    b.b_o.grad += d_o.colwise().sum();
    Matrix d_attn = d_o * b.w_o.value.transpose();

    Matrix d_qkv(L, 3 * d);
    for (int h = 0; h < H; ++h) {
      const Matrix& p = c.probs[static_cast<std::size_t>(h)];
      auto q = c.qkv.middleCols(h * dh, dh);
      auto k = c.qkv.middleCols(d + h * dh, dh);
      auto v = c.qkv.middleCols(2 * d + h * dh, dh);
      auto da = d_attn.middleCols(h * dh, dh);
      Matrix dp = da * v.transpose();
      d_qkv.middleCols(2 * d + h * dh, dh) = p.transpose() * da;
      Vector row_dot = dp.cwiseProduct(p).rowwise().sum();
      Matrix ds = p.cwiseProduct(dp.colwise() - row_dot) * scale;
      d_qkv.middleCols(h * dh, dh) = ds * k;
      d_qkv.middleCols(d + h * dh, dh) = ds.transpose() * q;
    }
    b.w_qkv.grad += c.h1.transpose() * d_qkv;
    b.b_qkv.grad += d_qkv.colwise().sum();
    Matrix dh1 = d_qkv * b.w_qkv.value.transpose();
    dx += layer_norm_backward(dh1, c.xhat1, c.rstd1, b.ln1_g, b.ln1_b);
  }
  embedder_.backward(cache.seq, cache.embed, dx);
}

InferenceSession::InferenceSession(const Transformer& model)
    : model_(&model), keys_(model.blocks_.size()), values_(model.blocks_.size()) {}

RowVector InferenceSession::push(int id, TypeTag type, const std::optional<TreePosition>& pos) {
  const Transformer& m = *model_;
  const int d = m.config_.d_model;
  const int H = m.config_.n_heads;
  const int dh = d / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Matrix x = m.embedder_.embed_item(id, type, pos, length_);
  const int T = length_ + 1;
  for (std::size_t li = 0; li < m.blocks_.size(); ++li) {
    const BlockParams& b = m.blocks_[li];
    Matrix h1 = layer_norm(x, b.ln1_g, b.ln1_b);
    RowVector qkv = h1 * b.w_qkv.value + b.b_qkv.value;
    auto& K = keys_[li];
    auto& V = values_[li];
    K.insert(K.end(), qkv.data() + d, qkv.data() + 2 * d);
    V.insert(V.end(), qkv.data() + 2 * d, qkv.data() + 3 * d);
    Eigen::Map<const RowMajor> kmat(K.data(), T, d);
    Eigen::Map<const RowMajor> vmat(V.data(), T, d);
    RowVector attn(d);
    for (int h = 0; h < H; ++h) {
      RowVector s = (qkv.segment(h * dh, dh) * kmat.middleCols(h * dh, dh).transpose()) * scale;
      double mx = s.maxCoeff();
      RowVector p = (s.array() - mx).exp().matrix();
      p /= p.sum();
      attn.segment(h * dh, dh) = p * vmat.middleCols(h * dh, dh);
    }
    x += attn * b.w_o.value + b.b_o.value;
    Matrix h2 = layer_norm(x, b.ln2_g, b.ln2_b);
    Matrix a = gelu_m((h2 * b.w_ff1.value).rowwise() + b.b_ff1.value.row(0));
    x += a * b.w_ff2.value + b.b_ff2.value;
  }
  length_ = T;
  last_ = m.logits_from(layer_norm(x, m.head_.lnf_g, m.head_.lnf_b)).row(0);
  return last_;
}

}  // namespace mathlm
