// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <set>

#include "mathlm/embedder.hpp"
#include "mathlm/errors.hpp"
#include "mathlm/transformer.hpp"
#include "test_support.hpp"

using namespace mathlm;

namespace {

std::shared_ptr<const Vocabulary> shared_vocab() {
  return std::make_shared<const Vocabulary>(testing::fixture_vocab());
}

Embedder make_embedder(AblationFlags flags = {}, int d = 16, std::uint64_t seed = 1) {
  EmbeddingConfig c;
  c.d_model = d;
  c.max_seq = 32;
  c.ablation = flags;
  Embedder e(c, shared_vocab());
  Rng rng(seed);
  e.init(rng);
  return e;
}

}  // namespace

TEST_CASE("binary position code") {
  CHECK(bin_encode(TreePosition{}).isZero());
  CHECK(bin_encode(TreePosition{}).size() == 384);

  // Entry 5 = 000101: pairs (1,0)(1,0)(1,0)(0,1)(1,0)(0,1).
  CHECK(bin_active_indices(TreePosition{5}) == std::vector<int>{0, 2, 4, 7, 8, 11});

  // [1,3]: 000001 then 000011, hand expanded into the first two blocks of 12.
  Vector v = bin_encode(TreePosition{1, 3});
  std::vector<int> ones;
  for (int i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) ones.push_back(i);
  CHECK(ones == std::vector<int>{0, 2, 4, 6, 8, 11, 12, 14, 16, 18, 21, 23});
  CHECK(v.head(24).sum() == 12.0);
  CHECK(v.tail(384 - 24).isZero());

  CHECK_THROWS_AS(bin_encode(TreePosition{64}), CapExceeded);
  std::vector<std::uint8_t> deep(33, 0);
  CHECK_THROWS_AS(bin_encode(TreePosition(deep)), CapExceeded);
  CHECK_NOTHROW(bin_encode(TreePosition(std::vector<std::uint8_t>(32, 63))));
}

TEST_CASE("binary position code is injective") {
  std::set<std::vector<int>> seen;
  std::size_t total = 0;
  std::vector<TreePosition> frontier = {TreePosition{}};
  for (int depth = 0; depth <= 2; ++depth) {
    std::vector<TreePosition> next;
    for (const auto& p : frontier) {
      seen.insert(bin_active_indices(p));
      ++total;
      if (depth < 2)
        for (int j = 0; j < kMaxChildren; ++j) next.push_back(p.child(j));
    }
    frontier = std::move(next);
  }
  CHECK(seen.size() == total);
}

TEST_CASE("tree position embedding") {
  Embedder e = make_embedder();
  CHECK(e.tree_position_embedding(TreePosition{}).isZero());
  CHECK(e.tree_position_embedding(TreePosition{1, 2}) == e.tree_position_embedding(TreePosition{1, 2}));
  // Collision scan over all paths of depth <= 3 with entries < 8.
  std::vector<RowVector> embs;
  std::vector<TreePosition> all;
  for (int a = 0; a < 8; ++a) {
    all.push_back({a});
    for (int b = 0; b < 8; ++b) {
      all.push_back({a, b});
      for (int c = 0; c < 8; ++c) all.push_back({a, b, c});
    }
  }
  for (const auto& p : all) embs.push_back(e.tree_position_embedding(p));
  double min_gap = 1e9;
  for (std::size_t i = 0; i < embs.size(); ++i)
    for (std::size_t j = i + 1; j < embs.size(); ++j) min_gap = std::min(min_gap, (embs[i] - embs[j]).norm());
  CHECK(min_gap > 1e-6);
}

TEST_CASE("math embeddings start close to their text average") {
  Embedder e = make_embedder({}, 32);
  const IdLayout& l = e.vocab().layout();
  for (int id = l.specials.end; id < l.math.end; ++id) {
    RowVector t = e.text_average(id);
    REQUIRE(t.norm() > 0.0);
    CHECK((e.token_embedding(id) - t).norm() / t.norm() < 0.05);
  }
  // Single-piece symbol: the average is that piece.
  int x = e.vocab().id_of(make_token(TokenKind::Variable, "x"));
  REQUIRE(e.text_pieces(x).size() == 1);
  CHECK(e.text_average(x) == e.params().text_table.value.row('x'));
  int alpha = e.vocab().id_of(make_token(TokenKind::Variable, "\\alpha"));
  CHECK(e.text_pieces(alpha) == e.vocab().text().tokenize("alpha"));
  // Specials come from their own table.
  int fs = l.special(Special::StartFormula);
  CHECK(e.token_embedding(fs) == e.params().special_table.value.row(0));
}

TEST_CASE("sequence embedding sums its four terms") {
  Embedder e = make_embedder();
  const Vocabulary& v = e.vocab();
  const auto& p = e.params();
  EncodedSequence seq = encode_document("the $a+2$", v);
  Matrix X = e.embed(seq);
  REQUIRE(X.rows() == static_cast<Eigen::Index>(seq.size()));

  // Text item: token + position + Text type.
  RowVector text0 = p.text_table.value.row(seq.ids[0]) + p.seq_pos_table.value.row(0) + p.type_table.value.row(0);
  CHECK((X.row(0) - text0).norm() < 1e-12);

  // Root operator: tree term is zero, type term is Operator.
  const int r = static_cast<int>(std::find(seq.ids.begin(), seq.ids.end(), v.layout().special(Special::StartFormula)) -
                                 seq.ids.begin()) + 1;
  const auto ur = static_cast<std::size_t>(r);
  REQUIRE(seq.positions[ur] == TreePosition{});
  RowVector root = e.token_embedding(seq.ids[ur]) + p.seq_pos_table.value.row(r) +
                   p.type_table.value.row(static_cast<int>(TypeTag::Operator));
  CHECK((X.row(r) - root).norm() < 1e-12);

  // Child: adds W bin(p).
  REQUIRE(seq.positions[ur + 1] == TreePosition{0});
  RowVector child = e.token_embedding(seq.ids[ur + 1]) + p.seq_pos_table.value.row(r + 1) +
                    p.type_table.value.row(static_cast<int>(TypeTag::Variable)) +
                    (p.tree_proj.value * bin_encode(TreePosition{0})).transpose();
  CHECK((X.row(r + 1) - child).norm() < 1e-12);
  for (int i = 0; i < X.rows(); ++i)
    CHECK((X.row(i) - e.embed_item(seq.ids[static_cast<std::size_t>(i)], seq.types[static_cast<std::size_t>(i)],
                                   seq.positions[static_cast<std::size_t>(i)], i))
              .norm() < 1e-12);

  EncodedSequence long_seq;
  for (int i = 0; i < 33; ++i) long_seq.push('a', TypeTag::Text);
  CHECK_THROWS_AS(e.embed(long_seq), SequenceTooLong);
}

TEST_CASE("ablations remove their terms") {
  AblationFlags no_tpe;
  no_tpe.tree_positions = false;
  Embedder e = make_embedder(no_tpe);
  CHECK(e.params().tree_proj.empty());
  CHECK(e.tree_position_embedding(TreePosition{1, 2}).isZero());
  EncodedSequence seq = encode_document("$a+2$", e.vocab());
  Matrix X = e.embed(seq);
  RowVector expect = e.token_embedding(seq.ids[2]) + e.params().seq_pos_table.value.row(2) +
                     e.params().type_table.value.row(static_cast<int>(TypeTag::Variable));
  CHECK((X.row(2) - expect).norm() < 1e-12);

  AblationFlags no_se;
  no_se.shared_semantics = false;
  Embedder s = make_embedder(no_se);
  CHECK(s.params().phi_w1.empty());
  CHECK(s.params().math_table.value.rows() == s.vocab().layout().math.size() - kNumSpecials);
}

TEST_CASE("parameter count follows the ablation flags") {
  auto vocab = shared_vocab();
  const int d = 16, M = vocab->layout().math.size();
  auto count = [&](AblationFlags a) {
    ModelConfig c;
    c.d_model = d;
    c.n_layers = 1;
    c.n_heads = 2;
    c.d_ff = 32;
    c.max_seq = 64;
    c.ablation = a;
    return static_cast<long>(Transformer(c, vocab).parameter_count());
  };
  long full = count({});
  AblationFlags a;
  a.tree_positions = false;
  CHECK(full - count(a) == static_cast<long>(d) * kTreeCodeSize);
  a = {};
  a.type_embeddings = false;
  CHECK(full - count(a) == static_cast<long>(kNumTypeTags) * d);
  a = {};
  a.shared_semantics = false;
  long phi = 2L * d * d + d + d;
  CHECK(count(a) - full == static_cast<long>(M - kNumSpecials) * d - phi);
}
