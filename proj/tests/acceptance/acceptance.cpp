// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion. Arguments select a subset
// of criteria by number; without arguments every criterion runs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mask_support.hpp"
#include "mathlm/corpus.hpp"
#include "mathlm/errors.hpp"
#include "mathlm/eval.hpp"
#include "mathlm/generate.hpp"
#include "mathlm/inspect.hpp"
#include "mathlm/latex_parser.hpp"
#include "mathlm/trainer.hpp"
#include "mathlm/tree_json.hpp"
#include "net_support.hpp"
#include "test_support.hpp"

using namespace mathlm;
using testing::Group;
using testing::expected_mask;
using testing::id_for;

namespace {

// Tolerances and sizes.
constexpr int kRoundTripTrees = 10000;
constexpr double kRoundTripSeconds = 10.0;
constexpr int kGenerations = 1000;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kGradFloor = 1e-6;
constexpr int kTedPairs = 500;
constexpr int kTedMaxNodes = 6;
constexpr double kInitProximity = 0.05;
constexpr int kCorpusSize = 5000;
constexpr std::uint64_t kCorpusSeed = 7;
constexpr std::size_t kMaxWords = 400;
constexpr int kEpochs = 4;
constexpr int kBeam = 3;
constexpr int kMaxLen = 256;
const std::vector<std::uint64_t> kSeeds = {1, 2, 3};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

// ---- 1 ----

Outcome round_trip() {
  Vocabulary v = testing::fixture_vocab();
  testing::RandomTreeGen gen(v, 6, 8);
  std::mt19937_64 rng(2024);
  int failures = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < kRoundTripTrees; ++i) {
    OptNode t = gen(rng);
    bool ok = tree_depth(t) <= 6 && max_children(t) <= 8;
    std::vector<MathItem> items = linearize(t);
    std::vector<PositionedNode> pos = compute_positions(t);
    ok = ok && items.size() == pos.size();
    for (std::size_t k = 0; ok && k < items.size(); ++k)
      ok = items[k].position == pos[k].position && items[k].token == pos[k].node->token;
    try {
      ok = ok && delinearize(items) == t;
    } catch (const Error&) {
      ok = false;
    }
    failures += !ok;
  }
  double s = seconds_since(t0);
  return {failures == 0 && s < kRoundTripSeconds,
          std::to_string(kRoundTripTrees - failures) + "/" + std::to_string(kRoundTripTrees) + " trees in " +
              fmt(s, 2) + " s"};
}

// ---- 2 ----

Outcome mask_rules() {
  MathVocab mv = MathVocab::default_vocab();
  mv.numbers = {"12", "100"};
  Vocabulary v(TextVocab({"new", "velocity", " the"}), mv);
  auto run = [&](std::initializer_list<int> ids) {
    DecoderState s;
    for (int id : ids) advance(s, id, v);
    return s;
  };
  const int fs = id_for(v, TokenKind::StartFormula), fe = id_for(v, TokenKind::EndFormula);
  const int end = id_for(v, TokenKind::End), plus = id_for(v, TokenKind::Operator, "+");
  const int x = id_for(v, TokenKind::Variable, "x"), nh = id_for(v, TokenKind::NumHead);
  const int oh = id_for(v, TokenKind::OovHead), word = id_for(v, TokenKind::Text, " the");
  const int d9 = id_for(v, TokenKind::Digit, "9"), point = id_for(v, TokenKind::Digit, ".");
  const auto tree_start = {Group::Operators, Group::Variables, Group::Digits, Group::Numbers, Group::NumHead,
                           Group::OovHead};
  TokenMask start_or_end = expected_mask(v, tree_start);
  start_or_end.allow(end);

  std::vector<std::pair<std::string, std::function<bool()>>> cases = {
      {"text", [&] { return allowed_next(DecoderState{}, v) == expected_mask(v, {Group::Text, Group::StartFormula}) &&
                            allowed_next(run({word}), v) == expected_mask(v, {Group::Text, Group::StartFormula}); }},
      {"post-F^s", [&] { return allowed_next(run({fs}), v) == expected_mask(v, tree_start); }},
      {"post-F^e", [&] { return allowed_next(run({fs, x, fe}), v) == expected_mask(v, {Group::Text}); }},
      {"mid-tree", [&] { return allowed_next(run({fs, plus}), v) == expected_mask(v, tree_start) &&
                                allowed_next(run({fs, plus, x}), v) == start_or_end &&
                                allowed_next(run({fs, plus, x, plus, x, end}), v) == start_or_end; }},
      {"tree-complete", [&] { return allowed_next(run({fs, x}), v) == expected_mask(v, {Group::EndFormula}) &&
                                     allowed_next(run({fs, plus, x, end}), v) == expected_mask(v, {Group::EndFormula}); }},
      {"depth-32", [&] {
         DecoderState s = run({fs});
         for (int i = 0; i < kMaxTreeDepth; ++i) advance(s, plus, v);
         bool ok = allowed_next(s, v) == expected_mask(v, {Group::Variables, Group::Digits, Group::Numbers});
         advance(s, x, v);
         return ok && allowed_next(s, v) == expected_mask(v, {Group::Variables, Group::Digits, Group::Numbers, Group::End});
       }},
      {"width-64", [&] {
         DecoderState s = run({fs, plus});
         for (int i = 0; i < kMaxChildren - 2; ++i) advance(s, x, v);
         bool ok = allowed_next(s, v) == start_or_end;
         advance(s, x, v);
         return ok && allowed_next(s, v) == expected_mask(v, {Group::End});
       }},
      {"NumChildren", [&] {
         return allowed_next(run({fs, nh}), v) == expected_mask(v, {Group::Digits, Group::Point}) &&
                allowed_next(run({fs, nh, d9}), v) == expected_mask(v, {Group::Digits, Group::Point, Group::End}) &&
                allowed_next(run({fs, nh, d9, point}), v) == expected_mask(v, {Group::Digits, Group::End});
       }},
      {"OovChildren", [&] {
         return allowed_next(run({fs, oh}), v) == expected_mask(v, {Group::Text}) &&
                allowed_next(run({fs, oh, word}), v) == expected_mask(v, {Group::Text, Group::End}) &&
                allowed_next(run({fs, plus, oh, word, end}), v) == start_or_end;
       }},
  };
  std::string failed;
  for (auto& [name, check] : cases) {
    bool ok = false;
    try {
      ok = check();
    } catch (const Error&) {
    }
    if (!ok) failed += " " + name;
  }
  return {failed.empty(), std::to_string(cases.size()) + " rule cases" + (failed.empty() ? "" : ", failed:" + failed)};
}

// ---- 3 and 4 ----

struct SoundnessStats {
  int generations = 0, spans = 0, bad_spans = 0, position_mismatches = 0;
};

const SoundnessStats& soundness() {
  static std::optional<SoundnessStats> cached;
  if (cached) return *cached;
  MathVocab mv = MathVocab::default_vocab();
  mv.numbers = {"12", "100"};
  auto vocab = std::make_shared<const Vocabulary>(testing::fixture_vocab().text(), mv);
  ModelConfig c = testing::tiny_config(32, 2, 5);
  c.max_seq = 320;
  Transformer model(c, vocab);
  model.init();
  Transformer sharp(c, vocab);
  sharp.init();
  testing::randomize_params(sharp, 17, 0.3);

  const int fs = vocab->layout().special(Special::StartFormula);
  EncodedSequence text_prompt = encode_document("How many apples", *vocab);
  EncodedSequence formula_prompt = text_prompt;
  formula_prompt.push(fs, TypeTag::Control);

  SoundnessStats st;
  std::mt19937_64 rng(11);
  for (int i = 0; i < kGenerations; ++i) {
    GenerateOptions o;
    o.mode = SearchMode::Sample;
    o.seed = static_cast<std::uint64_t>(i);
    o.max_len = std::uniform_int_distribution<int>(24, 300)(rng);
    o.max_formulas = 0;
    const Transformer& m = (i % 2) ? sharp : model;
    Generation g = generate(m, (i % 4 < 3) ? formula_prompt : text_prompt, o);
    ++st.generations;
    for (const DecodedFormula& f : decode_formulas(g.seq, *vocab)) {
      ++st.spans;
      bool ok = f.terminated && f.tree.has_value();
      if (ok) {
        try {
          check_caps(*f.tree);
          ok = satisfies_end_law(*f.tree);
        } catch (const Error&) {
          ok = false;
        }
      }
      if (!ok) {
        ++st.bad_spans;
        ++st.position_mismatches;
        continue;
      }
      std::vector<PositionedNode> expect = compute_positions(*f.tree);
      bool same = expect.size() == f.end - f.begin - 2;
      for (std::size_t k = 0; same && k < expect.size(); ++k)
        same = g.seq.positions[f.begin + 1 + k] == std::optional<TreePosition>(expect[k].position);
      st.position_mismatches += !same;
    }
  }
  cached = st;
  return *cached;
}

Outcome decoding_soundness() {
  const SoundnessStats& s = soundness();
  return {s.bad_spans == 0 && s.spans > 0,
          std::to_string(s.generations) + " generations, " + std::to_string(s.spans) + " formula spans, " +
              std::to_string(s.bad_spans) + " invalid"};
}

Outcome position_agreement() {
  const SoundnessStats& s = soundness();
  return {s.position_mismatches == 0 && s.spans > 0,
          std::to_string(s.spans - s.position_mismatches) + "/" + std::to_string(s.spans) + " spans agree"};
}

// ---- 5 ----

Outcome gradients() {
  auto vocab = std::make_shared<const Vocabulary>(testing::fixture_vocab());
  Transformer m(testing::tiny_config(16, 1, 1), vocab);
  m.init();
  testing::randomize_params(m, 99, 0.3);
  EncodedSequence s = encode_document("How $newvelocity = 9.8t$ the", *vocab);
  testing::SequenceLoss loss(s, *vocab);
  auto worst = testing::gradient_check(m, loss, kGradStep, kGradFloor);
  const std::vector<std::string> required = {"emb.tree_proj", "emb.phi_w1", "emb.phi_b1", "emb.phi_w2",
                                             "emb.phi_b2",    "emb.type",   "emb.special", "head.w_text",
                                             "head.b_text",   "head.w_math", "head.b_math"};
  double max_required = 0.0, max_all = 0.0;
  std::string missing;
  for (const std::string& name : required) {
    auto it = worst.find(name);
    if (it == worst.end()) missing += " " + name;
    else max_required = std::max(max_required, it->second);
  }
  for (const auto& [name, err] : worst) max_all = std::max(max_all, err);
  std::ostringstream os;
  os << "max rel error " << max_required << " on W/phi/type/special/heads, " << max_all << " over all "
     << worst.size() << " tensors";
  if (!missing.empty()) os << ", missing:" << missing;
  return {missing.empty() && max_all < kGradRelTol, os.str()};
}

// ---- 6 ----

Outcome ted_oracle() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> size(1, kTedMaxNodes);
  int equal = 0;
  for (int i = 0; i < kTedPairs; ++i) {
    OptNode a = testing::random_small_tree(rng, size(rng));
    OptNode b = testing::random_small_tree(rng, size(rng));
    equal += tree_edit_distance(a, b) == testing::ted_oracle(a, b);
  }
  return {equal == kTedPairs, std::to_string(equal) + "/" + std::to_string(kTedPairs) + " pairs equal"};
}

// ---- 8 (and the runs checked by 7) ----

struct Experiment {
  std::vector<std::pair<std::string, EvalReport>> runs;  // label, report
  std::vector<double> full, no_tpe, untrained;           // tree match per seed
  double seconds = 0.0;
};

EvalReport evaluate_model(const Transformer& model, const std::vector<CorpusExample>& test) {
  std::vector<std::string> preds, gold;
  GenerateOptions o;
  o.mode = SearchMode::Beam;
  o.beam_width = kBeam;
  o.max_len = kMaxLen;
  for (const CorpusExample& e : test) {
    Generation g = generate(model, equation_prompt(e.problem, model.vocab()), o);
    nlohmann::json trees = nlohmann::json::array();
    std::string text;
    for (const DecodedFormula& f : decode_formulas(g.seq, model.vocab())) {
      if (f.end <= g.prompt_length) continue;
      std::string latex = "?";
      if (f.tree) {
        try {
          latex = tree_to_latex(*f.tree);
        } catch (const Error&) {
        }
        trees.push_back(tree_to_json(*f.tree));
      } else {
        trees.push_back(nullptr);
      }
      text += "$" + latex + "$";
    }
    preds.push_back(nlohmann::json{{"prediction", text}, {"trees", trees}}.dump(
        -1, ' ', false, nlohmann::json::error_handler_t::replace));
    gold.push_back(nlohmann::json{{"equation", e.equation}}.dump());
  }
  return score_lines(preds, gold, model.vocab());
}

const Experiment& experiment() {
  static std::optional<Experiment> cached;
  if (cached) return *cached;
  auto t0 = std::chrono::steady_clock::now();
  Experiment ex;
  CorpusSplits splits = split_corpus(generate_corpus(kCorpusSize, kCorpusSeed));
  auto vocab = std::make_shared<const Vocabulary>(corpus_vocabulary(splits.train, kMaxWords, false));
  std::vector<TrainingExample> train, val;
  for (const CorpusExample& e : splits.train) train.push_back(equation_example(e.problem, e.equation, *vocab));
  for (const CorpusExample& e : splits.val) val.push_back(equation_example(e.problem, e.equation, *vocab));

  for (std::uint64_t seed : kSeeds) {
    ModelConfig mc;
    mc.d_model = 64;
    mc.n_layers = 2;
    mc.n_heads = 4;
    mc.d_ff = 256;
    mc.max_seq = kMaxLen;
    mc.seed = seed;
    TrainConfig tc;
    tc.batch_size = 8;
    tc.grad_accum = 1;
    tc.max_epochs = kEpochs;
    tc.patience = kEpochs;
    tc.seed = seed;
    tc.optimizer.lr = 1e-3;

    for (bool tpe : {true, false}) {
      ModelConfig c = mc;
      c.ablation.tree_positions = tpe;
      Transformer model(c, vocab);
      model.init();
      if (tpe) {
        EvalReport r = evaluate_model(model, splits.test);
        ex.untrained.push_back(r.tree_match_rate);
        ex.runs.emplace_back("untrained seed " + std::to_string(seed), r);
      }
      Trainer trainer(model, tc);
      trainer.fit(train, val);
      EvalReport r = evaluate_model(model, splits.test);
      (tpe ? ex.full : ex.no_tpe).push_back(r.tree_match_rate);
      ex.runs.emplace_back(std::string(tpe ? "full" : "no TPE") + " seed " + std::to_string(seed), r);
      std::cerr << ex.runs.back().first << ": tree match " << fmt(r.tree_match_rate) << ", solve rate "
                << fmt(r.solve_rate) << " (" << fmt(seconds_since(t0), 0) << " s)\n";
    }
  }
  ex.seconds = seconds_since(t0);
  cached = std::move(ex);
  return *cached;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

Outcome metric_ordering() {
  const Experiment& ex = experiment();
  std::string bad;
  for (const auto& [label, r] : ex.runs)
    if (!(r.tree_match_rate <= r.solve_rate) || r.counts.tree_matches > r.counts.solved) bad += " [" + label + "]";
  return {bad.empty(), std::to_string(ex.runs.size()) + " evaluation runs" + (bad.empty() ? "" : ", violated:" + bad)};
}

Outcome desk_learning() {
  const Experiment& ex = experiment();
  double full = mean(ex.full), no_tpe = mean(ex.no_tpe), untrained = mean(ex.untrained);
  std::ostringstream os;
  os << "mean tree match over " << kSeeds.size() << " seeds: full " << fmt(full) << ", no TPE " << fmt(no_tpe)
     << ", untrained " << fmt(untrained) << " (" << fmt(ex.seconds, 0) << " s)";
  return {full > untrained && full > no_tpe, os.str()};
}

// ---- 9 ----

Outcome init_proximity() {
  double worst = 0.0;
  int symbols = 0;
  std::vector<std::shared_ptr<const Vocabulary>> vocabs = {
      std::make_shared<const Vocabulary>(testing::fixture_vocab()),
      std::make_shared<const Vocabulary>(
          corpus_vocabulary(generate_corpus(500, kCorpusSeed), kMaxWords, true))};
  for (const auto& vocab : vocabs) {
    for (int d : {64, 128}) {
      ModelConfig c;
      c.d_model = d;
      c.n_layers = 1;
      c.n_heads = 4;
      c.d_ff = 2 * d;
      c.max_seq = 16;
      Transformer m(c, vocab);
      m.init();
      const IdLayout& l = vocab->layout();
      for (int id = l.specials.end; id < l.math.end; ++id) {
        RowVector t = m.embedder().text_average(id);
        worst = std::max(worst, (m.embedder().token_embedding(id) - t).norm() / t.norm());
        ++symbols;
      }
    }
  }
  return {worst < kInitProximity, "max relative distance " + fmt(worst, 5) + " over " + std::to_string(symbols) +
                                      " symbol embeddings"};
}

// ---- 10 ----

Outcome pipeline_fixture() {
  std::ifstream in(std::string(MATHLM_GOLDEN_DIR) + "/newvelocity_inspect.txt");
  std::stringstream golden;
  golden << in.rdbuf();
  Vocabulary v = Vocabulary::load(std::string(MATHLM_GOLDEN_DIR) + "/fixture_vocab.json");
  const std::string expr = "newvelocity = 9.8t";
  std::vector<std::string> failed;
  if (!in || inspect_expression(expr, v) != golden.str()) failed.push_back("golden dump");

  OptNode t = formula_tree(expr, v);
  const OptNode& lhs = t.children.at(0);
  if (lhs.token.kind != TokenKind::OovHead || lhs.children.back().token.kind != TokenKind::End)
    failed.push_back("OOV sub-tree");
  const OptNode& rhs = t.children.at(1);
  bool num = false;
  for (const OptNode& c : rhs.children) num = num || c.token.kind == TokenKind::NumHead;
  if (!num) failed.push_back("number sub-tree");
  if (!satisfies_end_law(t)) failed.push_back("End nodes");

  nlohmann::json doc = tree_document(t, true);
  if (tree_from_json(doc.at("tree")) != t) failed.push_back("3-tuple JSON");

  std::string latex = tree_to_latex(t);
  if (latex != "\\operatorname{newvelocity}=9.8t" || formula_tree(latex, v) != t) failed.push_back("LaTeX");

  EncodedSequence seq = encode_document("How $" + expr + "$ the", v);
  auto spans = decode_formulas(seq, v);
  if (spans.size() != 1 || !spans[0].tree || *spans[0].tree != t) failed.push_back("ingest round trip");

  std::string detail = "inspect, JSON, LaTeX and sequence round trip";
  for (const std::string& f : failed) detail += "; failed " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"round-trip suite", round_trip},
      {"mask-rule exhaustiveness", mask_rules},
      {"decoding soundness", decoding_soundness},
      {"position-inference agreement", position_agreement},
      {"gradient checks", gradients},
      {"TED oracle", ted_oracle},
      {"metric ordering", metric_ordering},
      {"desk-scale learning", desk_learning},
      {"embedding init proximity", init_proximity},
      {"pipeline fixture", pipeline_fixture},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << n << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
