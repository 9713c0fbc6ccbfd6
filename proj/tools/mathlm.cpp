// SPDX-License-Identifier: Apache-2.0
// Command-line driver: corpus generation, ingestion, training, generation,
// evaluation and inspection.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>

#include "mathlm/checkpoint.hpp"
#include "mathlm/corpus.hpp"
#include "mathlm/errors.hpp"
#include "mathlm/eval.hpp"
#include "mathlm/generate.hpp"
#include "mathlm/inspect.hpp"
#include "mathlm/segment.hpp"
#include "mathlm/trainer.hpp"
#include "mathlm/tree_json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mathlm;

namespace {

constexpr const char* kDataDirEnv = "MATHLM_DATA_DIR";

// Relative inputs missing from the working directory are looked up under the
// data directory.
std::string resolve_input(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute() || fs::exists(path)) return path;
  if (const char* dir = std::getenv(kDataDirEnv)) {
    fs::path p = fs::path(dir) / path;
    if (fs::exists(p)) return p.string();
  }
  return path;
}

std::string default_data_dir() {
  const char* dir = std::getenv(kDataDirEnv);
  return dir ? dir : "data";
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::User, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  return lines;
}

Vocabulary plain_vocabulary() { return Vocabulary(TextVocab{}, MathVocab::default_vocab()); }

// Settings shared by train and cv: a JSON config file with flag overrides.
struct RunSettings {
  std::string config_path;
  ModelConfig model;
  TrainConfig train;
  std::size_t max_words = 2000;
  bool no_tpe = false, no_type = false, no_shared = false, no_num_trees = false, fine_tune_lr = false;
  std::optional<int> d_model, layers, heads, d_ff, epochs, batch, accum, patience;
  std::optional<double> lr, dropout;
  std::optional<std::uint64_t> seed;

  void add_flags(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration");
    app->add_option("--d-model", d_model);
    app->add_option("--layers", layers);
    app->add_option("--heads", heads);
    app->add_option("--d-ff", d_ff);
    app->add_option("--dropout", dropout);
    app->add_option("--epochs", epochs);
    app->add_option("--batch", batch);
    app->add_option("--accum", accum, "gradient accumulation steps");
    app->add_option("--patience", patience);
    app->add_option("--lr", lr);
    app->add_flag("--fine-tune-lr", fine_tune_lr, "use the 1e-5 learning-rate preset");
    app->add_option("--seed", seed);
    app->add_option("--max-words", max_words, "learned text vocabulary size");
    app->add_flag("--no-tpe", no_tpe, "disable tree-position embeddings");
    app->add_flag("--no-type-emb", no_type, "disable type embeddings");
    app->add_flag("--no-shared-emb", no_shared, "learn math embeddings independently of text");
    app->add_flag("--no-num-trees", no_num_trees, "keep known numbers as single tokens");
  }

  void resolve() {
    if (!config_path.empty()) {
      json j;
      try {
        j = json::parse(read_file(resolve_input(config_path)));
      } catch (const json::exception& e) {
        throw Error(ErrorCategory::User, config_path + ": " + e.what());
      }
      if (j.contains("model")) model = model_config_from_json(j.at("model"));
      if (j.contains("train")) train = train_config_from_json(j.at("train"));
      max_words = j.value("max_words", max_words);
    }
    if (fine_tune_lr) train.optimizer = OptimizerConfig::fine_tune_preset();
    if (d_model) model.d_model = *d_model;
    if (layers) model.n_layers = *layers;
    if (heads) model.n_heads = *heads;
    if (d_ff) model.d_ff = *d_ff;
    if (dropout) model.dropout = *dropout;
    if (epochs) train.max_epochs = *epochs;
    if (batch) train.batch_size = *batch;
    if (accum) train.grad_accum = *accum;
    if (patience) train.patience = *patience;
    if (lr) train.optimizer.lr = *lr;
    if (seed) model.seed = train.seed = *seed;
    if (no_tpe) model.ablation.tree_positions = false;
    if (no_type) model.ablation.type_embeddings = false;
    if (no_shared) model.ablation.shared_semantics = false;
    if (no_num_trees) model.ablation.number_subtrees = false;
    try {
      model.validate();
    } catch (const ShapeMismatch& e) {
      throw Error(ErrorCategory::User, std::string("model configuration: ") + e.what());
    }
    if (train.batch_size <= 0 || train.grad_accum <= 0 || train.max_epochs < 0)
      throw Error(ErrorCategory::User, "batch, accumulation and epoch counts must be positive");
  }

  NormalizeOptions normalize() const { return {model.ablation.number_subtrees}; }

  json to_json() const {
    return {{"model", mathlm::to_json(model)}, {"train", mathlm::to_json(train)}, {"max_words", max_words}};
  }
};

std::vector<TrainingExample> corpus_examples(const std::vector<CorpusExample>& corpus, const Vocabulary& vocab,
                                             const NormalizeOptions& opts) {
  std::vector<TrainingExample> out;
  out.reserve(corpus.size());
  for (const CorpusExample& e : corpus) out.push_back(equation_example(e.problem, e.equation, vocab, opts));
  return out;
}

// Loads a training set from a tokenized dataset or a corpus JSONL file.
std::vector<TrainingExample> load_training_set(const std::string& path, const Vocabulary& vocab,
                                               const NormalizeOptions& opts) {
  if (has_suffix(path, ".jsonl")) return corpus_examples(read_jsonl(path), vocab, opts);
  auto examples = load_examples(path);
  for (const TrainingExample& ex : examples)
    for (int id : ex.seq.ids)
      if (id < 0 || id >= vocab.size()) throw FormatError(path + ": token id outside the vocabulary");
  return examples;
}

struct PredictionRecord {
  json record;
  std::vector<std::optional<OptNode>> trees;
};

PredictionRecord prediction_record(const Generation& g, const Vocabulary& vocab) {
  PredictionRecord out;
  std::string formulas;
  json trees = json::array();
  for (const DecodedFormula& f : decode_formulas(g.seq, vocab)) {
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
    if (!formulas.empty()) formulas += ' ';
    formulas += "$" + latex + "$";
    out.trees.push_back(f.tree);
  }
  out.record = {{"prediction", formulas}, {"trees", trees}, {"text", decode_document(g.seq, vocab)}};
  return out;
}

struct GenerateSettings {
  int beam = 3;
  bool sample = false;
  int top_k = 0;
  int max_len = 1024;
  int formulas = 1;
  std::uint64_t seed = 0;

  void add_flags(CLI::App* app, bool with_seed = true) {
    app->add_option("--beam", beam, "beam width, 1 for greedy")->check(CLI::PositiveNumber);
    app->add_flag("--sample", sample, "top-k sampling instead of search");
    app->add_option("--top-k", top_k);
    app->add_option("--max-len", max_len)->check(CLI::PositiveNumber);
    app->add_option("--formulas", formulas, "stop after this many formulas, 0 for no limit");
    if (with_seed) app->add_option("--seed", seed);
  }

  GenerateOptions options() const {
    GenerateOptions o;
    o.mode = sample ? SearchMode::Sample : (beam > 1 ? SearchMode::Beam : SearchMode::Greedy);
    o.beam_width = beam;
    o.top_k = top_k;
    o.max_len = max_len;
    o.max_formulas = formulas;
    o.seed = seed;
    return o;
  }
};

std::vector<json> run_generation(const Transformer& model, const std::vector<EncodedSequence>& prompts,
                                 const GenerateSettings& settings) {
  std::vector<json> out;
  GenerateOptions opts = settings.options();
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    opts.seed = settings.seed + i;
    out.push_back(prediction_record(generate(model, prompts[i], opts), model.vocab()).record);
  }
  return out;
}

void write_records(const std::string& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCategory::User, "cannot write " + path);
  for (const json& r : records) out << r.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

std::vector<std::string> dump_lines(const std::vector<json>& records) {
  std::vector<std::string> lines;
  for (const json& r : records) lines.push_back(r.dump(-1, ' ', false, json::error_handler_t::replace));
  return lines;
}

std::vector<std::string> gold_lines(const std::vector<CorpusExample>& corpus) {
  std::vector<std::string> lines;
  for (const CorpusExample& e : corpus) lines.push_back(json{{"equation", e.equation}}.dump());
  return lines;
}

// ---- subcommands ----

int cmd_gen_corpus(int n, std::uint64_t seed, std::string out) {
  if (out.empty()) out = default_data_dir();
  CorpusSplits s = write_corpus(out, n, seed);
  std::cout << "wrote " << s.train.size() << " train, " << s.val.size() << " val, " << s.test.size()
            << " test examples to " << out << '\n';
  return 0;
}

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string vocab_path, out, trees_out;
  std::size_t max_words = 2000;
  bool no_num_trees = false;
};

int cmd_ingest(const IngestArgs& a) {
  std::vector<CorpusExample> corpus;
  std::vector<std::pair<std::string, std::string>> documents;  // path, text
  for (const std::string& raw : a.inputs) {
    std::string path = resolve_input(raw);
    if (has_suffix(path, ".jsonl")) {
      auto part = read_jsonl(path);
      corpus.insert(corpus.end(), part.begin(), part.end());
    } else {
      documents.emplace_back(path, read_file(path));
    }
  }
  NormalizeOptions opts{!a.no_num_trees};

  std::unique_ptr<Vocabulary> vocab;
  std::string vocab_path = resolve_input(a.vocab_path);
  if (!vocab_path.empty() && fs::exists(vocab_path)) {
    vocab = std::make_unique<Vocabulary>(Vocabulary::load(vocab_path));
  } else {
    std::vector<CorpusExample> basis = corpus;
    for (const auto& [p, text] : documents) basis.push_back({text, "x"});
    vocab = std::make_unique<Vocabulary>(corpus_vocabulary(basis, a.max_words, a.no_num_trees));
    if (!vocab_path.empty()) vocab->save(vocab_path);
  }

  std::vector<TrainingExample> examples = corpus_examples(corpus, *vocab, opts);
  std::vector<json> tree_records;
  for (const auto& [path, text] : documents) {
    try {
      TrainingExample ex;
      ex.seq = encode_document(text, *vocab, opts);
      examples.push_back(std::move(ex));
      for (const Region& r : split_regions(text))
        if (r.is_math) tree_records.push_back(tree_document(formula_tree(r.text, *vocab, opts, r.offset), true));
    } catch (const OffsetError& e) {
      throw Error(e.category(), path + ":" + std::to_string(e.offset()) + ": " + e.detail());
    }
  }
  for (const CorpusExample& e : corpus) tree_records.push_back(tree_document(formula_tree(e.equation, *vocab, opts), true));

  if (!a.out.empty()) save_examples(a.out, examples);
  if (!a.trees_out.empty()) write_records(a.trees_out, tree_records);
  std::cout << "ingested " << examples.size() << " sequences, " << tree_records.size() << " formulas, vocabulary "
            << vocab->size() << " ids\n";
  return 0;
}

struct TrainArgs {
  RunSettings run;
  std::string train_path, val_path, vocab_path, out = "model.ckpt", checkpoint, resume, log;
};

int cmd_train(TrainArgs& a) {
  a.run.resolve();
  std::string train_path = resolve_input(a.train_path);
  std::string val_path = resolve_input(a.val_path);
  std::string vocab_path = resolve_input(a.vocab_path);
  NormalizeOptions opts = a.run.normalize();

  std::shared_ptr<const Vocabulary> vocab;
  if (!vocab_path.empty() && fs::exists(vocab_path)) {
    vocab = std::make_shared<const Vocabulary>(Vocabulary::load(vocab_path));
  } else if (has_suffix(train_path, ".jsonl")) {
    vocab = std::make_shared<const Vocabulary>(
        corpus_vocabulary(read_jsonl(train_path), a.run.max_words, !a.run.model.ablation.number_subtrees));
    if (!vocab_path.empty()) vocab->save(vocab_path);
  } else {
    throw Error(ErrorCategory::User, "a tokenized dataset needs --vocab");
  }

  auto train = load_training_set(train_path, *vocab, opts);
  std::vector<TrainingExample> val;
  if (!val_path.empty()) val = load_training_set(val_path, *vocab, opts);

  a.run.train.log_path = a.log;
  a.run.train.checkpoint_path = a.checkpoint;
  Transformer model(a.run.model, vocab);
  model.init();
  Trainer trainer(model, a.run.train);
  if (!a.resume.empty()) trainer.load_checkpoint(resolve_input(a.resume));
  std::cout << "parameters: " << model.parameter_count() << '\n';
  TrainResult r = trainer.fit(train, val);
  for (const EpochRecord& e : r.epochs)
    std::cout << "epoch " << e.epoch << "  train " << e.train_loss << "  val " << e.val_loss << '\n';
  std::cout << "best epoch " << r.best_epoch << " (val " << r.best_val << ")" << (r.early_stopped ? ", stopped early" : "")
            << '\n';
  save_model(a.out, model, {{"run", a.run.to_json()}});
  std::cout << "saved " << a.out << '\n';
  return 0;
}

struct GenerateArgs {
  GenerateSettings gen;
  std::string model_path, prompts, out = "predictions.jsonl";
};

int cmd_generate(const GenerateArgs& a) {
  auto model = load_model(resolve_input(a.model_path));
  std::string path = resolve_input(a.prompts);
  std::vector<EncodedSequence> prompts;
  if (has_suffix(path, ".jsonl")) {
    for (const CorpusExample& e : read_jsonl(path)) prompts.push_back(equation_prompt(e.problem, model->vocab()));
  } else {
    NormalizeOptions opts{model->config().ablation.number_subtrees};
    for (const std::string& line : read_lines(path)) prompts.push_back(encode_document(line, model->vocab(), opts));
  }
  write_records(a.out, run_generation(*model, prompts, a.gen));
  std::cout << "wrote " << prompts.size() << " predictions to " << a.out << '\n';
  return 0;
}

struct EvalArgs {
  std::vector<std::string> preds;
  std::string gold, vocab_path, json_out;
  bool collapse = false;
};

int cmd_eval(const EvalArgs& a) {
  Vocabulary vocab = a.vocab_path.empty() ? plain_vocabulary() : Vocabulary::load(resolve_input(a.vocab_path));
  ScoreOptions opts{a.collapse};
  std::vector<EvalReport> reports;
  for (const std::string& p : a.preds) {
    reports.push_back(score_predictions(resolve_input(p), resolve_input(a.gold), vocab, opts));
    std::cout << p << '\n' << reports.back().to_table() << '\n';
  }
  json out = reports.size() == 1 ? reports.front().to_json() : aggregate_reports(reports);
  if (reports.size() > 1) std::cout << "mean and std over " << reports.size() << " runs:\n" << out.dump(2) << '\n';
  if (!a.json_out.empty()) {
    std::ofstream f(a.json_out, std::ios::trunc);
    f << out.dump(2) << '\n';
  }
  return 0;
}

int cmd_inspect(const std::string& expr, const std::string& vocab_path, bool no_bits, bool no_num_trees) {
  Vocabulary vocab = vocab_path.empty() ? plain_vocabulary() : Vocabulary::load(resolve_input(vocab_path));
  InspectOptions opts;
  opts.bits = !no_bits;
  opts.normalize.number_subtrees = !no_num_trees;
  std::cout << inspect_expression(expr, vocab, opts);
  return 0;
}

struct CvArgs {
  RunSettings run;
  GenerateSettings gen;
  std::string data, out_dir = "cv";
  int folds = 5;
};

int cmd_cv(CvArgs& a) {
  a.run.resolve();
  auto corpus = read_jsonl(resolve_input(a.data));
  auto fold_of = cv_fold_assignment(corpus.size(), a.folds, a.run.train.seed);
  fs::create_directories(a.out_dir);
  NormalizeOptions opts = a.run.normalize();
  std::vector<EvalReport> reports;
  for (int f = 0; f < a.folds; ++f) {
    std::vector<CorpusExample> rest, test;
    for (std::size_t i = 0; i < corpus.size(); ++i) (fold_of[i] == f ? test : rest).push_back(corpus[i]);
    // The last tenth of the training folds is held out for early stopping.
    std::size_t n_val = rest.size() / 10;
    std::vector<CorpusExample> val(rest.end() - static_cast<std::ptrdiff_t>(n_val), rest.end());
    rest.resize(rest.size() - n_val);

    auto vocab = std::make_shared<const Vocabulary>(
        corpus_vocabulary(rest, a.run.max_words, !a.run.model.ablation.number_subtrees));
    Transformer model(a.run.model, vocab);
    model.init();
    Trainer trainer(model, a.run.train);
    trainer.fit(corpus_examples(rest, *vocab, opts), corpus_examples(val, *vocab, opts));

    std::vector<EncodedSequence> prompts;
    for (const CorpusExample& e : test) prompts.push_back(equation_prompt(e.problem, *vocab));
    auto records = run_generation(model, prompts, a.gen);
    write_records(a.out_dir + "/fold" + std::to_string(f) + ".jsonl", records);
    reports.push_back(score_lines(dump_lines(records), gold_lines(test), *vocab));
    std::cout << "fold " << f << '\n' << reports.back().to_table() << '\n';
  }
  json agg = aggregate_reports(reports);
  std::ofstream(a.out_dir + "/summary.json") << agg.dump(2) << '\n';
  std::cout << agg.dump(2) << '\n';
  return 0;
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::User: return 1;
    case ErrorCategory::Data: return 2;
    case ErrorCategory::Internal: return 3;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed text and math language model tools"};
  app.require_subcommand(1);

  int corpus_n = 5000;
  std::uint64_t corpus_seed = 0;
  std::string corpus_out;
  auto* gen_corpus = app.add_subcommand("gen-corpus", "write a synthetic word-problem corpus");
  gen_corpus->add_option("--n", corpus_n)->check(CLI::PositiveNumber);
  gen_corpus->add_option("--seed", corpus_seed);
  gen_corpus->add_option("--out", corpus_out, "output directory (default $MATHLM_DATA_DIR or ./data)");

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "tokenize documents or corpus files");
  ingest->add_option("--input", ingest_args.inputs, "text documents or corpus .jsonl files")->required();
  ingest->add_option("--vocab", ingest_args.vocab_path, "vocabulary JSON, built and written when missing");
  ingest->add_option("--max-words", ingest_args.max_words);
  ingest->add_option("--out", ingest_args.out, "tokenized dataset");
  ingest->add_option("--trees", ingest_args.trees_out, "formula trees as JSON lines");
  ingest->add_flag("--no-num-trees", ingest_args.no_num_trees);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a model");
  train_args.run.add_flags(train);
  train->add_option("--train", train_args.train_path, "corpus .jsonl or tokenized dataset")->required();
  train->add_option("--val", train_args.val_path);
  train->add_option("--vocab", train_args.vocab_path);
  train->add_option("--out", train_args.out, "final model checkpoint");
  train->add_option("--checkpoint", train_args.checkpoint, "training state written after every epoch");
  train->add_option("--resume", train_args.resume, "training state to continue from");
  train->add_option("--log", train_args.log, "JSON lines training log");

  GenerateArgs gen_args;
  auto* gen = app.add_subcommand("generate", "decode from prompts");
  gen_args.gen.add_flags(gen);
  gen->add_option("--model", gen_args.model_path)->required();
  gen->add_option("--prompt,--prompts", gen_args.prompts, "corpus .jsonl or one text prompt per line")->required();
  gen->add_option("--out", gen_args.out);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score predictions against references");
  eval->add_option("--pred", eval_args.preds, "prediction file, repeat for several runs")->required();
  eval->add_option("--gold", eval_args.gold)->required();
  eval->add_option("--vocab", eval_args.vocab_path);
  eval->add_option("--json", eval_args.json_out, "write the report as JSON");
  eval->add_flag("--collapse-numbers", eval_args.collapse, "score TED with numbers as single nodes");

  std::string inspect_expr, inspect_vocab;
  bool no_bits = false, inspect_no_nt = false;
  auto* inspect = app.add_subcommand("inspect", "show every processing stage of one formula");
  inspect->add_option("expr", inspect_expr, "LaTeX formula")->required();
  inspect->add_option("--vocab", inspect_vocab);
  inspect->add_flag("--no-bits", no_bits);
  inspect->add_flag("--no-num-trees", inspect_no_nt);

  CvArgs cv_args;
  auto* cv = app.add_subcommand("cv", "k-fold cross-validation on a corpus file");
  cv_args.run.add_flags(cv);
  cv_args.gen.add_flags(cv, false);
  cv->add_option("--data", cv_args.data)->required();
  cv->add_option("--folds", cv_args.folds)->check(CLI::Range(2, 100));
  cv->add_option("--out-dir", cv_args.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*gen_corpus) return cmd_gen_corpus(corpus_n, corpus_seed, corpus_out);
    if (*ingest) return cmd_ingest(ingest_args);
    if (*train) return cmd_train(train_args);
    if (*gen) return cmd_generate(gen_args);
    if (*eval) return cmd_eval(eval_args);
    if (*inspect) return cmd_inspect(inspect_expr, inspect_vocab, no_bits, inspect_no_nt);
    if (*cv) return cmd_cv(cv_args);
  } catch (const OffsetError& e) {
    std::cerr << "error at offset " << e.offset() << ": " << e.detail() << '\n';
    return exit_code(e.category());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
