// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mathlm/errors.hpp"
#include "mathlm/eval.hpp"
#include "mathlm/latex_printer.hpp"
#include "mathlm/normalize.hpp"
#include "mathlm/segment.hpp"
#include "mathlm/tree_json.hpp"

namespace mathlm {

namespace {

struct ParsedLine {
  std::vector<std::optional<OptNode>> formulas;  // nullopt when unparsable
  std::vector<std::string> tokens;
};

std::string document_of(const std::string& line, nlohmann::json* trees) {
  std::size_t first = line.find_first_not_of(" \t\r");
  if (first == std::string::npos || line[first] != '{') return line;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad JSON record: ") + e.what());
  }
  if (trees && j.contains("trees")) *trees = j.at("trees");
  if (j.contains("prediction")) return j.at("prediction").get<std::string>();
  if (j.contains("equation")) return "$" + j.at("equation").get<std::string>() + "$";
  if (j.contains("text")) return j.at("text").get<std::string>();
  throw FormatError("record has no prediction, equation or text field");
}

ParsedLine parse_line(const std::string& line, const Vocabulary& vocab, bool strict) {
  ParsedLine out;
  nlohmann::json trees;
  std::string doc = document_of(line, &trees);
  std::vector<Region> regions;
  try {
    regions = split_regions(doc);
  } catch (const UnbalancedDelimiter&) {
    if (strict) throw;
    regions = {Region{false, doc, 0}};
  }
  for (const Region& r : regions) {
    if (!r.is_math) {
      for (auto& t : metric_tokens(r.text)) out.tokens.push_back(std::move(t));
      continue;
    }
    std::optional<OptNode> tree;
    std::string printed = r.text;
    try {
      tree = formula_tree(r.text, vocab, {}, r.offset);
      printed = tree_to_latex(*tree);
    } catch (const Error&) {
      if (strict) throw;
      tree.reset();
    }
    for (auto& t : metric_tokens(printed)) out.tokens.push_back(std::move(t));
    out.formulas.push_back(std::move(tree));
  }
  if (trees.is_array()) {
    out.formulas.clear();
    for (const auto& t : trees) {
      if (t.is_null()) {
        out.formulas.emplace_back();
        continue;
      }
      try {
        out.formulas.emplace_back(tree_from_json(t));
      } catch (const Error&) {
        if (strict) throw;
        out.formulas.emplace_back();
      }
    }
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::User, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  return {{"tree_match_rate", tree_match_rate},
          {"solve_rate", solve_rate},
          {"mean_ted", mean_ted},
          {"bleu4", bleu4},
          {"rouge_l", rouge_l},
          {"counts",
           {{"lines", counts.lines},
            {"formulas", counts.formulas},
            {"tree_matches", counts.tree_matches},
            {"solved", counts.solved},
            {"parse_failures", counts.parse_failures}}}};
}

std::string EvalReport::to_table() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "metric          value\n"
                "tree match      %.4f\n"
                "solve rate      %.4f\n"
                "mean TED        %.4f\n"
                "BLEU-4          %.2f\n"
                "ROUGE-L         %.2f\n"
                "lines           %d\n"
                "formulas        %d\n"
                "parse failures  %d\n",
                tree_match_rate, solve_rate, mean_ted, bleu4, rouge_l, counts.lines, counts.formulas,
                counts.parse_failures);
  return buf;
}

EvalReport score_lines(const std::vector<std::string>& predictions, const std::vector<std::string>& gold,
                       const Vocabulary& vocab, const ScoreOptions& options) {
  if (predictions.size() != gold.size())
    throw Misaligned(std::to_string(predictions.size()) + " predictions for " + std::to_string(gold.size()) +
                     " references");
  EvalReport rep;
  rep.counts.lines = static_cast<int>(gold.size());
  std::vector<std::vector<std::string>> cands, refs;
  double ted_total = 0.0;
  double rouge_total = 0.0;
  auto prep = [&](const OptNode& t) { return options.collapse_numbers ? collapse_number_subtrees(t) : t; };

  for (std::size_t i = 0; i < gold.size(); ++i) {
    ParsedLine p = parse_line(predictions[i], vocab, false);
    ParsedLine g = parse_line(gold[i], vocab, true);
    const std::size_t units = std::max(p.formulas.size(), g.formulas.size());
    for (std::size_t k = 0; k < units; ++k) {
      const std::optional<OptNode>* pf = k < p.formulas.size() ? &p.formulas[k] : nullptr;
      const std::optional<OptNode>* gf = k < g.formulas.size() ? &g.formulas[k] : nullptr;
      ++rep.counts.formulas;
      if (pf && !pf->has_value()) ++rep.counts.parse_failures;
      const bool have_p = pf && pf->has_value();
      const bool have_g = gf != nullptr;
      if (have_p && have_g) {
        OptNode a = prep(**pf), b = prep(**gf);
        ted_total += tree_edit_distance(a, b);
        if (tree_match(**pf, **gf)) ++rep.counts.tree_matches;
        if (solve_equal(**pf, **gf)) ++rep.counts.solved;
      } else if (have_g) {
        ted_total += static_cast<double>(node_count(prep(**gf)));
      } else if (have_p) {
        ted_total += static_cast<double>(node_count(prep(**pf)));
      }
    }
    rouge_total += rouge_l(p.tokens, g.tokens);
    cands.push_back(std::move(p.tokens));
    refs.push_back(std::move(g.tokens));
  }
  if (rep.counts.formulas > 0) {
    rep.tree_match_rate = static_cast<double>(rep.counts.tree_matches) / rep.counts.formulas;
    rep.solve_rate = static_cast<double>(rep.counts.solved) / rep.counts.formulas;
    rep.mean_ted = ted_total / rep.counts.formulas;
  }
  if (!gold.empty()) {
    rep.bleu4 = bleu4(cands, refs);
    rep.rouge_l = rouge_total / static_cast<double>(gold.size());
  }
  return rep;
}

EvalReport score_predictions(const std::string& pred_path, const std::string& gold_path, const Vocabulary& vocab,
                             const ScoreOptions& options) {
  return score_lines(read_lines(pred_path), read_lines(gold_path), vocab, options);
}

nlohmann::json aggregate_reports(const std::vector<EvalReport>& runs) {
  nlohmann::json out = nlohmann::json::object();
  const std::pair<const char*, double EvalReport::*> metrics[] = {{"tree_match_rate", &EvalReport::tree_match_rate},
                                                                  {"solve_rate", &EvalReport::solve_rate},
                                                                  {"mean_ted", &EvalReport::mean_ted},
                                                                  {"bleu4", &EvalReport::bleu4},
                                                                  {"rouge_l", &EvalReport::rouge_l}};
  const double n = static_cast<double>(runs.size());
  for (const auto& [name, field] : metrics) {
    double mean = 0.0;
    for (const EvalReport& r : runs) mean += r.*field;
    mean = runs.empty() ? 0.0 : mean / n;
    double var = 0.0;
    for (const EvalReport& r : runs) var += (r.*field - mean) * (r.*field - mean);
    double sd = runs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    out[name] = {{"mean", mean}, {"std", sd}};
  }
  out["runs"] = runs.size();
  return out;
}

}  // namespace mathlm
