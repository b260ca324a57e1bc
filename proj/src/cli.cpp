#include "attnparse/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "attnparse/attention_io.hpp"
#include "attnparse/ensemble.hpp"
#include "attnparse/eval.hpp"
#include "attnparse/kernels.hpp"
#include "attnparse/selection_io.hpp"
#include "attnparse/treebank.hpp"
#include "attnparse/version.hpp"
#include "json.hpp"

namespace attnparse::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreprocessFlags {
  std::vector<std::string> punctuation_tags;
  bool keep_empty_elements = false;
  bool keep_function_tags = false;

  void add(CLI::App& cmd) {
    cmd.add_option("--punct-tags", punctuation_tags,
                   "POS tags removed before scoring (default: standard PTB punctuation)")
        ->delimiter(',');
    cmd.add_flag("--keep-empty-elements", keep_empty_elements, "keep -NONE- terminals");
    cmd.add_flag("--keep-function-tags", keep_function_tags, "do not strip NP-SBJ style suffixes");
  }

  PreprocessConfig config() const {
    PreprocessConfig c;
    if (!punctuation_tags.empty()) {
      c.punctuation_tags = std::set<std::string>(punctuation_tags.begin(), punctuation_tags.end());
    }
    c.remove_empty_elements = !keep_empty_elements;
    c.strip_function_tags = !keep_function_tags;
    return c;
  }
};

EmptyGoldPolicy parse_empty_gold(const std::string& name) {
  if (name == "exclude") return EmptyGoldPolicy::exclude;
  if (name == "one") return EmptyGoldPolicy::score_one;
  throw UsageError("--empty-gold must be 'exclude' or 'one'");
}

void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw UsageError(std::string(what) + " not found: " + path);
  }
}

ArchiveSet load_archives(const std::vector<std::string>& paths) {
  std::vector<AttentionArchive> archives;
  for (const auto& p : paths) {
    try {
      archives.push_back(read_archive(p));
    } catch (const ArchiveError& e) {
      throw DataError(p + ": " + e.what());
    }
  }
  try {
    return ArchiveSet(std::move(archives));
  } catch (const ArchiveError& e) {
    throw DataError(std::string("archives disagree: ") + e.what());
  }
}

std::vector<PreprocessedSentence> load_treebank(const std::string& path,
                                                const PreprocessConfig& config) {
  try {
    return preprocess_all(read_treebank_file(path), config);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void check_alignment(const ArchiveSet& archives, std::uint32_t id, std::size_t words) {
  if (!archives.has_sentence(id)) {
    throw DataError("sentence " + std::to_string(id) + " is missing from the archives");
  }
  const auto z = archives.sentence_length(id);
  if (z != words) {
    throw DataError("sentence " + std::to_string(id) + " has " + std::to_string(words) +
                    " words after preprocessing but the archives have z=" + std::to_string(z));
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

std::string format_val(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

std::string heads_text(const std::vector<HeadId>& heads, const std::vector<std::string>& models) {
  std::string out;
  for (const auto& h : heads) {
    if (!out.empty()) out += ' ';
    out += models.at(h.model) + ":" + std::to_string(h.layer) + "." + std::to_string(h.head);
  }
  return out;
}

// --------------------------------------------------------------------------
// select

struct SelectOptions {
  std::vector<std::string> archives;
  std::string treebank;
  std::string strategy;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> beam;
  std::string measure = "hel";
  std::optional<std::size_t> subset_count;
  std::optional<double> subset_fraction;
  std::uint64_t seed = 0;
  std::string empty_gold = "exclude";
  bool rank_normalize = false;
  std::string out;
  std::string trace;
  PreprocessFlags preprocess;
};

int cmd_select(const SelectOptions& o, std::ostream& out, std::ostream& err) {
  for (const auto& a : o.archives) require_file(a, "archive");
  require_file(o.treebank, "treebank");

  const Strategy strategy = [&] {
    try {
      return parse_strategy(o.strategy);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  Measure measure;
  try {
    measure = parse_measure(o.measure);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.top_k && *o.top_k < 1) throw UsageError("--top-k must be at least 1");
  if (o.beam && *o.beam < 1) throw UsageError("--beam must be at least 1");
  if (o.subset_count && o.subset_fraction) {
    throw UsageError("--subset-count and --subset-fraction are mutually exclusive");
  }

  const auto archives = load_archives(o.archives);
  const auto corpus = load_treebank(o.treebank, o.preprocess.config());

  std::vector<ValidationSentence> validation;
  for (const auto& s : corpus) {
    if (s.skipped) continue;
    const auto id = static_cast<std::uint32_t>(s.sentence.id);
    check_alignment(archives, id, s.sentence.size());
    validation.push_back({id, s.sentence.size(), s.gold.unlabeled});
  }
  if (validation.empty()) throw DataError("validation treebank has no usable sentences");

  SubsetInfo subset{validation.size(), validation.size(), std::nullopt, std::nullopt};
  if (o.subset_count || o.subset_fraction) {
    std::size_t count = 0;
    try {
      count = o.subset_count ? *o.subset_count : fraction_to_count(validation.size(), *o.subset_fraction);
      validation = subsample_validation(std::span<const ValidationSentence>(validation), count, o.seed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    subset = {count, subset.total, o.seed, o.subset_fraction};
  }
  err << "[select] " << archives.num_models() << " model(s), " << validation.size() << " of "
      << subset.total << " validation sentences\n";

  ScorerOptions scorer_options;
  scorer_options.measure = measure;
  scorer_options.empty_gold = parse_empty_gold(o.empty_gold);
  scorer_options.rank_normalized = o.rank_normalize;
  ValidationScorer scorer(archives, std::move(validation), scorer_options);
  const SetScorer val = [&scorer](std::span<const HeadId> heads) { return scorer.score(heads); };

  HeadPool pool;
  try {
    pool = build_pool(archives, scorer);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  const auto models = archives.model_ids();
  err << "[select] pool of " << pool.size() << " heads, best single "
      << heads_text({pool[0].head}, models) << " val=" << format_val(pool[0].val) << "\n";

  HeadSelection selection;
  switch (strategy) {
    case Strategy::single:
      selection = select_single(pool);
      break;
    case Strategy::layer:
      if (archives.num_models() != 1) throw UsageError("layer strategy needs exactly one archive");
      selection = select_layer(pool, val);
      break;
    case Strategy::topk:
      selection = select_topk(pool, o.top_k.value_or(default_top_k(archives.num_models())), val);
      break;
    case Strategy::greedy:
      selection = select_greedy(pool, val);
      break;
    case Strategy::beam:
      selection = select_beam(pool, o.beam.value_or(default_beam_size(archives.num_models())), val,
                              Execution::parallel);
      break;
  }
  selection.measure = measure;
  selection.rank_normalized = o.rank_normalize;
  selection.subset = subset;
  selection.model_ids = models;

  for (const auto& round : selection.trace) {
    for (std::size_t i = 0; i < round.vals.size(); ++i) {
      if (strategy == Strategy::beam && !round.accepted[i]) continue;
      err << "[select] round " << round.round << (round.accepted[i] ? " keep " : " drop ")
          << "val=" << format_val(round.vals[i]) << " {" << heads_text(round.sets[i], models)
          << "}\n";
    }
  }
  if (selection.degenerate) {
    err << "[select] warning: no head improved on 0; falling back to the best single head\n";
  }

  write_text(o.out, selection_to_json(selection).dump(2) + "\n", out);
  if (!o.trace.empty()) write_text(o.trace, selection_to_json(selection, true)["trace"].dump(2) + "\n", out);
  if (o.out != "-") {
    out << to_string(strategy) << ": " << selection.chosen.size() << " head(s), validation F1 "
        << format_val(selection.validation_f1) << "\n";
  }
  return kExitOk;
}

// --------------------------------------------------------------------------
// parse

struct ParseOptions {
  std::vector<std::string> archives;
  std::string selection;
  std::string treebank;
  std::string sentences;
  std::string out;
  PreprocessFlags preprocess;
};

std::vector<Sentence> read_sentences(const std::string& path) {
  std::ifstream in(path);
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    Sentence s;
    s.id = out.size();
    std::istringstream words(line);
    for (std::string w; words >> w;) s.words.push_back(w);
    out.push_back(std::move(s));
  }
  return out;
}

int cmd_parse(const ParseOptions& o, std::ostream& out, std::ostream&) {
  for (const auto& a : o.archives) require_file(a, "archive");
  require_file(o.selection, "selection");
  if (o.treebank.empty() == o.sentences.empty()) {
    throw UsageError("give exactly one of --treebank or --sentences");
  }
  require_file(o.treebank.empty() ? o.sentences : o.treebank, "input");

  HeadSelection selection;
  {
    std::ifstream in(o.selection);
    try {
      selection = selection_from_json(json::parse(in));
    } catch (const std::exception& e) {
      throw DataError(o.selection + ": " + e.what());
    }
  }
  const auto archives = load_archives(o.archives);
  std::vector<HeadId> heads;
  try {
    heads = resolve_heads(selection, archives);
  } catch (const std::out_of_range& e) {
    throw DataError(e.what());
  }

  std::vector<Sentence> sentences;
  if (!o.treebank.empty()) {
    for (auto& s : load_treebank(o.treebank, o.preprocess.config())) {
      sentences.push_back(std::move(s.sentence));
    }
  } else {
    sentences = read_sentences(o.sentences);
  }

  std::vector<std::uint32_t> ids;
  for (const auto& s : sentences) {
    if (s.words.empty()) continue;
    check_alignment(archives, static_cast<std::uint32_t>(s.id), s.size());
    ids.push_back(static_cast<std::uint32_t>(s.id));
  }
  const auto trees = ensemble_parse_all(archives, heads, ids, selection.measure,
                                        selection.rank_normalized, Execution::parallel);
  std::string text;
  std::size_t next = 0;
  for (const auto& s : sentences) {
    if (!s.words.empty()) text += write_bracketed(trees[next++], s);
    text += '\n';
  }
  write_text(o.out, text, out);
  return kExitOk;
}

// --------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string pred;
  std::string gold;
  std::vector<std::string> labels = default_report_labels();
  std::string empty_gold = "exclude";
  std::string report;
  PreprocessFlags preprocess;
};

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream&) {
  require_file(o.pred, "prediction file");
  require_file(o.gold, "gold treebank");
  const auto policy = parse_empty_gold(o.empty_gold);
  const auto config = o.preprocess.config();
  const auto gold = load_treebank(o.gold, config);

  std::vector<std::string> pred_lines;
  {
    std::ifstream in(o.pred);
    for (std::string line; std::getline(in, line);) pred_lines.push_back(line);
  }
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i].skipped) usable.push_back(i);
  }
  // predictions either cover every gold line (blank for skipped sentences)
  // or only the sentences that survive preprocessing
  std::vector<std::optional<std::string>> aligned(gold.size());
  if (pred_lines.size() == gold.size()) {
    for (std::size_t i = 0; i < gold.size(); ++i) aligned[i] = pred_lines[i];
  } else if (pred_lines.size() == usable.size()) {
    for (std::size_t k = 0; k < usable.size(); ++k) aligned[usable[k]] = pred_lines[k];
  } else {
    throw UsageError("line-count mismatch: " + std::to_string(pred_lines.size()) +
                     " predictions vs " + std::to_string(gold.size()) + " gold trees (" +
                     std::to_string(usable.size()) + " after skipping empty sentences)");
  }

  std::vector<SentenceScore> scores;
  std::vector<std::set<Span>> pred_spans;
  std::vector<SpanSet> gold_spans;
  std::size_t skipped_empty_gold = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].skipped) continue;
    const std::string& line = *aligned[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      throw DataError("no prediction for sentence " + std::to_string(i));
    }
    PreprocessedSentence pred;
    try {
      pred = preprocess(parse_bracketed(line), config, i);
    } catch (const ParseError& e) {
      throw DataError("prediction " + std::to_string(i) + ": " + e.what());
    }
    if (pred.sentence.size() != gold[i].sentence.size()) {
      throw DataError("prediction " + std::to_string(i) + " has " +
                      std::to_string(pred.sentence.size()) + " words, gold has " +
                      std::to_string(gold[i].sentence.size()));
    }
    scores.push_back(sentence_f1(pred.gold.unlabeled, gold[i].gold.unlabeled, policy));
    if (scores.back().skipped) ++skipped_empty_gold;
    pred_spans.push_back(std::move(pred.gold.unlabeled));
    gold_spans.push_back(gold[i].gold);
  }

  double f1 = 0.0;
  try {
    f1 = corpus_f1(scores);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  LabelRecallReport recall;
  try {
    recall = label_recall(pred_spans, gold_spans, o.labels);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  json labels = json::object();
  for (const auto& [label, r] : recall) {
    const auto value = r.recall();
    labels[label] = {{"matched", r.matched},
                     {"gold", r.gold},
                     {"recall", value ? json(*value) : json(nullptr)}};
  }
  json tags = json::array();
  for (const auto& t : config.punctuation_tags) tags.push_back(t);
  const json report = {
      {"corpus_f1", f1},
      {"sentences",
       {{"total", gold.size()},
        {"scored", scores.size() - skipped_empty_gold},
        {"skipped_empty_gold", skipped_empty_gold},
        {"skipped_no_words", gold.size() - usable.size()}}},
      {"label_recall", labels},
      {"conventions",
       {{"f1", "unlabeled sentence-level mean"},
        {"trivial_spans", "excluded"},
        {"empty_gold", policy == EmptyGoldPolicy::exclude ? "exclude" : "one"},
        {"punctuation_tags", tags}}},
      {"version", kVersion},
  };
  if (!o.report.empty()) write_text(o.report, report.dump(2) + "\n", out);

  out << "corpus F1        " << std::fixed << std::setprecision(2) << 100.0 * f1 << "\n";
  out << "sentences        " << gold.size() << " total, " << scores.size() - skipped_empty_gold
      << " scored, " << skipped_empty_gold << " empty gold, " << gold.size() - usable.size()
      << " empty after filtering\n";
  out << "label  recall  matched/gold\n";
  for (const auto& label : o.labels) {
    const auto& r = recall.at(label);
    out << std::left << std::setw(7) << label << std::right << std::setw(6);
    if (auto v = r.recall()) {
      out << std::fixed << std::setprecision(1) << 100.0 * *v;
    } else {
      out << "-";
    }
    out << "  " << r.matched << "/" << r.gold << "\n";
  }
  return kExitOk;
}

// --------------------------------------------------------------------------
// validate-archive

int cmd_validate(const std::string& path, std::ostream& out) {
  std::size_t violations = 0;
  constexpr std::size_t kShown = 20;
  try {
    ArchiveReader reader(path);
    const auto& h = reader.header();
    out << "format     ATNA v" << h.version << "\n"
        << "model      " << h.model_id << "\n"
        << "layers     " << h.num_layers << "\n"
        << "heads      " << h.num_heads << "\n"
        << "sentences  " << h.num_sentences << "\n";
    std::set<std::uint32_t> ids;
    while (auto s = reader.next(false)) {
      if (!ids.insert(s->id).second) {
        ++violations;
        out << "violation: shape mismatch (sentence " << s->id << "): duplicate sentence id\n";
      }
      for (const auto& v : check_sentence(*s, h.num_layers, h.num_heads, SIZE_MAX)) {
        if (++violations <= kShown) {
          out << "violation: " << to_string(v.kind) << " (" << v.where.describe()
              << "): " << v.message << "\n";
        }
      }
    }
  } catch (const ArchiveError& e) {
    out << "error: " << e.what() << "\n";
    out << "INVALID\n";
    return kExitDataError;
  }
  if (violations > kShown) out << "... " << violations - kShown << " more\n";
  if (std::filesystem::is_regular_file(sidecar_path(path))) {
    out << "sidecar    " << sidecar_path(path) << "\n";
  }
  if (violations > 0) {
    out << violations << " violation(s)\nINVALID\n";
    return kExitDataError;
  }
  out << "VALID\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constituency trees from transformer attention heads"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI file with default option values; flags win");
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (0 = all cores, 1 = sequential)")
      ->check(CLI::NonNegativeNumber);

  SelectOptions sel;
  auto* select = app.add_subcommand("select", "choose attention heads on a validation treebank");
  select->add_option("--archive", sel.archives, "ATNA archive (repeat for several models)")->required();
  select->add_option("--treebank", sel.treebank, "validation treebank, one tree per line")->required();
  select->add_option("--strategy", sel.strategy, "single | layer | topk | greedy | beam")->required();
  select->add_option("-k,--top-k", sel.top_k, "K for topk (default 20, 30 with several models)");
  select->add_option("-b,--beam", sel.beam, "beam size (default 5, 30 with several models)");
  select->add_option("--measure", sel.measure, "hel | jsd")->capture_default_str();
  select->add_option("--subset-count", sel.subset_count, "validate on this many sentences");
  select->add_option("--subset-fraction", sel.subset_fraction, "validate on this fraction");
  select->add_option("--seed", sel.seed, "subset sampling seed")->capture_default_str();
  select->add_option("--empty-gold", sel.empty_gold, "exclude | one")->capture_default_str();
  select->add_flag("--rank-normalize", sel.rank_normalize, "rank-normalize heights before averaging");
  select->add_option("-o,--out", sel.out, "selection JSON path ('-' for stdout)")->required();
  select->add_option("--trace", sel.trace, "write the per-round search trace as JSON");
  sel.preprocess.add(*select);

  ParseOptions par;
  auto* parse = app.add_subcommand("parse", "induce trees with a head selection");
  parse->add_option("--archive", par.archives, "ATNA archive (repeat for several models)")->required();
  parse->add_option("--selection", par.selection, "selection JSON from 'select'")->required();
  parse->add_option("--treebank", par.treebank, "treebank supplying the words");
  parse->add_option("--sentences", par.sentences, "pre-tokenized sentences, one per line");
  parse->add_option("-o,--out", par.out, "output trees ('-' for stdout)")->required();
  par.preprocess.add(*parse);

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "unlabeled F1 and per-label recall");
  evaluate->add_option("--pred", ev.pred, "predicted trees, one per line")->required();
  evaluate->add_option("--gold", ev.gold, "gold treebank")->required();
  evaluate->add_option("--labels", ev.labels, "labels for recall")->delimiter(',');
  evaluate->add_option("--empty-gold", ev.empty_gold, "exclude | one")->capture_default_str();
  evaluate->add_option("--report", ev.report, "write the JSON report here");
  ev.preprocess.add(*evaluate);

  std::string archive_path;
  auto* validate = app.add_subcommand("validate-archive", "check an ATNA archive");
  validate->add_option("path", archive_path, "archive file")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  set_worker_count(workers);
  try {
    if (*select) return cmd_select(sel, out, err);
    if (*parse) return cmd_parse(par, out, err);
    if (*evaluate) return cmd_evaluate(ev, out, err);
    if (*validate) return cmd_validate(archive_path, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsageError;
}

}  // namespace attnparse::cli
