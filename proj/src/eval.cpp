#include "attnparse/eval.hpp"

#include <stdexcept>

namespace attnparse {

SentenceScore sentence_f1(const std::set<Span>& pred, const std::set<Span>& gold,
                          EmptyGoldPolicy policy) {
  SentenceScore s;
  if (gold.empty()) {
    if (policy == EmptyGoldPolicy::exclude) {
      s.skipped = true;
    } else {
      s.precision = s.recall = s.f1 = 1.0;
    }
    return s;
  }
  std::size_t overlap = 0;
  for (const Span& span : pred) overlap += gold.contains(span) ? 1 : 0;
  s.precision = pred.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(pred.size());
  s.recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

double corpus_f1(std::span<const SentenceScore> scores) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : scores) {
    if (s.skipped) continue;
    sum += s.f1;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("no scorable sentences (all skipped)");
  return sum / static_cast<double>(n);
}

const std::vector<std::string>& default_report_labels() {
  static const std::vector<std::string> labels = {"SBAR", "NP", "VP", "PP", "ADJP", "ADVP"};
  return labels;
}

const std::set<std::string>& ptb_phrase_labels() {
  static const std::set<std::string> labels = {
      "ADJP", "ADVP", "CONJP", "FRAG", "INTJ", "LST", "NAC",  "NP",   "NX",    "PP",
      "PRN",  "PRT",  "QP",    "RRC",  "UCP",  "VP",  "WHADJP", "WHADVP", "WHNP", "WHPP",
      "X",    "S",    "SBAR",  "SBARQ", "SINV", "SQ"};
  return labels;
}

LabelRecallReport label_recall(std::span<const std::set<Span>> pred,
                               std::span<const SpanSet> gold,
                               std::span<const std::string> labels) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("label recall needs aligned corpora: " +
                                std::to_string(pred.size()) + " predictions vs " +
                                std::to_string(gold.size()) + " gold sentences");
  }
  std::set<std::string> known = ptb_phrase_labels();
  for (const auto& g : gold) {
    for (const auto& c : g.labeled) known.insert(c.label);
  }
  LabelRecallReport report;
  for (const auto& label : labels) {
    if (!known.contains(label)) {
      std::string list;
      for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
      throw std::invalid_argument("unknown label '" + label + "'; known labels: " + list);
    }
    report[label];
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (const auto& c : gold[i].labeled) {
      auto it = report.find(c.label);
      if (it == report.end()) continue;
      ++it->second.gold;
      if (pred[i].contains(c.span)) ++it->second.matched;
    }
  }
  return report;
}

}  // namespace attnparse
