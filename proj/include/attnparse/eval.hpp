#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "attnparse/tree.hpp"
#include "attnparse/treebank.hpp"

namespace attnparse {

/// What to do with a sentence whose filtered gold span set is empty.
enum class EmptyGoldPolicy {
  exclude,    // drop from the corpus mean
  score_one,  // count as a perfect 1.0
};

struct SentenceScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool skipped = false;
};

/// Unlabeled F1 over non-trivial span sets of the same sentence. Under
/// EmptyGoldPolicy::exclude an empty gold set marks the sentence skipped.
SentenceScore sentence_f1(const std::set<Span>& pred, const std::set<Span>& gold,
                          EmptyGoldPolicy policy = EmptyGoldPolicy::exclude);

/// Mean F1 over non-skipped sentences. Throws std::invalid_argument when every
/// sentence is skipped (or the list is empty).
double corpus_f1(std::span<const SentenceScore> scores);

/// The six phrasal categories usually reported for PTB.
const std::vector<std::string>& default_report_labels();
/// PTB phrasal and clausal category labels.
const std::set<std::string>& ptb_phrase_labels();

struct LabelRecall {
  std::size_t matched = 0;
  std::size_t gold = 0;
  /// nullopt when the corpus has no gold constituent with this label.
  std::optional<double> recall() const {
    if (gold == 0) return std::nullopt;
    return static_cast<double>(matched) / static_cast<double>(gold);
  }
};

using LabelRecallReport = std::map<std::string, LabelRecall>;

/// Counts, per requested label, gold constituents whose span appears in the
/// aligned predicted span set. Trivial spans are excluded on both sides.
/// Throws std::invalid_argument for labels that are neither PTB categories nor
/// present in the gold data; the message lists the known labels.
LabelRecallReport label_recall(std::span<const std::set<Span>> pred,
                               std::span<const SpanSet> gold,
                               std::span<const std::string> labels);

}  // namespace attnparse
