#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "attnparse/tree.hpp"

namespace attnparse {

/// Constituency tree as read from a treebank. A node without children is a
/// terminal: `label` holds its POS tag and `word` the token.
struct LabeledTree {
  std::string label;
  std::string word;
  std::vector<LabeledTree> children;

  bool is_terminal() const { return children.empty(); }
  std::size_t num_terminals() const;
  std::vector<std::string> words() const;
  bool operator==(const LabeledTree&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  /// Character offset into the input where parsing failed.
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses one bracketed tree, e.g. "(S (NP (DT the) (NN cat)) (VP (VBD sat)))".
/// PTB-style empty root labels "( (S ...))" are accepted. Throws ParseError.
LabeledTree parse_bracketed(std::string_view text);

/// Reads one tree per non-blank line. Throws ParseError annotated with the line.
std::vector<LabeledTree> read_treebank(std::istream& in);
std::vector<LabeledTree> read_treebank_file(const std::string& path);

std::string to_bracketed(const LabeledTree& tree);

struct Sentence {
  std::size_t id = 0;
  std::vector<std::string> words;

  std::size_t size() const { return words.size(); }
  bool operator==(const Sentence&) const = default;
};

/// Gold constituents of one sentence. `unlabeled` is the set F1 is computed
/// on; `labeled` keeps every constituent (unary chain links included) for
/// per-label recall. Both exclude trivial spans.
struct SpanSet {
  struct Labeled {
    Span span;
    std::string label;
    auto operator<=>(const Labeled&) const = default;
  };

  std::set<Span> unlabeled;
  std::vector<Labeled> labeled;

  bool empty() const { return unlabeled.empty(); }
  bool operator==(const SpanSet&) const = default;
};

/// Standard PTB punctuation tags removed before scoring.
const std::set<std::string>& default_punctuation_tags();

struct PreprocessConfig {
  std::set<std::string> punctuation_tags = default_punctuation_tags();
  /// Drop -NONE- empty elements (traces, null complementizers).
  bool remove_empty_elements = true;
  /// "NP-SBJ-1" -> "NP", "PP=2" -> "PP".
  bool strip_function_tags = true;
};

struct PreprocessedSentence {
  Sentence sentence;
  SpanSet gold;
  /// Nothing left after filtering; such sentences are neither parsed nor scored.
  bool skipped = false;
};

/// Removes filtered terminals and collapses constituents left empty. Returns
/// nullopt when no terminal survives.
std::optional<LabeledTree> filter_tree(const LabeledTree& tree, const PreprocessConfig& config);

PreprocessedSentence preprocess(const LabeledTree& tree, const PreprocessConfig& config,
                                std::size_t id = 0);

std::vector<PreprocessedSentence> preprocess_all(const std::vector<LabeledTree>& trees,
                                                 const PreprocessConfig& config);

/// Label with function tags and coindexing removed. Labels that start with a
/// dash ("-NONE-", "-LRB-") are returned unchanged.
std::string base_label(std::string_view label);

/// Unlabeled bracketed rendering with the dummy label "X" on every node,
/// e.g. "(X (X a) (X (X b) (X c)))". Throws std::invalid_argument when the
/// leaf count differs from the number of words.
std::string write_bracketed(const BinaryTree& tree, const Sentence& words);

/// Inverse of write_bracketed for strictly binary inputs; throws
/// std::invalid_argument on non-binary nodes.
BinaryTree to_binary_tree(const LabeledTree& tree);

}  // namespace attnparse
