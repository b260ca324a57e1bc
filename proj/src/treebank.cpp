#include "attnparse/treebank.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <string>

namespace attnparse {

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

std::size_t LabeledTree::num_terminals() const {
  if (is_terminal()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.num_terminals();
  return n;
}

namespace {

void collect_words(const LabeledTree& t, std::vector<std::string>& out) {
  if (t.is_terminal()) {
    out.push_back(t.word);
    return;
  }
  for (const auto& c : t.children) collect_words(c, out);
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  LabeledTree parse() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty input", 0);
    if (text_[pos_] != '(') throw ParseError("expected '('", pos_);
    LabeledTree tree = parse_node();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing content", pos_);
    return tree;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string_view atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  [[noreturn]] void unclosed(std::size_t open) const {
    throw ParseError("unclosed bracket", open);
  }

  // Precondition: text_[pos_] == '('.
  LabeledTree parse_node() {
    const std::size_t open = pos_++;
    LabeledTree node;
    skip_space();
    if (pos_ == text_.size()) unclosed(open);
    if (text_[pos_] != '(' && text_[pos_] != ')') node.label = std::string(atom());
    skip_space();
    if (pos_ == text_.size()) unclosed(open);

    if (text_[pos_] == ')') throw ParseError("empty constituent", open);
    if (text_[pos_] != '(') {
      node.word = std::string(atom());
      skip_space();
      if (pos_ == text_.size() || text_[pos_] != ')') unclosed(open);
      ++pos_;
      return node;
    }
    while (true) {
      skip_space();
      if (pos_ == text_.size()) unclosed(open);
      if (text_[pos_] == ')') {
        ++pos_;
        return node;
      }
      if (text_[pos_] != '(') {
        throw ParseError("bare token among subtrees", pos_);
      }
      node.children.push_back(parse_node());
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void render(const LabeledTree& t, std::string& out) {
  out += '(';
  out += t.label;
  if (t.is_terminal()) {
    out += ' ';
    out += t.word;
  } else {
    for (const auto& c : t.children) {
      out += ' ';
      render(c, out);
    }
  }
  out += ')';
}

std::optional<LabeledTree> filter_node(const LabeledTree& t, const PreprocessConfig& config) {
  if (t.is_terminal()) {
    if (config.remove_empty_elements && t.label == "-NONE-") return std::nullopt;
    if (config.punctuation_tags.contains(t.label)) return std::nullopt;
    return t;
  }
  LabeledTree out;
  out.label = t.label;
  for (const auto& c : t.children) {
    if (auto kept = filter_node(c, config)) out.children.push_back(std::move(*kept));
  }
  if (out.children.empty()) return std::nullopt;
  return out;
}

// Returns the number of terminals consumed.
std::size_t collect_spans(const LabeledTree& t, std::size_t first, std::size_t sentence_length,
                          const PreprocessConfig& config, SpanSet& out) {
  if (t.is_terminal()) return 1;
  std::size_t width = 0;
  for (const auto& c : t.children) {
    width += collect_spans(c, first + width, sentence_length, config, out);
  }
  const Span span{first, first + width - 1};
  if (!span.trivial_in(sentence_length)) {
    out.unlabeled.insert(span);
    std::string label = config.strip_function_tags ? base_label(t.label) : t.label;
    if (!label.empty()) out.labeled.push_back({span, std::move(label)});
  }
  return width;
}

void write_node(const BinaryTree& tree, int index, const Sentence& words, std::string& out) {
  const auto& n = tree.node(index);
  if (n.is_leaf()) {
    out += "(X ";
    out += words.words[n.first - 1];
    out += ')';
    return;
  }
  out += "(X ";
  write_node(tree, n.left, words, out);
  out += ' ';
  write_node(tree, n.right, words, out);
  out += ')';
}

BinaryTree binarize(const LabeledTree& t, std::size_t first) {
  if (t.is_terminal()) return BinaryTree::leaf(first);
  if (t.children.size() == 1) return binarize(t.children.front(), first);
  if (t.children.size() != 2) {
    throw std::invalid_argument("node '" + t.label + "' has " + std::to_string(t.children.size()) +
                                " children; expected a binary tree");
  }
  BinaryTree left = binarize(t.children[0], first);
  BinaryTree right = binarize(t.children[1], left.last() + 1);
  return BinaryTree::join(left, right);
}

}  // namespace

std::vector<std::string> LabeledTree::words() const {
  std::vector<std::string> out;
  collect_words(*this, out);
  return out;
}

LabeledTree parse_bracketed(std::string_view text) { return BracketParser(text).parse(); }

std::vector<LabeledTree> read_treebank(std::istream& in) {
  std::vector<LabeledTree> trees;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      trees.push_back(parse_bracketed(line));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), e.offset());
    }
  }
  return trees;
}

std::vector<LabeledTree> read_treebank_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open treebank '" + path + "'");
  return read_treebank(in);
}

std::string to_bracketed(const LabeledTree& tree) {
  std::string out;
  render(tree, out);
  return out;
}

const std::set<std::string>& default_punctuation_tags() {
  static const std::set<std::string> tags = {".", ",", ":", "``", "''", "-LRB-", "-RRB-"};
  return tags;
}

std::string base_label(std::string_view label) {
  if (label.empty() || label.front() == '-') return std::string(label);
  const auto cut = label.find_first_of("-=");
  return std::string(label.substr(0, cut));
}

std::optional<LabeledTree> filter_tree(const LabeledTree& tree, const PreprocessConfig& config) {
  return filter_node(tree, config);
}

PreprocessedSentence preprocess(const LabeledTree& tree, const PreprocessConfig& config,
                                std::size_t id) {
  PreprocessedSentence out;
  out.sentence.id = id;
  auto filtered = filter_tree(tree, config);
  if (!filtered) {
    out.skipped = true;
    return out;
  }
  out.sentence.words = filtered->words();
  collect_spans(*filtered, 1, out.sentence.size(), config, out.gold);
  auto& labeled = out.gold.labeled;
  std::sort(labeled.begin(), labeled.end());
  labeled.erase(std::unique(labeled.begin(), labeled.end()), labeled.end());
  return out;
}

std::vector<PreprocessedSentence> preprocess_all(const std::vector<LabeledTree>& trees,
                                                 const PreprocessConfig& config) {
  std::vector<PreprocessedSentence> out;
  out.reserve(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) out.push_back(preprocess(trees[i], config, i));
  return out;
}

std::string write_bracketed(const BinaryTree& tree, const Sentence& words) {
  if (tree.num_leaves() != words.size() || tree.first() != 1) {
    throw std::invalid_argument("tree has " + std::to_string(tree.num_leaves()) +
                                " leaves but sentence has " + std::to_string(words.size()) +
                                " words");
  }
  std::string out;
  write_node(tree, 0, words, out);
  return out;
}

BinaryTree to_binary_tree(const LabeledTree& tree) { return binarize(tree, 1); }

}  // namespace attnparse
