#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace attnparse {

/// Contiguous word range, 1-based and inclusive on both ends.
struct Span {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t width() const { return last - first + 1; }
  bool trivial_in(std::size_t sentence_length) const {
    return first == last || (first == 1 && last == sentence_length);
  }
  auto operator<=>(const Span&) const = default;
};

/// Strictly binary tree over word positions 1..z.
///
/// Nodes are stored in pre-order (root first, then the full left subtree,
/// then the right subtree), so two trees with the same shape always have
/// identical node arrays and compare equal.
class BinaryTree {
 public:
  struct Node {
    std::size_t first = 0;
    std::size_t last = 0;
    int left = -1;
    int right = -1;

    bool is_leaf() const { return left < 0; }
    Span span() const { return {first, last}; }
    bool operator==(const Node&) const = default;
  };

  /// Returns the split gap k (first <= k < last) for the range [first, last]:
  /// the left child covers [first, k] and the right child [k + 1, last].
  using SplitFn = std::function<std::size_t(std::size_t first, std::size_t last)>;

  BinaryTree() : BinaryTree(leaf(1)) {}

  static BinaryTree leaf(std::size_t position = 1);
  static BinaryTree join(const BinaryTree& left, const BinaryTree& right);
  /// Builds a tree over [first, last] by recursively asking `split` where to
  /// divide each multi-word range.
  static BinaryTree from_splits(std::size_t first, std::size_t last, const SplitFn& split);

  std::size_t num_leaves() const { return nodes_.front().last - nodes_.front().first + 1; }
  std::size_t first() const { return nodes_.front().first; }
  std::size_t last() const { return nodes_.front().last; }
  const Node& root() const { return nodes_.front(); }
  const Node& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Spans of all internal nodes, root included.
  std::vector<Span> internal_spans() const;
  /// Internal spans minus the whole-sentence span; leaves never appear.
  std::set<Span> nontrivial_spans() const;

  /// Compact shape rendering, e.g. "(1 (2 3))".
  std::string to_string() const;

  /// Same shape over positions shifted so that the first leaf is `first`.
  BinaryTree relocated(std::size_t first) const;

  bool operator==(const BinaryTree&) const = default;

 private:
  explicit BinaryTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
  std::vector<Node> nodes_;
};

}  // namespace attnparse
