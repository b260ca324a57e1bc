#include "attnparse/tree.hpp"

#include <stdexcept>
#include <string>

namespace attnparse {

namespace {

void append_subtree(std::vector<BinaryTree::Node>& out, const std::vector<BinaryTree::Node>& src,
                    int offset) {
  for (BinaryTree::Node n : src) {
    if (!n.is_leaf()) {
      n.left += offset;
      n.right += offset;
    }
    out.push_back(n);
  }
}

int build(std::vector<BinaryTree::Node>& out, std::size_t first, std::size_t last,
          const BinaryTree::SplitFn& split) {
  const int index = static_cast<int>(out.size());
  out.push_back({first, last, -1, -1});
  if (first == last) return index;
  const std::size_t k = split(first, last);
  if (k < first || k >= last) {
    throw std::logic_error("split point " + std::to_string(k) + " outside [" +
                           std::to_string(first) + ", " + std::to_string(last) + ")");
  }
  const int left = build(out, first, k, split);
  const int right = build(out, k + 1, last, split);
  out[static_cast<std::size_t>(index)].left = left;
  out[static_cast<std::size_t>(index)].right = right;
  return index;
}

void render(const BinaryTree& tree, int index, std::string& out) {
  const auto& n = tree.node(index);
  if (n.is_leaf()) {
    out += std::to_string(n.first);
    return;
  }
  out += '(';
  render(tree, n.left, out);
  out += ' ';
  render(tree, n.right, out);
  out += ')';
}

}  // namespace

BinaryTree BinaryTree::leaf(std::size_t position) {
  if (position == 0) throw std::invalid_argument("leaf positions are 1-based");
  return BinaryTree({Node{position, position, -1, -1}});
}

BinaryTree BinaryTree::join(const BinaryTree& left, const BinaryTree& right) {
  if (left.last() + 1 != right.first()) {
    throw std::invalid_argument("cannot join non-adjacent trees ending at " +
                                std::to_string(left.last()) + " and starting at " +
                                std::to_string(right.first()));
  }
  std::vector<Node> nodes;
  nodes.reserve(1 + left.nodes_.size() + right.nodes_.size());
  const int left_root = 1;
  const int right_root = 1 + static_cast<int>(left.nodes_.size());
  nodes.push_back({left.first(), right.last(), left_root, right_root});
  append_subtree(nodes, left.nodes_, left_root);
  append_subtree(nodes, right.nodes_, right_root);
  return BinaryTree(std::move(nodes));
}

BinaryTree BinaryTree::from_splits(std::size_t first, std::size_t last, const SplitFn& split) {
  if (first == 0 || last < first) throw std::invalid_argument("invalid leaf range");
  std::vector<Node> nodes;
  nodes.reserve(2 * (last - first) + 1);
  build(nodes, first, last, split);
  return BinaryTree(std::move(nodes));
}

std::vector<Span> BinaryTree::internal_spans() const {
  std::vector<Span> spans;
  spans.reserve(nodes_.size() / 2);
  for (const auto& n : nodes_) {
    if (!n.is_leaf()) spans.push_back(n.span());
  }
  return spans;
}

std::set<Span> BinaryTree::nontrivial_spans() const {
  std::set<Span> spans;
  for (const auto& n : nodes_) {
    if (!n.is_leaf() && !(n.first == first() && n.last == last())) spans.insert(n.span());
  }
  return spans;
}

std::string BinaryTree::to_string() const {
  std::string out;
  render(*this, 0, out);
  return out;
}

BinaryTree BinaryTree::relocated(std::size_t new_first) const {
  if (new_first == 0) throw std::invalid_argument("leaf positions are 1-based");
  std::vector<Node> nodes = nodes_;
  for (auto& n : nodes) {
    n.first = n.first - first() + new_first;
    n.last = n.last - first() + new_first;
  }
  return BinaryTree(std::move(nodes));
}

}  // namespace attnparse
