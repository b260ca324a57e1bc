#include "attnparse/distance.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace attnparse {

namespace {

// Writes heights for the subtree at `index` into out[first-1 .. last-2] and
// returns the subtree's maximum height (0 for a leaf).
double fill_heights(const BinaryTree& tree, int index, DistanceVector& out) {
  const auto& n = tree.node(index);
  if (n.is_leaf()) return 0.0;
  const double left = fill_heights(tree, n.left, out);
  const double right = fill_heights(tree, n.right, out);
  const double h = 1.0 + std::max(left, right);
  const std::size_t gap = tree.node(n.left).last - tree.first();
  out[gap] = h;
  return h;
}

}  // namespace

DistanceVector tree_to_distance(const BinaryTree& tree) {
  DistanceVector out(tree.num_leaves() - 1, 0.0);
  fill_heights(tree, 0, out);
  return out;
}

BinaryTree distance_to_tree(std::span<const double> distances) {
  const std::size_t z = distances.size() + 1;
  return BinaryTree::from_splits(1, z, [&](std::size_t first, std::size_t last) {
    // gaps first..last-1 (1-based) map to distances[first-1 .. last-2]
    const auto begin = distances.begin() + static_cast<std::ptrdiff_t>(first - 1);
    const auto end = distances.begin() + static_cast<std::ptrdiff_t>(last - 1);
    const auto it = std::max_element(begin, end);
    return first + static_cast<std::size_t>(it - begin);
  });
}

DistanceVector average_distances(std::span<const DistanceVector> distances) {
  if (distances.empty()) throw std::invalid_argument("cannot average an empty list");
  const std::size_t n = distances.front().size();
  DistanceVector sum(n, 0.0);
  for (const auto& d : distances) {
    if (d.size() != n) {
      throw std::invalid_argument("distance length mismatch: " + std::to_string(d.size()) +
                                  " vs " + std::to_string(n));
    }
    for (std::size_t g = 0; g < n; ++g) sum[g] += d[g];
  }
  const double count = static_cast<double>(distances.size());
  for (auto& v : sum) v /= count;
  return sum;
}

DistanceVector rank_normalize(std::span<const double> distances) {
  const std::size_t n = distances.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  DistanceVector out(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && distances[order[j + 1]] == distances[order[i]]) ++j;
    // ranks i+1..j+1 share their mean
    const double rank = (static_cast<double>(i + j) / 2.0 + 1.0) / static_cast<double>(n);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = rank;
    i = j + 1;
  }
  return out;
}

}  // namespace attnparse
