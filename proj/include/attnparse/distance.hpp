#pragma once

#include <span>
#include <vector>

#include "attnparse/tree.hpp"

namespace attnparse {

/// Syntactic distance over the z-1 gaps of a z-word sentence; entry g
/// (0-based) sits between word g+1 and word g+2.
using DistanceVector = std::vector<double>;

/// Height encoding: a leaf yields []; a node yields left ++ [h] ++ right with
/// h = 1 + the largest entry of left and right (taken as 0 when both are
/// empty). The root gap is the strict maximum.
DistanceVector tree_to_distance(const BinaryTree& tree);

/// Recursive argmax split; ties go to the leftmost gap. The tree covers
/// positions 1..d.size()+1.
BinaryTree distance_to_tree(std::span<const double> distances);

/// Element-wise mean. Throws std::invalid_argument on an empty list or
/// mismatched lengths.
DistanceVector average_distances(std::span<const DistanceVector> distances);

/// Replaces each value by its average rank divided by the vector length, so
/// every vector lands in (0, 1]. Optional pre-averaging step, off by default.
DistanceVector rank_normalize(std::span<const double> distances);

}  // namespace attnparse
