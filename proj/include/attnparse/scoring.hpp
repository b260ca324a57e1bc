#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/tree.hpp"

namespace attnparse {

enum class Measure { hellinger, jensen_shannon };

std::string_view to_string(Measure m);
/// Accepts "hel"/"hellinger" and "jsd"/"jensen-shannon" (case-insensitive).
Measure parse_measure(std::string_view name);

namespace detail {
inline void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("distribution length mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}
}  // namespace detail

/// (1/sqrt 2) * ||sqrt p - sqrt q||_2, in [0, 1].
template <std::floating_point T>
double hellinger(std::span<const T> p, std::span<const T> q) {
  detail::check_lengths(p.size(), q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(static_cast<double>(p[i])) - std::sqrt(static_cast<double>(q[i]));
    sum += d * d;
  }
  return std::min(1.0, std::sqrt(sum / 2.0));
}

/// Square root of the base-2 Jensen-Shannon divergence, in [0, 1].
/// 0 * log 0 is taken as 0.
template <std::floating_point T>
double jsd(std::span<const T> p, std::span<const T> q) {
  detail::check_lengths(p.size(), q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p[i];
    const double b = q[i];
    const double m = 0.5 * (a + b);
    double term = 0.0;
    if (a > 0.0) term += a * std::log2(a / m);
    if (b > 0.0) term += b * std::log2(b / m);
    sum += term;
  }
  return std::min(1.0, std::sqrt(std::max(0.0, 0.5 * sum)));
}

template <std::floating_point T>
double measure_distance(Measure m, std::span<const T> p, std::span<const T> q) {
  return m == Measure::hellinger ? hellinger(p, q) : jsd(p, q);
}

/// Symmetric z x z matrix of pairwise row distances with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t z) : z_(z), values_(z * z, 0.0) {}
  /// Takes a full row-major matrix; throws std::invalid_argument if it is not
  /// square, symmetric, zero-diagonal and within [0, 1].
  DistanceMatrix(std::size_t z, std::vector<double> values);

  std::size_t size() const { return z_; }
  /// 0-based access.
  double operator()(std::size_t x, std::size_t y) const { return values_[x * z_ + y]; }
  void set(std::size_t x, std::size_t y, double v) {
    values_[x * z_ + y] = v;
    values_[y * z_ + x] = v;
  }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t z_ = 0;
  std::vector<double> values_;
};

/// D[x][y] = measure(row x, row y) over one head's attention map.
DistanceMatrix distance_matrix(const AttentionMap& map, Measure measure);

/// Pair sums over every span in O(1) after O(z^2) precomputation.
///
/// prefix_(a, b) holds the sum of D[x][y] over x < a, y < b, x < y, so the
/// sum over all pairs inside [i, j] (0-based) is
/// prefix_(j+1, j+1) - prefix_(i, j+1).
class SpanPairSums {
 public:
  explicit SpanPairSums(const DistanceMatrix& d);

  std::size_t size() const { return z_; }
  /// Sum over unordered pairs inside the 1-based inclusive span [first, last].
  double pair_sum(std::size_t first, std::size_t last) const {
    return prefix(last, last) - prefix(first - 1, last);
  }
  /// Mean pairwise distance inside [first, last]; 0 for a single word.
  double pair_score(std::size_t first, std::size_t last) const;

 private:
  double prefix(std::size_t a, std::size_t b) const { return prefix_[a * (z_ + 1) + b]; }
  std::size_t z_;
  std::vector<double> prefix_;
};

/// Mean of D over all unordered word pairs in the 1-based span [first, last];
/// 0 when first == last. Throws std::out_of_range on invalid spans.
double pair_score(const DistanceMatrix& d, std::size_t first, std::size_t last);

/// CKY chart; indices are 1-based (row/column 0 unused).
struct ScoreChart {
  std::size_t z = 0;
  std::vector<double> span_score;
  std::vector<std::size_t> best_split;

  double score(std::size_t first, std::size_t last) const {
    return span_score[first * (z + 1) + last];
  }
  std::size_t split(std::size_t first, std::size_t last) const {
    return best_split[first * (z + 1) + last];
  }
};

struct DecodeResult {
  BinaryTree tree;
  ScoreChart chart;
  /// Sum of pair scores over all internal spans of `tree`.
  double cost = 0.0;
};

/// Minimum-cost binary tree where a span costs its pair score plus its best
/// split. Split ties go to the smallest k. Throws std::invalid_argument for z = 0.
DecodeResult cky_decode(const DistanceMatrix& d);

/// Tree cost recomputed from a chart-independent span walk.
double tree_cost(const BinaryTree& tree, const DistanceMatrix& d);

/// Chart as JSON text: {"z":..,"span_score":[[...]],"best_split":[[...]]}.
std::string chart_to_json(const ScoreChart& chart);

}  // namespace attnparse
