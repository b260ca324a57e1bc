#include "attnparse/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "json.hpp"

namespace attnparse {

std::string_view to_string(Measure m) {
  return m == Measure::hellinger ? "hel" : "jsd";
}

Measure parse_measure(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "hel" || lower == "hellinger") return Measure::hellinger;
  if (lower == "jsd" || lower == "jensen-shannon") return Measure::jensen_shannon;
  throw std::invalid_argument("unknown distance measure '" + std::string(name) +
                              "' (expected hel or jsd)");
}

DistanceMatrix::DistanceMatrix(std::size_t z, std::vector<double> values)
    : z_(z), values_(std::move(values)) {
  if (values_.size() != z_ * z_) throw std::invalid_argument("distance matrix is not square");
  for (std::size_t x = 0; x < z_; ++x) {
    if ((*this)(x, x) != 0.0) throw std::invalid_argument("distance matrix diagonal must be 0");
    for (std::size_t y = x + 1; y < z_; ++y) {
      const double v = (*this)(x, y);
      if (v != (*this)(y, x)) throw std::invalid_argument("distance matrix is not symmetric");
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("distance outside [0, 1]");
    }
  }
}

DistanceMatrix distance_matrix(const AttentionMap& map, Measure measure) {
  DistanceMatrix d(map.z);
  for (std::size_t x = 0; x < map.z; ++x) {
    const auto row_x = map.row(x);
    for (std::size_t y = x + 1; y < map.z; ++y) {
      d.set(x, y, measure_distance(measure, row_x, map.row(y)));
    }
  }
  return d;
}

SpanPairSums::SpanPairSums(const DistanceMatrix& d)
    : z_(d.size()), prefix_((z_ + 1) * (z_ + 1), 0.0) {
  const std::size_t w = z_ + 1;
  // prefix(a, b) = prefix(a-1, b) + sum_{a-1 < y < b} D[a-1][y]
  for (std::size_t a = 1; a <= z_; ++a) {
    const std::size_t x = a - 1;
    double row = 0.0;
    for (std::size_t b = 0; b <= z_; ++b) {
      if (b >= 1 && b - 1 > x) row += d(x, b - 1);
      prefix_[a * w + b] = prefix_[(a - 1) * w + b] + row;
    }
  }
}

double SpanPairSums::pair_score(std::size_t first, std::size_t last) const {
  if (first == last) return 0.0;
  const double width = static_cast<double>(last - first + 1);
  return pair_sum(first, last) / (width * (width - 1.0) / 2.0);
}

double pair_score(const DistanceMatrix& d, std::size_t first, std::size_t last) {
  if (first < 1 || last < first || last > d.size()) {
    throw std::out_of_range("span (" + std::to_string(first) + ", " + std::to_string(last) +
                            ") outside sentence of length " + std::to_string(d.size()));
  }
  if (first == last) return 0.0;
  double sum = 0.0;
  for (std::size_t x = first - 1; x < last; ++x) {
    for (std::size_t y = x + 1; y < last; ++y) sum += d(x, y);
  }
  const double width = static_cast<double>(last - first + 1);
  return sum / (width * (width - 1.0) / 2.0);
}

DecodeResult cky_decode(const DistanceMatrix& d) {
  const std::size_t z = d.size();
  if (z == 0) throw std::invalid_argument("cannot decode an empty sentence");

  ScoreChart chart;
  chart.z = z;
  const std::size_t w = z + 1;
  chart.span_score.assign(w * w, 0.0);
  chart.best_split.assign(w * w, 0);

  const SpanPairSums sums(d);
  for (std::size_t width = 2; width <= z; ++width) {
    for (std::size_t first = 1; first + width - 1 <= z; ++first) {
      const std::size_t last = first + width - 1;
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_k = first;
      for (std::size_t k = first; k < last; ++k) {
        const double split = chart.span_score[first * w + k] + chart.span_score[(k + 1) * w + last];
        if (split < best) {
          best = split;
          best_k = k;
        }
      }
      chart.span_score[first * w + last] = sums.pair_score(first, last) + best;
      chart.best_split[first * w + last] = best_k;
    }
  }

  DecodeResult result{
      BinaryTree::from_splits(1, z, [&](std::size_t f, std::size_t l) { return chart.split(f, l); }),
      std::move(chart), 0.0};
  result.cost = result.chart.score(1, z);
  return result;
}

double tree_cost(const BinaryTree& tree, const DistanceMatrix& d) {
  double cost = 0.0;
  for (const Span& s : tree.internal_spans()) cost += pair_score(d, s.first, s.last);
  return cost;
}

std::string chart_to_json(const ScoreChart& chart) {
  nlohmann::json scores = nlohmann::json::array();
  nlohmann::json splits = nlohmann::json::array();
  for (std::size_t i = 1; i <= chart.z; ++i) {
    nlohmann::json score_row = nlohmann::json::array();
    nlohmann::json split_row = nlohmann::json::array();
    for (std::size_t j = 1; j <= chart.z; ++j) {
      score_row.push_back(chart.score(i, j));
      split_row.push_back(chart.split(i, j));
    }
    scores.push_back(std::move(score_row));
    splits.push_back(std::move(split_row));
  }
  return nlohmann::json{{"z", chart.z}, {"span_score", scores}, {"best_split", splits}}.dump();
}

}  // namespace attnparse
