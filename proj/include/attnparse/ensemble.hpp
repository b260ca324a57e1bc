#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/distance.hpp"
#include "attnparse/eval.hpp"
#include "attnparse/kernels.hpp"
#include "attnparse/scoring.hpp"

namespace attnparse {

/// Tree from a head subset: decode every head, convert to heights, average,
/// restore. Throws std::invalid_argument on an empty head list and
/// std::out_of_range for missing heads or sentences.
BinaryTree ensemble_parse(const ArchiveSet& archives, std::span<const HeadId> heads,
                          std::uint32_t sentence_id, Measure measure,
                          bool rank_normalized = false);

/// ensemble_parse over many sentences, fanned out across workers when `exec`
/// is parallel. Output is aligned with `sentence_ids`.
std::vector<BinaryTree> ensemble_parse_all(const ArchiveSet& archives,
                                           std::span<const HeadId> heads,
                                           std::span<const std::uint32_t> sentence_ids,
                                           Measure measure, bool rank_normalized, Execution exec);

/// One validation sentence: its id in the archives and its gold spans.
struct ValidationSentence {
  std::uint32_t id = 0;
  std::size_t length = 0;
  std::set<Span> gold;
};

struct ScorerOptions {
  Measure measure = Measure::hellinger;
  EmptyGoldPolicy empty_gold = EmptyGoldPolicy::exclude;
  bool rank_normalized = false;
  Execution execution = Execution::parallel;
};

/// Corpus F1 of head subsets on a validation set.
///
/// Per-head height vectors are decoded once and cached; set scores are
/// memoized on the sorted head tuple. Both caches are safe under concurrent
/// score() calls.
class ValidationScorer {
 public:
  /// Throws std::invalid_argument for an empty validation set or when a
  /// sentence length disagrees with the archives, std::out_of_range when a
  /// sentence is missing.
  ValidationScorer(const ArchiveSet& archives, std::vector<ValidationSentence> sentences,
                   ScorerOptions options = {});

  /// Decodes the given heads on every validation sentence (in parallel when
  /// configured) ahead of scoring.
  void prepare(std::span<const HeadId> heads);

  double score(std::span<const HeadId> heads);
  double score_head(const HeadId& head) { return score(std::span<const HeadId>(&head, 1)); }

  /// Per-sentence ensemble trees for `heads`, aligned with sentences().
  std::vector<BinaryTree> trees(std::span<const HeadId> heads);

  const std::vector<ValidationSentence>& sentences() const { return sentences_; }
  const ArchiveSet& archives() const { return archives_; }
  const ScorerOptions& options() const { return options_; }
  std::size_t memo_size() const;

 private:
  const std::vector<DistanceVector>& head_vectors(const HeadId& head);

  const ArchiveSet& archives_;
  std::vector<ValidationSentence> sentences_;
  std::vector<std::uint32_t> ids_;
  ScorerOptions options_;

  mutable std::shared_mutex decode_mutex_;
  std::map<HeadId, std::vector<DistanceVector>> decoded_;
  mutable std::shared_mutex memo_mutex_;
  std::map<std::vector<HeadId>, double> memo_;
};

/// Scores a subset of heads; the list is always in sorted-pool order.
using SetScorer = std::function<double(std::span<const HeadId>)>;

struct PoolEntry {
  HeadId head;
  double val = 0.0;
};

/// Heads with their single-head validation scores, sorted by descending
/// score with (model, layer, head) order breaking ties.
class HeadPool {
 public:
  HeadPool() = default;
  /// Sorts the entries; duplicate heads are rejected.
  explicit HeadPool(std::vector<PoolEntry> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const PoolEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<PoolEntry>& entries() const { return entries_; }
  std::vector<HeadId> heads() const;
  /// Heads at the given sorted positions.
  std::vector<HeadId> heads_at(std::span<const std::size_t> positions) const;
  /// Models represented in the pool.
  std::set<std::uint32_t> models() const;

 private:
  std::vector<PoolEntry> entries_;
};

/// Pool over every head of every archive, scored one head at a time.
HeadPool build_pool(const ArchiveSet& archives, ValidationScorer& scorer);
/// Pool from precomputed per-head scores.
HeadPool build_pool(std::span<const HeadId> heads, const SetScorer& scorer);

enum class Strategy { single, layer, topk, greedy, beam };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

/// Default hyperparameters: K=20, b=5 for one model; K=30, b=30 for several.
std::size_t default_top_k(std::size_t num_models);
std::size_t default_beam_size(std::size_t num_models);

struct SubsetInfo {
  std::size_t used = 0;
  std::size_t total = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> fraction;
};

/// One accepted or rejected greedy step, or one beam generation.
struct TraceRound {
  std::size_t round = 0;
  /// Sorted-pool positions of each evaluated set.
  std::vector<std::vector<std::size_t>> positions;
  std::vector<std::vector<HeadId>> sets;
  std::vector<double> vals;
  std::vector<bool> accepted;
};

struct HeadSelection {
  Strategy strategy = Strategy::single;
  std::vector<HeadId> chosen;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> beam_size;
  double validation_f1 = 0.0;
  Measure measure = Measure::hellinger;
  bool rank_normalized = false;
  SubsetInfo subset;
  /// Greedy accepted nothing (every score was 0); the best single head was
  /// returned instead.
  bool degenerate = false;
  /// Model ids by model index, for persisting heads by name.
  std::vector<std::string> model_ids;
  std::vector<TraceRound> trace;
};

// Index-level search cores. Positions refer to the sorted pool; results are
// ascending position lists.

using PositionScorer = std::function<double(std::span<const std::size_t>)>;

struct GreedyOutcome {
  std::vector<std::size_t> chosen;
  double val = 0.0;
  bool degenerate = false;
  std::vector<TraceRound> trace;
};

/// Walks the pool in order, keeping a head only when the grown set scores
/// strictly higher than the best so far.
GreedyOutcome greedy_search(std::size_t pool_size, const PositionScorer& val);

struct BeamOutcome {
  std::vector<std::size_t> chosen;
  double val = 0.0;
  /// Beam contents after each round (generation 0 is the initial beam).
  std::vector<std::vector<std::vector<std::size_t>>> generations;
  std::vector<TraceRound> trace;
};

/// Beam search over head subsets. Starts from the first b singletons; each
/// round extends every beam set H by each of the next b pool positions after
/// max(H), counting one exhaustion whenever an extension would run past the
/// pool end, and keeps the best b candidates (ties: earlier spawn first).
/// Stops when exhaustions reach b in a round, or when a round spawns nothing
/// (the previous beam is kept). Returns the best set of the final beam.
/// Candidate scoring runs in parallel when `exec` is parallel, so `val` must
/// be thread-safe in that case. Throws std::invalid_argument for b < 1.
BeamOutcome beam_search(std::size_t pool_size, std::size_t beam_size, const PositionScorer& val,
                        Execution exec = Execution::serial);

HeadSelection select_single(const HeadPool& pool);
/// Throws std::invalid_argument for pools drawn from more than one model.
HeadSelection select_layer(const HeadPool& pool, const SetScorer& val);
HeadSelection select_topk(const HeadPool& pool, std::size_t k, const SetScorer& val);
HeadSelection select_greedy(const HeadPool& pool, const SetScorer& val);
HeadSelection select_beam(const HeadPool& pool, std::size_t beam_size, const SetScorer& val,
                          Execution exec = Execution::serial);

/// Deterministic subset of `count` indices out of [0, total), returned in
/// ascending order. Throws std::invalid_argument unless 1 <= count <= total.
std::vector<std::size_t> subsample_indices(std::size_t total, std::size_t count,
                                           std::uint64_t seed);
/// round(fraction * total), at least 1. Throws unless 0 < fraction <= 1.
std::size_t fraction_to_count(std::size_t total, double fraction);

template <class T>
std::vector<T> subsample_validation(std::span<const T> items, std::size_t count,
                                    std::uint64_t seed) {
  std::vector<T> out;
  for (std::size_t i : subsample_indices(items.size(), count, seed)) out.push_back(items[i]);
  return out;
}

}  // namespace attnparse
