#include "attnparse/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <stdexcept>

namespace attnparse {

namespace {

DistanceVector combine(std::vector<DistanceVector> vectors, bool rank_normalized) {
  if (rank_normalized) {
    for (auto& v : vectors) v = rank_normalize(v);
  }
  return average_distances(vectors);
}

}  // namespace

BinaryTree ensemble_parse(const ArchiveSet& archives, std::span<const HeadId> heads,
                          std::uint32_t sentence_id, Measure measure, bool rank_normalized) {
  if (heads.empty()) throw std::invalid_argument("ensemble needs at least one head");
  std::vector<DistanceVector> vectors;
  vectors.reserve(heads.size());
  for (const auto& h : heads) vectors.push_back(decode_head(archives, h, sentence_id, measure));
  return distance_to_tree(combine(std::move(vectors), rank_normalized));
}

std::vector<BinaryTree> ensemble_parse_all(const ArchiveSet& archives,
                                           std::span<const HeadId> heads,
                                           std::span<const std::uint32_t> sentence_ids,
                                           Measure measure, bool rank_normalized, Execution exec) {
  if (heads.empty()) throw std::invalid_argument("ensemble needs at least one head");
  const auto decoded = decode_heads(archives, heads, sentence_ids, measure, exec);
  std::vector<BinaryTree> out;
  out.reserve(sentence_ids.size());
  for (std::size_t s = 0; s < sentence_ids.size(); ++s) {
    std::vector<DistanceVector> vectors;
    vectors.reserve(heads.size());
    for (const auto& per_head : decoded) vectors.push_back(per_head[s]);
    out.push_back(distance_to_tree(combine(std::move(vectors), rank_normalized)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ValidationScorer

ValidationScorer::ValidationScorer(const ArchiveSet& archives,
                                   std::vector<ValidationSentence> sentences,
                                   ScorerOptions options)
    : archives_(archives), sentences_(std::move(sentences)), options_(options) {
  if (sentences_.empty()) throw std::invalid_argument("validation set is empty");
  for (const auto& s : sentences_) {
    if (!archives_.has_sentence(s.id)) {
      throw std::out_of_range("validation sentence " + std::to_string(s.id) +
                              " is missing from an archive");
    }
    const auto z = archives_.sentence_length(s.id);
    if (z != s.length) {
      throw std::invalid_argument("validation sentence " + std::to_string(s.id) + " has " +
                                  std::to_string(s.length) + " words but the archives have " +
                                  std::to_string(z));
    }
    ids_.push_back(s.id);
  }
}

void ValidationScorer::prepare(std::span<const HeadId> heads) {
  std::vector<HeadId> missing;
  {
    std::shared_lock lock(decode_mutex_);
    for (const auto& h : heads) {
      if (!decoded_.contains(h)) missing.push_back(h);
    }
  }
  if (missing.empty()) return;
  auto vectors = decode_heads(archives_, missing, ids_, options_.measure, options_.execution);
  std::unique_lock lock(decode_mutex_);
  for (std::size_t i = 0; i < missing.size(); ++i) decoded_.try_emplace(missing[i], std::move(vectors[i]));
}

const std::vector<DistanceVector>& ValidationScorer::head_vectors(const HeadId& head) {
  {
    std::shared_lock lock(decode_mutex_);
    if (auto it = decoded_.find(head); it != decoded_.end()) return it->second;
  }
  auto vectors = decode_heads(archives_, std::span<const HeadId>(&head, 1), ids_,
                              options_.measure, Execution::serial);
  std::unique_lock lock(decode_mutex_);
  return decoded_.try_emplace(head, std::move(vectors.front())).first->second;
}

std::vector<BinaryTree> ValidationScorer::trees(std::span<const HeadId> heads) {
  if (heads.empty()) throw std::invalid_argument("cannot score an empty head set");
  std::vector<const std::vector<DistanceVector>*> per_head;
  per_head.reserve(heads.size());
  for (const auto& h : heads) per_head.push_back(&head_vectors(h));

  std::vector<BinaryTree> out;
  out.reserve(sentences_.size());
  for (std::size_t s = 0; s < sentences_.size(); ++s) {
    std::vector<DistanceVector> vectors;
    vectors.reserve(per_head.size());
    for (const auto* v : per_head) vectors.push_back((*v)[s]);
    out.push_back(distance_to_tree(combine(std::move(vectors), options_.rank_normalized)));
  }
  return out;
}

double ValidationScorer::score(std::span<const HeadId> heads) {
  std::vector<HeadId> key(heads.begin(), heads.end());
  std::sort(key.begin(), key.end());
  {
    std::shared_lock lock(memo_mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  // averaging order follows the caller's order; memo key is order-free
  const auto predicted = trees(heads);
  std::vector<SentenceScore> scores;
  scores.reserve(predicted.size());
  for (std::size_t s = 0; s < predicted.size(); ++s) {
    scores.push_back(sentence_f1(predicted[s].nontrivial_spans(), sentences_[s].gold,
                                 options_.empty_gold));
  }
  const double f1 = corpus_f1(scores);
  std::unique_lock lock(memo_mutex_);
  return memo_.try_emplace(std::move(key), f1).first->second;
}

std::size_t ValidationScorer::memo_size() const {
  std::shared_lock lock(memo_mutex_);
  return memo_.size();
}

// ---------------------------------------------------------------------------
// HeadPool

HeadPool::HeadPool(std::vector<PoolEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (std::isnan(e.val)) throw std::invalid_argument("head " + e.head.to_string() + " has NaN score");
  }
  std::sort(entries_.begin(), entries_.end(), [](const PoolEntry& a, const PoolEntry& b) {
    if (a.val != b.val) return a.val > b.val;
    return a.head < b.head;
  });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].head == entries_[i - 1].head) {
      throw std::invalid_argument("head " + entries_[i].head.to_string() + " appears twice in pool");
    }
  }
}

std::vector<HeadId> HeadPool::heads() const {
  std::vector<HeadId> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.head);
  return out;
}

std::vector<HeadId> HeadPool::heads_at(std::span<const std::size_t> positions) const {
  std::vector<HeadId> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(entries_.at(p).head);
  return out;
}

std::set<std::uint32_t> HeadPool::models() const {
  std::set<std::uint32_t> out;
  for (const auto& e : entries_) out.insert(e.head.model);
  return out;
}

HeadPool build_pool(const ArchiveSet& archives, ValidationScorer& scorer) {
  const auto heads = archives.all_heads();
  scorer.prepare(heads);
  std::vector<PoolEntry> entries;
  entries.reserve(heads.size());
  for (const auto& h : heads) entries.push_back({h, scorer.score_head(h)});
  return HeadPool(std::move(entries));
}

HeadPool build_pool(std::span<const HeadId> heads, const SetScorer& scorer) {
  std::vector<PoolEntry> entries;
  entries.reserve(heads.size());
  for (const auto& h : heads) entries.push_back({h, scorer(std::span<const HeadId>(&h, 1))});
  return HeadPool(std::move(entries));
}

// ---------------------------------------------------------------------------
// strategies

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::single: return "single";
    case Strategy::layer: return "layer";
    case Strategy::topk: return "topk";
    case Strategy::greedy: return "greedy";
    case Strategy::beam: return "beam";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "single") return Strategy::single;
  if (lower == "layer") return Strategy::layer;
  if (lower == "topk" || lower == "top-k") return Strategy::topk;
  if (lower == "greedy") return Strategy::greedy;
  if (lower == "beam") return Strategy::beam;
  throw std::invalid_argument("unknown strategy '" + std::string(name) +
                              "' (expected single, layer, topk, greedy or beam)");
}

std::size_t default_top_k(std::size_t num_models) { return num_models > 1 ? 30 : 20; }
std::size_t default_beam_size(std::size_t num_models) { return num_models > 1 ? 30 : 5; }

GreedyOutcome greedy_search(std::size_t pool_size, const PositionScorer& val) {
  GreedyOutcome out;
  double best = 0.0;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < pool_size; ++i) {
    current.push_back(i);
    const double psi = val(current);
    const bool accept = psi > best;
    out.trace.push_back({i + 1, {current}, {}, {psi}, {accept}});
    if (accept) {
      best = psi;
    } else {
      current.pop_back();
    }
  }
  if (current.empty() && pool_size > 0) {
    out.degenerate = true;
    current.push_back(0);
    best = val(current);
  }
  out.chosen = std::move(current);
  out.val = best;
  return out;
}

namespace {

struct Candidate {
  std::vector<std::size_t> set;
  double val = 0.0;
};

void score_candidates(std::vector<Candidate>& candidates, const PositionScorer& val,
                      Execution exec) {
  const auto n = static_cast<std::int64_t>(candidates.size());
  if (exec == Execution::serial) {
    for (auto& c : candidates) c.val = val(c.set);
    return;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      candidates[i].val = val(candidates[i].set);
    } catch (...) {
#pragma omp critical(attnparse_beam_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

TraceRound to_trace(std::size_t round, const std::vector<Candidate>& candidates,
                    std::size_t kept) {
  TraceRound t;
  t.round = round;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    t.positions.push_back(candidates[i].set);
    t.vals.push_back(candidates[i].val);
    t.accepted.push_back(i < kept);
  }
  return t;
}

}  // namespace

BeamOutcome beam_search(std::size_t pool_size, std::size_t beam_size, const PositionScorer& val,
                        Execution exec) {
  if (beam_size < 1) throw std::invalid_argument("beam size must be at least 1");
  BeamOutcome out;
  if (pool_size == 0) return out;

  std::vector<Candidate> beam;
  for (std::size_t i = 0; i < std::min(beam_size, pool_size); ++i) beam.push_back({{i}, 0.0});
  score_candidates(beam, val, exec);
  out.trace.push_back(to_trace(0, beam, beam.size()));
  out.generations.emplace_back();
  for (const auto& c : beam) out.generations.back().push_back(c.set);

  std::size_t exhausted = 0;
  std::size_t round = 0;
  while (exhausted < beam_size) {
    ++round;
    exhausted = 0;
    std::vector<Candidate> spawned;
    for (const auto& h : beam) {
      const std::size_t last = h.set.back();
      for (std::size_t i = 1; i <= beam_size; ++i) {
        if (last + i >= pool_size) {
          ++exhausted;
          break;
        }
        Candidate c{h.set, 0.0};
        c.set.push_back(last + i);
        spawned.push_back(std::move(c));
      }
    }
    if (spawned.empty()) break;
    score_candidates(spawned, val, exec);
    std::stable_sort(spawned.begin(), spawned.end(),
                     [](const Candidate& a, const Candidate& b) { return a.val > b.val; });
    const std::size_t kept = std::min(beam_size, spawned.size());
    out.trace.push_back(to_trace(round, spawned, kept));
    spawned.resize(kept);
    beam = std::move(spawned);
    out.generations.emplace_back();
    for (const auto& c : beam) out.generations.back().push_back(c.set);
  }

  const auto best = std::max_element(beam.begin(), beam.end(), [](const Candidate& a,
                                                                   const Candidate& b) {
    return a.val < b.val;  // max_element keeps the first maximum
  });
  out.chosen = best->set;
  out.val = best->val;
  return out;
}

namespace {

PositionScorer positions_to_heads(const HeadPool& pool, const SetScorer& val) {
  return [&pool, &val](std::span<const std::size_t> positions) {
    const auto heads = pool.heads_at(positions);
    return val(heads);
  };
}

void attach_sets(std::vector<TraceRound>& trace, const HeadPool& pool) {
  for (auto& round : trace) {
    for (const auto& p : round.positions) round.sets.push_back(pool.heads_at(p));
  }
}

void require_nonempty(const HeadPool& pool) {
  if (pool.empty()) throw std::invalid_argument("head pool is empty");
}

}  // namespace

HeadSelection select_single(const HeadPool& pool) {
  require_nonempty(pool);
  HeadSelection s;
  s.strategy = Strategy::single;
  s.chosen = {pool[0].head};
  s.validation_f1 = pool[0].val;
  return s;
}

HeadSelection select_layer(const HeadPool& pool, const SetScorer& val) {
  require_nonempty(pool);
  if (pool.models().size() != 1) {
    throw std::invalid_argument("layer-wise selection is defined for a single model only");
  }
  std::map<std::uint32_t, std::vector<HeadId>> layers;
  for (const auto& e : pool.entries()) layers[e.head.layer].push_back(e.head);

  HeadSelection s;
  s.strategy = Strategy::layer;
  std::optional<double> best;
  std::size_t round = 0;
  for (const auto& [layer, heads] : layers) {
    const double v = val(heads);
    const bool better = !best || v > *best;
    s.trace.push_back({++round, {}, {heads}, {v}, {better}});
    if (better) {
      best = v;
      s.chosen = heads;
    }
  }
  s.validation_f1 = *best;
  return s;
}

HeadSelection select_topk(const HeadPool& pool, std::size_t k, const SetScorer& val) {
  if (k < 1) throw std::invalid_argument("K must be at least 1");
  require_nonempty(pool);
  HeadSelection s;
  s.strategy = Strategy::topk;
  s.top_k = k;
  for (std::size_t i = 0; i < std::min(k, pool.size()); ++i) s.chosen.push_back(pool[i].head);
  s.validation_f1 = val(s.chosen);
  return s;
}

HeadSelection select_greedy(const HeadPool& pool, const SetScorer& val) {
  require_nonempty(pool);
  auto outcome = greedy_search(pool.size(), positions_to_heads(pool, val));
  attach_sets(outcome.trace, pool);

  HeadSelection s;
  s.strategy = Strategy::greedy;
  s.chosen = pool.heads_at(outcome.chosen);
  s.validation_f1 = outcome.val;
  s.degenerate = outcome.degenerate;
  s.trace = std::move(outcome.trace);
  return s;
}

HeadSelection select_beam(const HeadPool& pool, std::size_t beam_size, const SetScorer& val,
                          Execution exec) {
  require_nonempty(pool);
  auto outcome = beam_search(pool.size(), beam_size, positions_to_heads(pool, val), exec);
  attach_sets(outcome.trace, pool);

  HeadSelection s;
  s.strategy = Strategy::beam;
  s.beam_size = beam_size;
  s.chosen = pool.heads_at(outcome.chosen);
  s.validation_f1 = outcome.val;
  s.trace = std::move(outcome.trace);
  return s;
}

// ---------------------------------------------------------------------------
// validation subsampling

std::vector<std::size_t> subsample_indices(std::size_t total, std::size_t count,
                                           std::uint64_t seed) {
  if (count < 1 || count > total) {
    throw std::invalid_argument("subset size " + std::to_string(count) + " outside [1, " +
                                std::to_string(total) + "]");
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  // partial Fisher-Yates on raw engine output keeps the subset identical
  // across standard library implementations
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (total - i));
    std::swap(order[i], order[j]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

std::size_t fraction_to_count(std::size_t total, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("subset fraction must be in (0, 1]");
  }
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  return std::max<std::size_t>(1, n);
}

}  // namespace attnparse
