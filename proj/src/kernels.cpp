#include "attnparse/kernels.hpp"

#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace attnparse {

void set_worker_count(int workers) {
#ifdef _OPENMP
  omp_set_num_threads(workers > 0 ? workers : omp_get_num_procs());
#else
  (void)workers;
#endif
}

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

DistanceVector decode_head(const ArchiveSet& archives, const HeadId& head,
                           std::uint32_t sentence_id, Measure measure) {
  const AttentionMap map = archives.head_map(head, sentence_id);
  return tree_to_distance(cky_decode(distance_matrix(map, measure)).tree);
}

namespace {

void check_inputs(const ArchiveSet& archives, std::span<const HeadId> heads,
                  std::span<const std::uint32_t> sentence_ids) {
  for (const auto& h : heads) {
    if (!archives.contains(h)) throw std::out_of_range("unknown head " + h.to_string());
  }
  for (auto id : sentence_ids) {
    if (!archives.has_sentence(id)) {
      throw std::out_of_range("sentence " + std::to_string(id) + " missing from an archive");
    }
  }
}

}  // namespace

std::vector<std::vector<DistanceVector>> decode_heads(const ArchiveSet& archives,
                                                      std::span<const HeadId> heads,
                                                      std::span<const std::uint32_t> sentence_ids,
                                                      Measure measure, Execution exec) {
  check_inputs(archives, heads, sentence_ids);
  std::vector<std::vector<DistanceVector>> out(heads.size(),
                                               std::vector<DistanceVector>(sentence_ids.size()));
  const auto num_heads = static_cast<std::int64_t>(heads.size());
  const auto num_sentences = static_cast<std::int64_t>(sentence_ids.size());

  if (exec == Execution::serial) {
    for (std::int64_t h = 0; h < num_heads; ++h) {
      for (std::int64_t s = 0; s < num_sentences; ++s) {
        out[h][s] = decode_head(archives, heads[h], sentence_ids[s], measure);
      }
    }
    return out;
  }

  std::exception_ptr failure;
  const std::int64_t total = num_heads * num_sentences;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t task = 0; task < total; ++task) {
    const std::int64_t h = task / num_sentences;
    const std::int64_t s = task % num_sentences;
    try {
      out[h][s] = decode_head(archives, heads[h], sentence_ids[s], measure);
    } catch (...) {
#pragma omp critical(attnparse_decode_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<DistanceMatrix> head_distance_matrices(const ArchiveSet& archives,
                                                   std::uint32_t sentence_id, Measure measure,
                                                   Execution exec) {
  const auto heads = archives.all_heads();
  check_inputs(archives, heads, std::span<const std::uint32_t>(&sentence_id, 1));
  std::vector<DistanceMatrix> out(heads.size());
  const auto n = static_cast<std::int64_t>(heads.size());
  if (exec == Execution::serial) {
    for (std::int64_t h = 0; h < n; ++h) {
      out[h] = distance_matrix(archives.head_map(heads[h], sentence_id), measure);
    }
    return out;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::int64_t h = 0; h < n; ++h) {
    try {
      out[h] = distance_matrix(archives.head_map(heads[h], sentence_id), measure);
    } catch (...) {
#pragma omp critical(attnparse_matrix_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace attnparse
